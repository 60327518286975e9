#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "winfree/kinetic.hpp"
#include "winfree/uncertainty.hpp"

namespace winfree {

enum class Experiment {
  mean_field,
  bands,
  spectral_error,
  death_sweep,
  sensitivity,
  trapping,
  influence_profile
};

std::string_view experiment_name(Experiment e) noexcept;
Experiment parse_experiment(std::string_view s);

struct ZLawSpec {
  std::string law = "uniform";  // uniform | gaussian-square
  double lo = 1.0;
  double hi = 3.0;
  double shift = 1.5;

  RandomParameter make() const;
};

struct FrequencySpec {
  std::string model = "zero";  // zero | dirac | uniform
  double nu0 = 0.0;
  double gamma = 0.5;
  int nodes = 16;

  FrequencyModel make() const;
};

struct ExperimentConfig {
  Experiment experiment = Experiment::mean_field;
  std::uint64_t seed = 1;
  int threads = 1;
  std::filesystem::path output = "out";

  // model
  std::vector<int> particles{1000, 10000};
  int degree = 2;
  double kappa = 1.0;
  double c = 1.0;
  double coupling_sign = 1.0;
  int oscillators = 5;

  // grid and time
  int n_theta = 101;
  std::string scheme = "upwind";  // upwind | muscl
  double t_end = 1.0;
  std::string dt_policy = "grid";  // grid (d_theta^2) | fixed
  double dt = 1e-2;
  std::vector<double> snapshots{0.0, 0.25, 0.5, 1.0};

  ZLawSpec z;
  FrequencySpec frequencies;

  // initial datum
  double theta_bar_1 = 0.7853981633974483;
  double theta_bar_2 = 1.5707963267948966;
  std::vector<double> sigma0_sq{0.1, 0.01};

  // spectral error
  int reference_degree = 25;
  int max_degree = 9;
  std::vector<double> kappas{0.1, 1.0};
  std::vector<std::string> laws{"uniform", "gaussian-square"};

  // sweeps
  std::vector<double> gammas{0.05, 0.1, 0.2, 0.3, 0.5};
  std::vector<double> zs{1.0, 2.0, 3.0, 5.0, 9.0};
  std::vector<double> nu0s{0.5, 1.0};
  int configs = 20;

  /// The time step implied by dt_policy.
  double time_step() const;
  /// Throws ConfigError naming the offending field.
  void validate() const;
  /// Canonical text form used for the config hash.
  std::string canonical() const;
  std::uint64_t hash() const;
};

/// Built-in defaults for an experiment.
ExperimentConfig default_config(Experiment e);

/// Parses a YAML document, applies `key=value` overrides (dotted paths) and
/// validates. Unknown keys are rejected.
ExperimentConfig load_config(Experiment e, const std::string& yaml_text,
                             const std::vector<std::string>& overrides = {});
ExperimentConfig load_config_file(Experiment e, const std::filesystem::path& path,
                                  const std::vector<std::string>& overrides = {});

}  // namespace winfree
