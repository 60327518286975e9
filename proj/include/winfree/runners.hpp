#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "winfree/analysis.hpp"
#include "winfree/config.hpp"
#include "winfree/kinetic.hpp"
#include "winfree/particle.hpp"
#include "winfree/output.hpp"
#include "winfree/rng.hpp"

namespace winfree {

/// Runs task(i) for i in [0, count) on `threads` workers. The first
/// exception thrown by a task is rethrown after all workers join.
void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& task);

/// Draws from the periodized two-Gaussian mixture, wrapped into [0, 2 pi).
std::vector<double> sample_bimodal(std::size_t n, double theta_bar_1, double theta_bar_2,
                                   double sigma0_sq, Philox& rng);

/// Number of fixed steps and the step actually used to reach t_end.
struct StepPlan {
  std::size_t steps = 0;
  double dt = 0.0;
};
StepPlan plan_steps(double t_end, double dt);

// ---------------------------------------------------------------------------
// Mean-field comparison and bands

struct DensitySnapshot {
  double t = 0.0;
  std::vector<double> kinetic_mean;
  std::vector<double> kinetic_variance;
  std::vector<double> particle_mean;
  std::vector<double> particle_variance;
  double l1 = 0.0;
};

struct MeanFieldResult {
  double sigma0_sq = 0.0;
  int particles = 0;
  std::vector<DensitySnapshot> snapshots;
  std::vector<double> max_mass_drift;  // per kinetic z node
  double min_nodal = 0.0;
};

/// Kinetic solve of the projected system and the sG particle reconstruction
/// from the same datum, compared at cfg.snapshots.
MeanFieldResult mean_field_compare(const ExperimentConfig& cfg, double sigma0_sq, int particles,
                                   std::uint64_t stream);

// ---------------------------------------------------------------------------
// Spectral convergence of the temperature

struct SpectralErrorResult {
  std::string law;
  double kappa = 0.0;
  std::vector<int> degrees;
  std::vector<double> errors;
  double self_error = 0.0;  // reference against itself
};

/// Temperature at t_end of the sG particle system at every node of the
/// reference rule.
std::vector<double> sg_temperature_at(const SgSystem& sys, const ParticleConfig& pc,
                                      const IntegrationOptions& opt,
                                      const QuadratureRule& eval_rule);

SpectralErrorResult spectral_error(const ExperimentConfig& cfg, const std::string& law,
                                   double kappa, int threads = 1);

// ---------------------------------------------------------------------------
// Trapping, relaxation and pattern classification

struct TrapNodeResult {
  double z = 0.0;
  double c_star = 0.0;
  double kappa_threshold = 0.0;
  bool assumption = false;
  bool invariant = false;
  double entrance_measured = 0.0;  // NaN when the run never enters
  double entrance_bound = 0.0;
  double decay_rate = 0.0;
  double fitted_slope = 0.0;  // from the measured entrance time; NaN when the window is too short
  double equilibrium_residual = 0.0;
};

struct TrapConfigResult {
  std::size_t index = 0;
  std::size_t n = 0;
  double c = 0.0;
  double kappa = 0.0;
  double v_inf = 0.0;
  std::vector<TrapNodeResult> nodes;
};

/// Random trapped configuration number `index`: N <= 20 oscillators,
/// phases inside B_c(0) and kappa above the threshold at every z node.
ParticleConfig random_trapped_config(const ExperimentConfig& cfg, std::size_t index,
                                     const QuadratureRule& quad, double& c_out);

TrapConfigResult trapping_study(const ExperimentConfig& cfg, std::size_t index);

/// Least-squares slope of ln(dev) over samples with t >= t0 and
/// dev >= floor. Returns NaN with fewer than 5 usable samples.
double log_slope(std::span<const double> t, std::span<const double> dev, double t0,
                 double floor);

inline constexpr double kRelaxationFloor = 1e-11;

// ---------------------------------------------------------------------------
// Sensitivity

struct SensitivityNodeSeries {
  double z = 0.0;
  double tau_e = 0.0;
  std::vector<double> times;
  std::vector<double> norm_theta;
  std::vector<double> norm_dz;
  std::vector<double> envelope;
};

struct SensitivityResult {
  ParticleConfig particles;
  std::vector<SensitivityNodeSeries> nodes;
  std::vector<double> times;
  std::vector<double> h1z;
};

ParticleConfig sensitivity_config(const ExperimentConfig& cfg);
SensitivityResult sensitivity_study(const ExperimentConfig& cfg, double t_end);

struct GradientCheck {
  std::vector<double> deltas;
  std::vector<double> max_errors;
};

/// Max over time and oscillators of |S - (Theta(z+d) - Theta(z-d))/(2d)|.
GradientCheck gradient_check(const ParticleConfig& pc, double z, const IntegrationOptions& opt,
                             std::span<const double> deltas);

// ---------------------------------------------------------------------------
// Kinetic death-state cross-check

struct DeathTrackResult {
  double nu0 = 0.0;
  double kappa = 0.0;
  double d_theta = 0.0;
  std::vector<double> z_nodes;
  std::vector<double> target;       // arcsin(nu0 / sigma) per node
  std::vector<double> max_deviation;  // over t in [0, t_end]
};

DeathTrackResult kinetic_death_track(const RandomParameter& rp, int degree, int n_theta,
                                     double nu0, double kappa_factor, double t_end,
                                     double width);

// ---------------------------------------------------------------------------
// Influence concentration

/// Integral of a(z)(1 + cos theta)^z over |theta| < half_width.
double influence_window_mass(double z, double half_width);

// ---------------------------------------------------------------------------
// File-emitting runners

struct RunResult {
  std::vector<std::filesystem::path> files;
};

Metadata run_metadata(const ExperimentConfig& cfg);

RunResult run_mean_field(const ExperimentConfig& cfg);
RunResult run_bands(const ExperimentConfig& cfg);
RunResult run_spectral_error(const ExperimentConfig& cfg);
RunResult run_death_sweep(const ExperimentConfig& cfg);
RunResult run_sensitivity(const ExperimentConfig& cfg);
RunResult run_trapping(const ExperimentConfig& cfg);
RunResult run_influence_profile(const ExperimentConfig& cfg);

RunResult run_experiment(const ExperimentConfig& cfg);

}  // namespace winfree
