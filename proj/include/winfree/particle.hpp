#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "winfree/uncertainty.hpp"

namespace winfree {

struct ParticleConfig {
  std::vector<double> nu;
  double kappa = 1.0;
  /// z-independent initial phases. Ignored when `initial_rule` is set.
  std::vector<double> initial_phases;
  /// Optional z-dependent initial datum theta_i^in(z) and its z-derivative.
  std::function<double(std::size_t i, double z)> initial_rule;
  std::function<double(std::size_t i, double z)> initial_rule_dz;
  /// Radius of the box B_c(0); only needed for trapping analysis.
  std::optional<double> initial_bound;
  /// +1 is the attractive coupling; -1 flips the sign of the interaction.
  double coupling_sign = 1.0;

  std::size_t size() const noexcept { return nu.size(); }
  double v_inf() const noexcept;
  std::vector<double> initial(double z) const;
  std::vector<double> initial_dz(double z) const;

  /// Throws PreconditionError on inconsistent sizes, kappa < 0, or (when
  /// `check_trap`) initial phases outside B_c(0) at the given z nodes.
  void validate(bool check_trap = false, std::span<const double> z_nodes = {}) const;
};

struct PhaseState {
  std::vector<double> phases;
  double time = 0.0;
};

struct SensitivityState {
  std::vector<double> d_phases;
};

/// Sampled states of a run; rows are stored contiguously.
struct Trajectory {
  std::size_t n = 0;
  std::vector<double> times;
  std::vector<double> data;

  std::size_t samples() const noexcept { return times.size(); }
  std::span<const double> at(std::size_t k) const { return {data.data() + k * n, n}; }
  void push(double t, std::span<const double> row);
};

struct IntegrationOptions {
  double t_end = 1.0;
  double dt = 1e-3;
  std::size_t stride = 1;
};

/// nu_i - sign (a(z) kappa / N) sin(theta_i) sum_j (1 + cos theta_j)^z.
std::vector<double> drift(const PhaseState& state, const ParticleConfig& cfg, double z);
void drift_into(std::span<const double> theta, const ParticleConfig& cfg, double z, double a_z,
                std::span<double> out, std::span<double> scratch);

/// Fixed-step classical RK4 for the fixed-z system.
Trajectory integrate(const ParticleConfig& cfg, double z, const IntegrationOptions& opt);
Trajectory integrate_from(const ParticleConfig& cfg, std::span<const double> theta0, double z,
                          const IntegrationOptions& opt);

// ---------------------------------------------------------------------------
// Stochastic Galerkin system

struct SgPhaseState {
  std::size_t n = 0;
  std::size_t modes = 1;       // M + 1
  std::vector<double> coeffs;  // row i holds theta_hat_{i,0..M}
  double time = 0.0;

  double& at(std::size_t i, std::size_t k) { return coeffs[i * modes + k]; }
  double at(std::size_t i, std::size_t k) const { return coeffs[i * modes + k]; }
};

class SgSystem {
 public:
  SgSystem(RandomParameter rp, int degree, int quad_order = -1);

  const RandomParameter& parameter() const noexcept { return rp_; }
  const ChaosBasis& basis() const noexcept { return basis_; }
  const QuadratureRule& quadrature() const noexcept { return quad_; }
  std::size_t modes() const noexcept { return basis_.size(); }
  /// Phi_k at quadrature node q.
  double phi(std::size_t q, std::size_t k) const { return phi_[q * modes() + k]; }

  SgPhaseState project_initial(const ParticleConfig& cfg) const;

  /// theta_i^M(z_q) for all i.
  void reconstruct_node(const SgPhaseState& s, std::size_t q, std::span<double> out) const;
  std::vector<double> reconstruct_at(const SgPhaseState& s, double h) const;

  /// nu_i delta_{0h} + projection of the nodal coupling velocity.
  void drift_into(const SgPhaseState& s, const ParticleConfig& cfg, std::span<double> out) const;

 private:
  RandomParameter rp_;
  ChaosBasis basis_;
  QuadratureRule quad_;
  std::vector<double> phi_;
  std::vector<double> a_nodes_;
};

std::vector<double> sg_drift(const SgPhaseState& state, const ParticleConfig& cfg,
                             const SgSystem& sys);

struct SgTrajectory {
  std::vector<double> times;
  std::vector<SgPhaseState> states;
};

SgTrajectory sg_integrate(const ParticleConfig& cfg, const SgSystem& sys,
                          const IntegrationOptions& opt);

// ---------------------------------------------------------------------------
// Variational system

inline constexpr double kSensitivityLogFloor = 1e-12;

std::vector<double> sensitivity_drift(const PhaseState& phase, const SensitivityState& sens,
                                      const ParticleConfig& cfg, double z);

struct SensitivityRun {
  Trajectory phases;
  Trajectory sensitivities;
};

/// Joint RK4 on (Theta, d_z Theta).
SensitivityRun integrate_with_sensitivity(const ParticleConfig& cfg, double z,
                                          const IntegrationOptions& opt,
                                          double log_floor = kSensitivityLogFloor);

// ---------------------------------------------------------------------------
// Diagnostics

struct RotationNumbers {
  std::vector<double> rho;
  double window = 0.0;
  bool short_window = false;
};

RotationNumbers rotation_numbers(const Trajectory& traj, double burn_in);

enum class Pattern { death, locking, incoherence, mixed };
const char* pattern_name(Pattern p) noexcept;

Pattern classify_pattern(std::span<const double> rho, double tol);
double default_pattern_tol(double window, double v_inf) noexcept;

struct TrapCheck {
  bool invariant = true;
  std::optional<double> first_exit;
};

TrapCheck trapping_check(const Trajectory& traj, double c);
std::optional<double> entrance_time(const Trajectory& traj, double c_star);

struct H1zNorms {
  double norm_theta = 0.0;
  double norm_dz_theta = 0.0;
  double h1z = 0.0;
};

H1zNorms h1z_norms(const std::vector<std::span<const double>>& phases,
                   const std::vector<std::span<const double>>& sensitivities,
                   const QuadratureRule& quad);

double deviation_l1(std::span<const double> phases, std::span<const double> equilibrium);
double max_abs(std::span<const double> v) noexcept;

}  // namespace winfree
