#pragma once

#include <functional>
#include <limits>
#include <vector>

#include "winfree/particle.hpp"

namespace winfree {

inline constexpr double kRootTol = 1e-12;
inline constexpr int kRootMaxIter = 200;

/// Bisection on [lo, hi] for a continuous f with a sign change.
/// Throws NumericError when f(lo) and f(hi) have the same strict sign.
double bisect(const std::function<double(double)>& f, double lo, double hi, double tol = kRootTol,
              int max_iter = kRootMaxIter);

/// arccos(z / (z + 1)), the maximizer of sin(y)(1 + cos y)^z on (0, pi).
double beta(double z);

/// sin(y) (1 + cos y)^z.
double adjoint_g(double y, double z);

/// The angle in (0, beta(z)] with the same value of adjoint_g as c.
double c_star(double c, double z);

double kappa_threshold(double c, double z, double v_inf);
bool kappa_assumption_holds(double kappa, double c, double z, double v_inf);

struct EntranceBound {
  double value = std::numeric_limits<double>::infinity();
  bool assumption_holds = false;
};

EntranceBound entrance_time_bound(double c, double z, double kappa, double v_inf);

struct TrappedRegimeReport {
  double c = 0.0;
  double z = 1.0;
  double beta = 0.0;
  double c_star = 0.0;
  double kappa_threshold = 0.0;
  bool kappa_assumption_holds = false;
  double entrance_time_bound = std::numeric_limits<double>::infinity();
};

TrappedRegimeReport trapped_regime(double c, double z, double kappa, double v_inf);

/// Equilibrium Phi(z) inside B_{c*}(0) built from a root of
/// F_z(s) = 1 + (kappa/N) s sum_j I_z(arcsin(-nu_j s)).
std::vector<double> equilibrium(const ParticleConfig& cfg, double z, double c);

/// max_i |nu_i - (kappa/N) sin(phi_i) sum_j I_z(phi_j)|.
double equilibrium_residual(const ParticleConfig& cfg, double z, std::span<const double> phi);

/// kappa z a(z) (1 + cos c*)^z (1 - ((z+1)/z) cos c*).
double decay_rate(double c_star, double z, double kappa);

struct SensitivityCoefficients {
  double C_111 = 0.0;
  double C_11 = 0.0;
  double C_12 = 0.0;
  double C_21 = 0.0;
  double C_22 = 0.0;
};

SensitivityCoefficients sensitivity_coeffs(double c, double z, double kappa, std::size_t n);

/// Upper bound on |d_z Theta(t)| for zero initial sensitivity.
double sensitivity_envelope(double t, const SensitivityCoefficients& k, double tau_e);

struct ThresholdReport {
  bool incoherence_ok = false;
  double incoherence_slack = 0.0;  // bound - kappa
  bool death_ok = false;
  double death_slack = 0.0;        // kappa - bound
  bool locking_ok = false;
  double locking_alpha_bound = 0.0;
  double locking_kappa_bound = 0.0;
  double locking_diameter_bound = 0.0;
};

/// Sufficient conditions for incoherence, death and locking of the
/// integer-exponent model. `alpha` is the box half-width used by the death
/// and locking conditions and `theta_in` the initial phases.
ThresholdReport deterministic_thresholds(int n, std::span<const double> nu, double kappa,
                                         double alpha, std::span<const double> theta_in);

}  // namespace winfree
