#include <algorithm>
#include <cmath>
#include <numbers>

#include "winfree/analysis.hpp"
#include "winfree/error.hpp"

namespace winfree {

using std::numbers::pi;

double bisect(const std::function<double(double)>& f, double lo, double hi, double tol,
              int max_iter) {
  double flo = f(lo), fhi = f(hi);
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  if ((flo > 0.0) == (fhi > 0.0)) throw NumericError("bisection: no sign change on bracket");
  for (int it = 0; it < max_iter && hi - lo > tol; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const double fm = f(mid);
    if (fm == 0.0) return mid;
    if ((fm > 0.0) == (flo > 0.0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
      fhi = fm;
    }
  }
  return std::abs(flo) <= std::abs(fhi) ? lo : hi;
}

double beta(double z) {
  if (!(z >= 1.0)) throw DomainError("beta: z must be >= 1");
  return std::acos(z / (z + 1.0));
}

double adjoint_g(double y, double z) {
  const double base = 1.0 + std::cos(y);
  return std::sin(y) * (base > 0.0 ? std::pow(base, z) : 0.0);
}

double c_star(double c, double z) {
  if (!(c > 0.0 && c < pi)) throw DomainError("c_star: c must lie in (0, pi)");
  const double b = beta(z);
  if (c <= b) return c;
  const double target = adjoint_g(c, z);
  // bisect down to adjacent doubles
  return bisect([&](double y) { return adjoint_g(y, z) - target; }, 0.0, b, 0.0, 4000);
}

double kappa_threshold(double c, double z, double v_inf) {
  if (!(c > 0.0 && c < pi)) throw DomainError("kappa_threshold: c must lie in (0, pi)");
  if (v_inf == 0.0) return 0.0;
  return v_inf / (normalizer_a(z) * adjoint_g(c, z));
}

bool kappa_assumption_holds(double kappa, double c, double z, double v_inf) {
  return kappa > kappa_threshold(c, z, v_inf);
}

EntranceBound entrance_time_bound(double c, double z, double kappa, double v_inf) {
  EntranceBound r;
  r.assumption_holds = kappa_assumption_holds(kappa, c, z, v_inf);
  if (!r.assumption_holds) return r;
  const double cs = c_star(c, z);
  if (cs == c) {
    r.value = 0.0;
    return r;
  }
  const double denom = normalizer_a(z) * kappa * adjoint_g(c, z) - v_inf;
  r.value = denom > 0.0 ? (c - cs) / denom : std::numeric_limits<double>::infinity();
  return r;
}

TrappedRegimeReport trapped_regime(double c, double z, double kappa, double v_inf) {
  TrappedRegimeReport r;
  r.c = c;
  r.z = z;
  r.beta = beta(z);
  r.c_star = c_star(c, z);
  r.kappa_threshold = kappa_threshold(c, z, v_inf);
  const auto eb = entrance_time_bound(c, z, kappa, v_inf);
  r.kappa_assumption_holds = eb.assumption_holds;
  r.entrance_time_bound = eb.value;
  return r;
}

namespace {

double clamp_unit(double x) {
  if (x > 1.0 && x < 1.0 + 1e-14) return 1.0;
  if (x < -1.0 && x > -1.0 - 1e-14) return -1.0;
  return x;
}

}  // namespace

std::vector<double> equilibrium(const ParticleConfig& cfg, double z, double c) {
  const std::size_t n = cfg.size();
  const double v = cfg.v_inf();
  if (v == 0.0) return std::vector<double>(n, 0.0);
  if (!kappa_assumption_holds(cfg.kappa, c, z, v))
    throw PreconditionError("equilibrium: kappa-assumption does not hold");
  const double a_z = normalizer_a(z);
  auto F = [&](double s) {
    double sum = 0.0;
    for (double nu : cfg.nu) {
      const double phi = std::asin(clamp_unit(-nu * s));
      sum += a_z * std::pow(1.0 + std::cos(phi), z);
    }
    return 1.0 + cfg.kappa / static_cast<double>(n) * s * sum;
  };
  const double left = -std::sin(c_star(c, z)) / v;
  const double s = bisect(F, left, 0.0, 1e-16);
  std::vector<double> phi(n);
  for (std::size_t j = 0; j < n; ++j) phi[j] = std::asin(clamp_unit(-cfg.nu[j] * s));
  return phi;
}

double equilibrium_residual(const ParticleConfig& cfg, double z, std::span<const double> phi) {
  const double a_z = normalizer_a(z);
  double sum = 0.0;
  for (double p : phi) sum += a_z * std::pow(1.0 + std::cos(p), z);
  double r = 0.0;
  const double f = cfg.kappa / static_cast<double>(phi.size()) * sum;
  for (std::size_t i = 0; i < phi.size(); ++i)
    r = std::max(r, std::abs(cfg.nu[i] - f * std::sin(phi[i])));
  return r;
}

double decay_rate(double c_star, double z, double kappa) {
  const double cc = std::cos(c_star);
  return kappa * z * normalizer_a(z) * std::pow(1.0 + cc, z) * (1.0 - (z + 1.0) / z * cc);
}

SensitivityCoefficients sensitivity_coeffs(double c, double z, double kappa, std::size_t n) {
  if (!(c > 0.0 && c < pi)) throw DomainError("sensitivity_coeffs: c must lie in (0, pi)");
  SensitivityCoefficients k;
  const double a_z = normalizer_a(z);
  const double cc = std::cos(c);
  const double two_z = std::pow(2.0, z);
  k.C_111 = cc < 0.0 ? two_z * cc : cc * std::pow(1.0 + cc, z);
  k.C_11 = kappa * a_z *
           (-k.C_111 + z / std::sqrt(2.0 * z - 1.0) * std::pow((2.0 * z - 1.0) / z, z));
  const double cs = c_star(c, z);
  k.C_12 = decay_rate(cs, z, kappa);
  const double root_n = std::sqrt(static_cast<double>(n));
  k.C_21 = kappa * std::abs(normalizer_a_prime(z)) * two_z * root_n +
           kappa * a_z * two_z * root_n * std::numbers::ln2;
  k.C_22 = k.C_21 * std::sin(cs);
  return k;
}

double sensitivity_envelope(double t, const SensitivityCoefficients& k, double tau_e) {
  if (!(t >= 0.0)) throw PreconditionError("sensitivity_envelope: t must be >= 0");
  auto first = [&](double s) {
    if (k.C_11 == 0.0) return s * k.C_21;
    return k.C_21 / k.C_11 * std::expm1(s * k.C_11);
  };
  if (t < tau_e) return first(t);
  const double ratio = k.C_22 / k.C_12;
  return (first(tau_e) + ratio) * std::exp(k.C_12 * (t - tau_e)) - ratio;
}

ThresholdReport deterministic_thresholds(int n, std::span<const double> nu, double kappa,
                                         double alpha, std::span<const double> theta_in) {
  if (n < 1) throw DomainError("deterministic_thresholds: n must be >= 1");
  ThresholdReport r;
  const double nn = n;
  const double a_n = normalizer_a(nn);
  const double two_n = std::pow(2.0, nn);

  double min_gap = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < nu.size(); ++i)
    for (std::size_t j = i + 1; j < nu.size(); ++j)
      min_gap = std::min(min_gap, std::abs(nu[i] - nu[j]));
  if (nu.size() >= 2) {
    const double bound = min_gap / (2.0 * two_n * a_n);
    r.incoherence_slack = bound - kappa;
    r.incoherence_ok = min_gap > 0.0 && kappa >= 0.0 && kappa < bound;
  }

  const double beta_n = std::acos(nn / (nn + 1.0));
  const double theta_max = max_abs(theta_in);
  double v_inf = max_abs(nu);
  if (alpha > 0.0 && alpha < pi) {
    const double bound = v_inf / (a_n * std::sin(alpha) * std::pow(1.0 + std::cos(alpha), nn));
    r.death_slack = kappa - bound;
    r.death_ok = beta_n < alpha && theta_max < alpha && kappa > bound;
  }

  r.locking_alpha_bound = (pi / (2.0 * two_n * a_n) * nn / (nn + 1.0) - 1.0 / two_n) /
                          std::sqrt(2.0 * nn - 1.0) *
                          std::pow(2.0 * nn / (2.0 * nn - 1.0), nn - 1.0);
  bool equal_nu = !nu.empty();
  for (double x : nu) equal_nu = equal_nu && x == nu[0];
  if (equal_nu) {
    const double v = nu[0];
    r.locking_kappa_bound = v / (2.0 * two_n * a_n);
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (double th : theta_in) {
      lo = std::min(lo, th);
      hi = std::max(hi, th);
    }
    const double diameter = theta_in.empty() ? 0.0 : hi - lo;
    const double denom = v - two_n * a_n * kappa;
    r.locking_diameter_bound =
        denom > 0.0
            ? alpha * std::exp(-(two_n * a_n * kappa) / denom *
                               (alpha * std::sqrt(2.0 * nn - 1.0) *
                                    std::pow((2.0 * nn - 1.0) / (2.0 * nn), nn - 1.0) +
                                2.0 / two_n))
            : 0.0;
    r.locking_ok = alpha > 0.0 && alpha < r.locking_alpha_bound && kappa > 0.0 &&
                   kappa < r.locking_kappa_bound && diameter < r.locking_diameter_bound;
  }
  return r;
}

}  // namespace winfree
