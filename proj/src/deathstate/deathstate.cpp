#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#include "winfree/analysis.hpp"
#include "winfree/deathstate.hpp"
#include "winfree/error.hpp"

namespace winfree {

namespace {

constexpr double kTangencyTol = 1e-12;
constexpr double kBracketCap = 1e8;

const QuadratureRule& gl_rule(int n) {
  static const QuadratureRule r64 = gauss_rule(ChaosFamily::legendre, 64);
  static const QuadratureRule r128 = gauss_rule(ChaosFamily::legendre, 128);
  return n == 64 ? r64 : r128;
}

double gl_integrate(const std::function<double(double)>& f, double a, double b, int n) {
  const auto& r = gl_rule(n);
  const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
  double s = 0.0;
  for (std::size_t i = 0; i < r.size(); ++i) s += r.weights[i] * f(mid + half * r.nodes[i]);
  return (b - a) * s;
}

double composite_integrate(const std::function<double(double)>& f, double a, double b,
                           int panels) {
  double s = 0.0;
  const double w = (b - a) / panels;
  for (int p = 0; p < panels; ++p) s += gl_integrate(f, a + p * w, a + (p + 1) * w, 64);
  return s;
}

// int_a^b f with GL-64, checked against GL-128 and refined by panels if needed.
double robust_integrate(const std::function<double(double)>& f, double a, double b) {
  if (b <= a) return 0.0;
  const double i64 = gl_integrate(f, a, b, 64);
  const double i128 = gl_integrate(f, a, b, 128);
  if (std::abs(i64 - i128) <= 1e-9 * std::abs(i128)) return i128;
  double prev = i128;
  for (int panels = 2; panels <= 1024; panels *= 2) {
    const double cur = composite_integrate(f, a, b, panels);
    if (std::abs(cur - prev) <= 1e-12 * std::abs(cur)) return cur;
    prev = cur;
  }
  return prev;
}

double asin_clamped(double x) { return std::asin(std::clamp(x, -1.0, 1.0)); }

void require_gamma(double gamma) {
  if (!(gamma > 0.0 && gamma < 1.0)) throw DomainError("gamma must lie in (0, 1)");
}

}  // namespace

double h_func(double y, double z) {
  if (!(y >= 0.0 && y <= 1.0)) throw DomainError("h_func: y must lie in [0, 1]");
  return y * std::pow(1.0 + std::sqrt(1.0 - y * y), z);
}

double h_peak_location(double z) { return std::sqrt(2.0 * z + 1.0) / (z + 1.0); }

double y_star(double z) {
  if (!(z >= 1.0)) throw DomainError("y_star: z must be >= 1");
  return bisect([z](double y) { return h_func(y, z) - 1.0; }, 0.0, h_peak_location(z), 1e-15);
}

double gamma_star(double z) {
  const double y = y_star(z);
  return (1.0 - y) / (1.0 + y);
}

double f_func(double x, double gamma, double z) {
  require_gamma(gamma);
  if (!(x >= 1.0 + gamma)) throw DomainError("f_func: x must be >= 1 + gamma");
  // nu = x sin(phi) turns the integrand into a smooth one.
  const double p1 = asin_clamped((1.0 - gamma) / x);
  const double p2 = asin_clamped((1.0 + gamma) / x);
  auto g = [z](double phi) {
    const double c = std::cos(phi);
    return std::pow(1.0 + c, z) * c;
  };
  return normalizer_a(z) / (2.0 * gamma) * robust_integrate(g, p1, p2);
}

namespace {

double slope_sign_fn(double x, double gamma, double z) {
  return h_func(std::min(1.0, (1.0 + gamma) / x), z) - h_func((1.0 - gamma) / x, z);
}

}  // namespace

double x_star(double gamma, double z) {
  require_gamma(gamma);
  if (!(gamma < gamma_star(z)))
    throw PreconditionError("x_star: gamma must be below gamma_star(z)");
  const double lo = 1.0 + gamma;
  double hi = 2.0 * lo;
  while (slope_sign_fn(hi, gamma, z) <= 0.0) {
    hi *= 2.0;
    if (hi > kBracketCap) throw NumericError("x_star: bracket expansion failed");
  }
  return bisect([&](double x) { return slope_sign_fn(x, gamma, z); }, lo, hi, 1e-14);
}

double kappa_threshold_uniform(double gamma, double z) {
  require_gamma(gamma);
  if (gamma < gamma_star(z)) return 1.0 / f_func(x_star(gamma, z), gamma, z);
  return 1.0 / f_func(1.0 + gamma, gamma, z);
}

double kappa_threshold_dirac(double nu0, double z) {
  if (!(z >= 1.0)) throw DomainError("kappa_threshold_dirac: z must be >= 1");
  if (nu0 == 0.0) return 0.0;
  const double lg = std::log(std::abs(nu0)) - log_normalizer_a(z) + std::log(z + 1.0) -
                    0.5 * std::log(2.0 * z + 1.0) + z * std::log((z + 1.0) / (2.0 * z + 1.0));
  return std::exp(lg);
}

double sigma_equation_rhs_uniform(double sigma, double kappa, double gamma, double z) {
  return kappa * sigma * f_func(sigma, gamma, z);
}

double sigma_equation_rhs_dirac(double sigma, double kappa, double nu0, double z) {
  const double u = std::min(1.0, std::abs(nu0) / sigma);
  return kappa * normalizer_a(z) * std::pow(1.0 + std::sqrt(1.0 - u * u), z);
}

DeathStateReport solve_sigma_uniform(double kappa, double gamma, double z) {
  require_gamma(gamma);
  DeathStateReport r;
  r.regime = DeathStateReport::Regime::uniform;
  r.param = gamma;
  r.z = z;
  r.kappa = kappa;
  r.kappa_threshold = kappa_threshold_uniform(gamma, z);
  const double rel = (kappa - r.kappa_threshold) / r.kappa_threshold;
  if (rel < -kTangencyTol) return r;
  r.exists = true;
  const double target = 1.0 / kappa;
  auto F = [&](double x) { return f_func(x, gamma, z) - target; };
  const double lo = 1.0 + gamma;
  const bool interior = gamma < gamma_star(z);
  const double peak = interior ? x_star(gamma, z) : lo;

  if (std::abs(rel) <= kTangencyTol) {
    r.sigma_roots.push_back(peak);
  } else {
    if (interior && F(lo) <= 0.0) r.sigma_roots.push_back(bisect(F, lo, peak));
    double hi = std::max(2.0 * peak, 2.0);
    while (F(hi) > 0.0) {
      hi *= 2.0;
      if (hi > kBracketCap) {
        r.bracket_capped = true;
        break;
      }
    }
    if (!r.bracket_capped) r.sigma_roots.push_back(bisect(F, peak, hi));
  }
  std::sort(r.sigma_roots.begin(), r.sigma_roots.end());
  if (!r.sigma_roots.empty()) r.canonical_sigma = r.sigma_roots.back();
  return r;
}

DeathStateReport solve_sigma_dirac(double kappa, double nu0, double z) {
  DeathStateReport r;
  r.regime = DeathStateReport::Regime::dirac;
  r.param = nu0;
  r.z = z;
  r.kappa = kappa;
  r.kappa_threshold = kappa_threshold_dirac(nu0, z);
  const double a_z = normalizer_a(z);
  if (nu0 == 0.0) {
    if (kappa < 0.0) return r;
    r.exists = true;
    r.sigma_roots.push_back(kappa * a_z * std::pow(2.0, z));
    r.canonical_sigma = r.sigma_roots.back();
    return r;
  }
  const double rel = (kappa - r.kappa_threshold) / r.kappa_threshold;
  if (rel < -kTangencyTol) return r;
  r.exists = true;
  const double v = std::abs(nu0);
  const double up = h_peak_location(z);
  if (std::abs(rel) <= kTangencyTol) {
    r.sigma_roots.push_back(v * (z + 1.0) / std::sqrt(2.0 * z + 1.0));
  } else {
    const double target = v / (kappa * a_z);
    auto G = [&](double u) { return h_func(u, z) - target; };
    r.sigma_roots.push_back(v / bisect(G, 0.0, up, 1e-16));
    if (target >= 1.0) r.sigma_roots.push_back(v / bisect(G, up, 1.0, 1e-16));
  }
  std::sort(r.sigma_roots.begin(), r.sigma_roots.end());
  r.canonical_sigma = r.sigma_roots.back();
  return r;
}

double death_profile(double sigma, double nu, double /*z*/) {
  if (!(std::abs(nu) <= sigma))
    throw DomainError("death_profile: |nu| exceeds sigma, no stationary death profile");
  return std::asin(nu / sigma);
}

double kappa_threshold_uniform_random(double gamma, const QuadratureRule& quad) {
  double m = 0.0;
  for (double z : quad.z_nodes) m = std::max(m, kappa_threshold_uniform(gamma, z));
  return m;
}

double kappa_threshold_dirac_random(double nu0, const QuadratureRule& quad) {
  double m = 0.0;
  for (double z : quad.z_nodes) m = std::max(m, kappa_threshold_dirac(nu0, z));
  return m;
}

}  // namespace winfree
