#include <cmath>
#include <numbers>

#include "winfree/error.hpp"
#include "winfree/uncertainty.hpp"

namespace winfree {

namespace {

double lgamma_pos(double x) {
  int sign = 0;
  return ::lgamma_r(x, &sign);
}

void require_z(double z, const char* who) {
  if (!(z >= 1.0)) throw DomainError(std::string(who) + ": z must be >= 1");
}

}  // namespace

double log_normalizer_a(double z) {
  require_z(z, "normalizer_a");
  return z * std::numbers::ln2 + 2.0 * lgamma_pos(z + 1.0) - lgamma_pos(2.0 * z + 1.0);
}

double normalizer_a(double z) { return std::exp(log_normalizer_a(z)); }

double digamma(double x) {
  if (!(x > 0.0)) throw DomainError("digamma: argument must be positive");
  double acc = 0.0;
  while (x < 8.0) {
    acc -= 1.0 / x;
    x += 1.0;
  }
  // Asymptotic series with Bernoulli numbers B_2 .. B_14.
  const double inv = 1.0 / x;
  const double inv2 = inv * inv;
  const double series =
      inv2 * (1.0 / 12 -
              inv2 * (1.0 / 120 -
                      inv2 * (1.0 / 252 -
                              inv2 * (1.0 / 240 -
                                      inv2 * (1.0 / 132 -
                                              inv2 * (691.0 / 32760 - inv2 * (1.0 / 12)))))));
  return acc + std::log(x) - 0.5 * inv - series;
}

double normalizer_a_prime(double z, DigammaMethod method) {
  require_z(z, "normalizer_a_prime");
  auto psi = [method](double x) {
    if (method == DigammaMethod::series) return digamma(x);
    constexpr double d = 1e-6;
    return (lgamma_pos(x + d) - lgamma_pos(x - d)) / (2.0 * d);
  };
  return normalizer_a(z) * (std::numbers::ln2 + 2.0 * psi(z + 1.0) - 2.0 * psi(2.0 * z + 1.0));
}

double wrap_pi(double theta) {
  if (theta >= -std::numbers::pi && theta <= std::numbers::pi) return theta;
  return std::remainder(theta, 2.0 * std::numbers::pi);
}

double influence(double theta, double z) {
  const double w = wrap_pi(theta);
  const double base = 1.0 + std::cos(w);
  if (std::abs(w) == std::numbers::pi || base < 1e-300) return 0.0;
  return std::exp(log_normalizer_a(z) + z * std::log(base));
}

}  // namespace winfree
