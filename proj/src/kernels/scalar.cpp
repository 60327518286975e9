#include <cmath>
#include <limits>

#include "winfree/kernels.hpp"

namespace winfree::kernels::scalar {

namespace {

inline double log_base_of(double cos_theta) {
  const double base = 1.0 + cos_theta;
  return base < kPowerFloor ? -std::numeric_limits<double>::infinity() : std::log(base);
}

inline double power_of(double log_base, double z) {
  return std::isinf(log_base) ? 0.0 : std::exp(z * log_base);
}

}  // namespace

void trig_power(std::span<const double> theta, double z, const TrigPowerOut& out) {
  const std::size_t n = theta.size();
  for (std::size_t i = 0; i < n; ++i) {
    const double s = std::sin(theta[i]);
    const double c = std::cos(theta[i]);
    const double lb = log_base_of(c);
    if (!out.sin.empty()) out.sin[i] = s;
    if (!out.cos.empty()) out.cos[i] = c;
    if (!out.log_base.empty()) out.log_base[i] = lb;
    if (!out.power.empty()) out.power[i] = power_of(lb, z);
  }
}

double influence_sum(std::span<const double> theta, double z, std::span<double> sin_out) {
  double sum = 0.0;
  for (std::size_t i = 0; i < theta.size(); ++i) {
    sin_out[i] = std::sin(theta[i]);
    sum += power_of(log_base_of(std::cos(theta[i])), z);
  }
  return sum;
}

double weighted_power_sum(std::span<const double> log_base, std::span<const double> weights,
                          double z) {
  double sum = 0.0;
  for (std::size_t m = 0; m < log_base.size(); ++m) {
    sum += weights[m] * power_of(log_base[m], z);
  }
  return sum;
}

void upwind_update(std::span<const double> f, std::span<const double> face_velocity,
                   double ratio, std::span<double> out) {
  const std::size_t n = f.size();
  auto flux = [&](std::size_t m) {
    const double v = face_velocity[m];
    const double right = f[m + 1 == n ? 0 : m + 1];
    return (v > 0.0 ? v : 0.0) * f[m] + (v < 0.0 ? v : 0.0) * right;
  };
  double left_flux = flux(n - 1);
  for (std::size_t m = 0; m < n; ++m) {
    const double right_flux = flux(m);
    out[m] = f[m] - ratio * (right_flux - left_flux);
    left_flux = right_flux;
  }
}

}  // namespace winfree::kernels::scalar
