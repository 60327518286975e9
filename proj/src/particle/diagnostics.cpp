#include <algorithm>
#include <cmath>

#include "winfree/error.hpp"
#include "winfree/particle.hpp"

namespace winfree {

double max_abs(std::span<const double> v) noexcept {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

RotationNumbers rotation_numbers(const Trajectory& traj, double burn_in) {
  RotationNumbers r;
  if (traj.samples() < 2) {
    r.rho.assign(traj.n, 0.0);
    r.short_window = true;
    return r;
  }
  const double t_last = traj.times.back();
  std::size_t k0 = 0;
  while (k0 + 1 < traj.samples() && traj.times[k0] < burn_in) ++k0;
  if (k0 + 1 >= traj.samples()) k0 = traj.samples() - 2;
  const double t0 = traj.times[k0];
  r.window = t_last - t0;
  r.short_window = t_last < 2.0 * burn_in || r.window <= 0.0;
  const auto a = traj.at(k0);
  const auto b = traj.at(traj.samples() - 1);
  r.rho.resize(traj.n);
  for (std::size_t i = 0; i < traj.n; ++i) r.rho[i] = (b[i] - a[i]) / r.window;
  return r;
}

const char* pattern_name(Pattern p) noexcept {
  switch (p) {
    case Pattern::death: return "death";
    case Pattern::locking: return "locking";
    case Pattern::incoherence: return "incoherence";
    case Pattern::mixed: return "mixed";
  }
  return "mixed";
}

Pattern classify_pattern(std::span<const double> rho, double tol) {
  if (!(tol > 0.0)) throw PreconditionError("classify_pattern: tol must be > 0");
  if (max_abs(rho) < tol) return Pattern::death;
  bool all_close = true, all_apart = true;
  double mean = 0.0;
  for (std::size_t i = 0; i < rho.size(); ++i) {
    mean += rho[i];
    for (std::size_t j = i + 1; j < rho.size(); ++j) {
      const double d = std::abs(rho[i] - rho[j]);
      if (d < tol) all_apart = false;
      else all_close = false;
    }
  }
  mean /= static_cast<double>(rho.size());
  if (all_close && std::abs(mean) >= tol) return Pattern::locking;
  if (all_apart) return Pattern::incoherence;
  return Pattern::mixed;
}

double default_pattern_tol(double window, double v_inf) noexcept {
  return 10.0 / window * std::max(1.0, v_inf);
}

TrapCheck trapping_check(const Trajectory& traj, double c) {
  TrapCheck r;
  for (std::size_t k = 0; k < traj.samples(); ++k) {
    if (max_abs(traj.at(k)) >= c) {
      r.invariant = false;
      r.first_exit = traj.times[k];
      return r;
    }
  }
  return r;
}

std::optional<double> entrance_time(const Trajectory& traj, double c_star) {
  if (traj.samples() == 0) return std::nullopt;
  std::size_t k = traj.samples();
  while (k > 0 && max_abs(traj.at(k - 1)) <= c_star) --k;
  if (k == traj.samples()) return std::nullopt;
  return traj.times[k];
}

H1zNorms h1z_norms(const std::vector<std::span<const double>>& phases,
                   const std::vector<std::span<const double>>& sensitivities,
                   const QuadratureRule& quad) {
  if (phases.size() != quad.size() || sensitivities.size() != quad.size())
    throw PreconditionError("h1z_norms: one state per quadrature node is required");
  double a = 0.0, b = 0.0;
  for (std::size_t q = 0; q < quad.size(); ++q) {
    double sa = 0.0, sb = 0.0;
    for (double x : phases[q]) sa += x * x;
    for (double x : sensitivities[q]) sb += x * x;
    a += quad.weights[q] * sa;
    b += quad.weights[q] * sb;
  }
  return {std::sqrt(a), std::sqrt(b), std::sqrt(a + b)};
}

double deviation_l1(std::span<const double> phases, std::span<const double> equilibrium) {
  if (phases.size() != equilibrium.size())
    throw PreconditionError("deviation_l1: length mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < phases.size(); ++i) s += std::abs(phases[i] - equilibrium[i]);
  return s;
}

}  // namespace winfree
