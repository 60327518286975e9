#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "winfree/error.hpp"
#include "winfree/uncertainty.hpp"

namespace winfree {

// ---------------------------------------------------------------------------
// RandomParameter

RandomParameter RandomParameter::uniform(double lo, double hi) {
  if (!(lo < hi)) throw ConfigError("uniform law: lo must be < hi");
  if (!(lo >= 1.0)) throw DomainError("uniform law: support must lie in [1, inf)");
  if (!std::isfinite(hi)) throw ConfigError("uniform law: hi must be finite");
  return RandomParameter(Family::uniform_affine, lo, hi, 0.0);
}

RandomParameter RandomParameter::gaussian_square(double shift) {
  if (!(shift >= 1.0)) throw DomainError("gaussian-square law: shift must be >= 1");
  return RandomParameter(Family::gaussian_square, shift, std::numeric_limits<double>::infinity(),
                         shift);
}

ChaosFamily RandomParameter::chaos_family() const noexcept {
  return family_ == Family::uniform_affine ? ChaosFamily::legendre : ChaosFamily::hermite;
}

double RandomParameter::support_lo() const noexcept { return lo_; }
double RandomParameter::support_hi() const noexcept { return hi_; }

double RandomParameter::z_of_h(double h) const noexcept {
  if (family_ == Family::uniform_affine) return 0.5 * (lo_ + hi_) + 0.5 * (hi_ - lo_) * h;
  return h * h + shift_;
}

double RandomParameter::dz_dh(double h) const noexcept {
  if (family_ == Family::uniform_affine) return 0.5 * (hi_ - lo_);
  return 2.0 * h;
}

double RandomParameter::density(double z) const noexcept {
  if (family_ == Family::uniform_affine) return (z >= lo_ && z <= hi_) ? 1.0 / (hi_ - lo_) : 0.0;
  const double u = z - shift_;
  if (u <= 0.0) return 0.0;
  return std::exp(-0.5 * u) / std::sqrt(2.0 * std::numbers::pi * u);
}

double RandomParameter::mean() const noexcept {
  if (family_ == Family::uniform_affine) return 0.5 * (lo_ + hi_);
  return shift_ + 1.0;
}

// ---------------------------------------------------------------------------
// ChaosBasis

ChaosBasis::ChaosBasis(ChaosFamily family, int degree) : family_(family), degree_(degree) {
  if (degree < 0) throw PreconditionError("chaos basis: degree must be >= 0");
}

double ChaosBasis::recurrence_b(ChaosFamily family, int k) noexcept {
  if (k <= 0) return 0.0;
  const double kk = k;
  if (family == ChaosFamily::legendre) return kk * kk / (4.0 * kk * kk - 1.0);
  return kk;
}

void ChaosBasis::eval(double h, std::span<double> out) const {
  out[0] = 1.0;
  if (degree_ == 0) return;
  out[1] = h / std::sqrt(recurrence_b(family_, 1));
  for (int k = 1; k < degree_; ++k) {
    out[k + 1] = (h * out[k] - std::sqrt(recurrence_b(family_, k)) * out[k - 1]) /
                 std::sqrt(recurrence_b(family_, k + 1));
  }
}

std::vector<double> ChaosBasis::eval(double h) const {
  std::vector<double> v(size());
  eval(h, v);
  return v;
}

void ChaosBasis::eval_derivative(double h, int order, std::span<double> out) const {
  const std::size_t n = size();
  std::vector<double> prev(n);
  eval(h, prev);
  if (order == 0) {
    std::copy(prev.begin(), prev.end(), out.begin());
    return;
  }
  std::vector<double> cur(n);
  for (int l = 1; l <= order; ++l) {
    cur[0] = 0.0;
    if (degree_ >= 1) cur[1] = (l == 1 ? 1.0 : 0.0) / std::sqrt(recurrence_b(family_, 1));
    for (int k = 1; k < degree_; ++k) {
      cur[k + 1] = (h * cur[k] + l * prev[k] - std::sqrt(recurrence_b(family_, k)) * cur[k - 1]) /
                   std::sqrt(recurrence_b(family_, k + 1));
    }
    std::swap(prev, cur);
  }
  std::copy(prev.begin(), prev.end(), out.begin());
}

// ---------------------------------------------------------------------------
// Quadrature

namespace {

// Orthonormal Phi_n and its derivative at x.
std::pair<double, double> top_poly(ChaosFamily family, int n, double x) {
  double p_prev = 0.0, p = 1.0, d_prev = 0.0, d = 0.0;
  for (int k = 0; k < n; ++k) {
    const double sb = std::sqrt(ChaosBasis::recurrence_b(family, k));
    const double sb1 = std::sqrt(ChaosBasis::recurrence_b(family, k + 1));
    const double p_next = (x * p - sb * p_prev) / sb1;
    const double d_next = (x * d + p - sb * d_prev) / sb1;
    p_prev = p;
    p = p_next;
    d_prev = d;
    d = d_next;
  }
  return {p, d};
}

}  // namespace

QuadratureRule gauss_rule(ChaosFamily family, int order) {
  if (order < 1) throw PreconditionError("quadrature: order must be >= 1");
  const int n = order;
  Eigen::VectorXd diag = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd sub(std::max(n - 1, 0));
  for (int k = 1; k < n; ++k) sub[k - 1] = std::sqrt(ChaosBasis::recurrence_b(family, k));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
  solver.computeFromTridiagonal(diag, sub, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw NumericError("quadrature: eigensolver failed");

  std::vector<double> x(solver.eigenvalues().data(), solver.eigenvalues().data() + n);
  std::sort(x.begin(), x.end());
  for (double& xi : x) {
    for (int it = 0; it < 3; ++it) {
      const auto [p, dp] = top_poly(family, n, xi);
      if (dp == 0.0) break;
      xi -= p / dp;
    }
  }
  // Both reference measures are symmetric.
  for (int i = 0; i < n / 2; ++i) {
    const double m = 0.5 * (x[n - 1 - i] - x[i]);
    x[i] = -m;
    x[n - 1 - i] = m;
  }
  if (n % 2 == 1) x[n / 2] = 0.0;

  QuadratureRule rule;
  rule.family = family;
  rule.nodes = x;
  rule.weights.resize(n);
  ChaosBasis basis(family, n - 1);
  std::vector<double> phi(n);
  double total = 0.0;
  for (int i = 0; i < n; ++i) {
    basis.eval(x[i], phi);
    double s = 0.0;
    for (double v : phi) s += v * v;
    rule.weights[i] = 1.0 / s;
    total += rule.weights[i];
  }
  for (double& w : rule.weights) w /= total;
  rule.z_nodes = rule.nodes;
  return rule;
}

QuadratureRule make_quadrature(const RandomParameter& rp, int order) {
  QuadratureRule rule = gauss_rule(rp.chaos_family(), order);
  for (std::size_t q = 0; q < rule.size(); ++q) rule.z_nodes[q] = rp.z_of_h(rule.nodes[q]);
  return rule;
}

// ---------------------------------------------------------------------------
// Projection and reconstruction

namespace {

void check_compatible(const ChaosBasis& basis, const QuadratureRule& quad) {
  if (basis.family() != quad.family)
    throw ConfigError("projection: basis and quadrature families differ");
  if (quad.order() < basis.degree() + 1)
    throw PreconditionError("projection: quadrature order must be >= degree + 1");
}

}  // namespace

GpcCoefficients project_values(std::span<const double> node_values, const ChaosBasis& basis,
                               const QuadratureRule& quad) {
  check_compatible(basis, quad);
  GpcCoefficients out{std::vector<double>(basis.size(), 0.0)};
  std::vector<double> phi(basis.size());
  for (std::size_t q = 0; q < quad.size(); ++q) {
    basis.eval(quad.nodes[q], phi);
    const double wv = quad.weights[q] * node_values[q];
    for (std::size_t k = 0; k < phi.size(); ++k) out.coeffs[k] += wv * phi[k];
  }
  return out;
}

GpcCoefficients project(const std::function<double(double)>& sampler, const ChaosBasis& basis,
                        const QuadratureRule& quad) {
  check_compatible(basis, quad);
  std::vector<double> values(quad.size());
  for (std::size_t q = 0; q < quad.size(); ++q) values[q] = sampler(quad.z_nodes[q]);
  return project_values(values, basis, quad);
}

double reconstruct(const GpcCoefficients& c, const ChaosBasis& basis, double h) {
  std::vector<double> phi(basis.size());
  basis.eval(h, phi);
  double s = 0.0;
  const std::size_t n = std::min(phi.size(), c.coeffs.size());
  for (std::size_t k = 0; k < n; ++k) s += c.coeffs[k] * phi[k];
  return s;
}

bool z_derivative_weights(const RandomParameter& rp, double h, int order,
                          std::span<double> weights) {
  std::fill(weights.begin(), weights.end(), 0.0);
  if (rp.family() == RandomParameter::Family::uniform_affine) {
    weights[order] = std::pow(1.0 / rp.dz_dh(h), order);
    return true;
  }
  if (order == 0) {
    weights[0] = 1.0;
    return true;
  }
  if (h == 0.0) return false;
  // d/dz = (1/(2h)) d/dh; c[l][r] multiplies h^(r-2l) g^(r).
  std::vector<double> c(order + 1, 0.0), next(order + 1, 0.0);
  c[0] = 1.0;
  for (int l = 0; l < order; ++l) {
    std::fill(next.begin(), next.end(), 0.0);
    for (int r = 0; r <= l + 1; ++r) {
      double v = 0.0;
      if (r <= l) v += c[r] * (r - 2.0 * l) / 2.0;
      if (r >= 1) v += c[r - 1] / 2.0;
      next[r] = v;
    }
    std::swap(c, next);
  }
  for (int r = 0; r <= order; ++r) weights[r] = c[r] * std::pow(h, r - 2 * order);
  return true;
}

DerivativeValue reconstruct_derivative(const GpcCoefficients& c, const ChaosBasis& basis,
                                       const RandomParameter& rp, double h, int order) {
  if (order < 0) throw PreconditionError("reconstruct_derivative: order must be >= 0");
  std::vector<double> w(order + 1);
  if (!z_derivative_weights(rp, h, order, w))
    return {std::numeric_limits<double>::quiet_NaN(), true};
  std::vector<double> phi(basis.size());
  double total = 0.0;
  for (int r = 0; r <= order; ++r) {
    if (w[r] == 0.0) continue;
    basis.eval_derivative(h, r, phi);
    double s = 0.0;
    const std::size_t n = std::min(phi.size(), c.coeffs.size());
    for (std::size_t k = 0; k < n; ++k) s += c.coeffs[k] * phi[k];
    total += w[r] * s;
  }
  return {total, false};
}

}  // namespace winfree
