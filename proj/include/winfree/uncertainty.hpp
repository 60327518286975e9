#pragma once

#include <functional>
#include <limits>
#include <span>
#include <vector>

namespace winfree {

// ---------------------------------------------------------------------------
// Coupling normalizer and influence function

/// a(z) = 2^z Gamma(z+1)^2 / Gamma(2z+1), evaluated in log space.
double normalizer_a(double z);
double log_normalizer_a(double z);

enum class DigammaMethod { series, finite_difference };

double digamma(double x);

/// a'(z) = a(z) (ln 2 + 2 psi(z+1) - 2 psi(2z+1)).
double normalizer_a_prime(double z, DigammaMethod method = DigammaMethod::series);

/// a(z) (1 + cos theta)^z; exactly zero at theta = +-pi.
double influence(double theta, double z);

/// Wraps an angle into [-pi, pi].
double wrap_pi(double theta);

// ---------------------------------------------------------------------------
// Law of z

enum class ChaosFamily { legendre, hermite };

class RandomParameter {
 public:
  enum class Family { uniform_affine, gaussian_square };

  /// z = (lo+hi)/2 + h (hi-lo)/2 with h uniform on [-1, 1].
  static RandomParameter uniform(double lo, double hi);
  /// z = h^2 + shift with h standard normal.
  static RandomParameter gaussian_square(double shift);

  Family family() const noexcept { return family_; }
  ChaosFamily chaos_family() const noexcept;
  double lo() const noexcept { return lo_; }
  double hi() const noexcept { return hi_; }
  double shift() const noexcept { return shift_; }

  double support_lo() const noexcept;
  double support_hi() const noexcept;
  bool bounded() const noexcept { return family_ == Family::uniform_affine; }

  double z_of_h(double h) const noexcept;
  double dz_dh(double h) const noexcept;
  double density(double z) const noexcept;
  double mean() const noexcept;

 private:
  RandomParameter(Family f, double lo, double hi, double shift)
      : family_(f), lo_(lo), hi_(hi), shift_(shift) {}
  Family family_;
  double lo_ = 0.0;
  double hi_ = 0.0;
  double shift_ = 0.0;
};

// ---------------------------------------------------------------------------
// Orthonormal chaos basis

class ChaosBasis {
 public:
  ChaosBasis(ChaosFamily family, int degree);

  ChaosFamily family() const noexcept { return family_; }
  int degree() const noexcept { return degree_; }
  std::size_t size() const noexcept { return static_cast<std::size_t>(degree_) + 1; }

  /// Phi_0(h) .. Phi_M(h) into `out` (size M+1).
  void eval(double h, std::span<double> out) const;
  std::vector<double> eval(double h) const;

  /// d^order/dh^order of Phi_0 .. Phi_M.
  void eval_derivative(double h, int order, std::span<double> out) const;

  /// Three-term recurrence coefficient: h Phi_k = sqrt(b_{k+1}) Phi_{k+1} + sqrt(b_k) Phi_{k-1}.
  static double recurrence_b(ChaosFamily family, int k) noexcept;

 private:
  ChaosFamily family_;
  int degree_;
};

// ---------------------------------------------------------------------------
// Quadrature

struct QuadratureRule {
  ChaosFamily family = ChaosFamily::legendre;
  std::vector<double> nodes;    // in h
  std::vector<double> weights;  // sum to 1
  std::vector<double> z_nodes;

  std::size_t size() const noexcept { return nodes.size(); }
  int order() const noexcept { return static_cast<int>(nodes.size()); }
};

/// Gauss rule in h (Legendre for the uniform law, probabilists' Hermite for
/// the gaussian-square law) with `order` nodes.
QuadratureRule make_quadrature(const RandomParameter& rp, int order);

/// Gauss rule for the family's reference measure only (no z map).
QuadratureRule gauss_rule(ChaosFamily family, int order);

inline int default_quadrature_order(int degree) { return 2 * degree + 2; }

// ---------------------------------------------------------------------------
// Projection and reconstruction

struct GpcCoefficients {
  std::vector<double> coeffs;
  int degree() const noexcept { return static_cast<int>(coeffs.size()) - 1; }
};

GpcCoefficients project(const std::function<double(double)>& sampler, const ChaosBasis& basis,
                        const QuadratureRule& quad);

/// Projection from values already sampled at the rule's z nodes.
GpcCoefficients project_values(std::span<const double> node_values, const ChaosBasis& basis,
                               const QuadratureRule& quad);

double reconstruct(const GpcCoefficients& c, const ChaosBasis& basis, double h);

struct DerivativeValue {
  double value = 0.0;
  bool singular = false;
};

/// d^order/dz^order of the expansion at h. For the gaussian-square law the
/// map has dz/dh = 2h, and h = 0 is reported as singular with value NaN.
DerivativeValue reconstruct_derivative(const GpcCoefficients& c, const ChaosBasis& basis,
                                       const RandomParameter& rp, double h, int order = 1);

/// Weights w_r such that d^order/dz^order g = sum_r w_r d^r g/dh^r at h.
/// Returns false at singular points.
bool z_derivative_weights(const RandomParameter& rp, double h, int order,
                          std::span<double> weights);

}  // namespace winfree
