#pragma once

#include <vector>

#include "winfree/uncertainty.hpp"

namespace winfree {

/// y (1 + sqrt(1 - y^2))^z on [0, 1].
double h_func(double y, double z);

/// sqrt(2z+1)/(z+1), the maximizer of h_func.
double h_peak_location(double z);

double y_star(double z);
double gamma_star(double z);

/// F(x, gamma, z) = a(z)/(2 gamma x) * int_{1-gamma}^{1+gamma} (1 + sqrt(1 - nu^2/x^2))^z dnu.
double f_func(double x, double gamma, double z);

/// Maximizer of F(., gamma, z) on (1+gamma, inf); requires gamma < gamma_star(z).
double x_star(double gamma, double z);

double kappa_threshold_uniform(double gamma, double z);
double kappa_threshold_dirac(double nu0, double z);

struct DeathStateReport {
  enum class Regime { uniform, dirac };
  Regime regime = Regime::uniform;
  double param = 0.0;  // gamma or nu0
  double z = 1.0;
  double kappa = 0.0;
  bool exists = false;
  double kappa_threshold = 0.0;
  std::vector<double> sigma_roots;  // ascending
  double canonical_sigma = 0.0;     // largest root, 0 when none
  bool bracket_capped = false;
};

DeathStateReport solve_sigma_uniform(double kappa, double gamma, double z);
DeathStateReport solve_sigma_dirac(double kappa, double nu0, double z);

/// arcsin(nu / sigma); requires |nu| <= sigma.
double death_profile(double sigma, double nu, double z);

/// Right-hand side of the stationary equation for sigma:
/// kappa a(z) E_g[(1 + sqrt(1 - nu^2/sigma^2))^z].
double sigma_equation_rhs_uniform(double sigma, double kappa, double gamma, double z);
double sigma_equation_rhs_dirac(double sigma, double kappa, double nu0, double z);

/// Largest per-node threshold over the quadrature nodes of the law of z.
double kappa_threshold_uniform_random(double gamma, const QuadratureRule& quad);
double kappa_threshold_dirac_random(double nu0, const QuadratureRule& quad);

}  // namespace winfree
