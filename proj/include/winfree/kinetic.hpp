#pragma once

#include <functional>
#include <memory>
#include <span>
#include <string_view>
#include <vector>

#include "winfree/uncertainty.hpp"

namespace winfree {

class ThetaGrid {
 public:
  explicit ThetaGrid(std::size_t n_theta);

  std::size_t size() const noexcept { return n_; }
  double d_theta() const noexcept { return d_; }
  /// Cell center (m + 1/2) d_theta.
  double center(std::size_t m) const noexcept { return (static_cast<double>(m) + 0.5) * d_; }
  /// Right face (m + 1) d_theta.
  double face(std::size_t m) const noexcept { return static_cast<double>(m + 1) * d_; }
  /// Cell index of an angle after wrapping into [0, 2 pi).
  std::size_t cell_of(double theta) const noexcept;

 private:
  std::size_t n_;
  double d_;
};

/// Law g of the natural frequencies, discretized as weighted nodes.
struct FrequencyModel {
  enum class Kind { zero, dirac, uniform, samples };
  Kind kind = Kind::zero;
  double nu0 = 0.0;
  double gamma = 0.0;
  std::vector<double> nodes{0.0};
  std::vector<double> weights{1.0};

  static FrequencyModel zero();
  static FrequencyModel dirac(double nu0);
  /// Uniform on [1 - gamma, 1 + gamma] with a Gauss-Legendre rule in nu.
  static FrequencyModel uniform(double gamma, int nodes = 16);
  static FrequencyModel samples(std::vector<double> values);

  std::size_t size() const noexcept { return nodes.size(); }
};

/// Numerical flux of the nodewise transport step. `upwind` is first order;
/// `muscl` is the second-order minmod-limited reconstruction.
enum class FluxScheme { upwind, muscl };

FluxScheme parse_flux_scheme(std::string_view s);
std::string_view flux_scheme_name(FluxScheme s) noexcept;

class KineticModel {
 public:
  /// quad_order <= 0 selects degree + 1 nodes.
  KineticModel(RandomParameter rp, int degree, ThetaGrid grid, FrequencyModel freq, double kappa,
               int quad_order = -1, FluxScheme scheme = FluxScheme::upwind);

  const RandomParameter& parameter() const noexcept { return rp_; }
  const ChaosBasis& basis() const noexcept { return basis_; }
  const QuadratureRule& quadrature() const noexcept { return quad_; }
  const ThetaGrid& grid() const noexcept { return grid_; }
  const FrequencyModel& frequencies() const noexcept { return freq_; }
  double kappa() const noexcept { return kappa_; }
  FluxScheme scheme() const noexcept { return scheme_; }
  /// Largest admissible CFL number of the scheme.
  double cfl_limit() const noexcept;
  std::size_t modes() const noexcept { return basis_.size(); }
  double phi(std::size_t q, std::size_t k) const { return phi_[q * modes() + k]; }
  double a_node(std::size_t q) const { return a_nodes_[q]; }
  /// ln(1 + cos theta_m) on the cell centers.
  std::span<const double> log_base() const noexcept { return log_base_; }
  std::span<const double> sin_faces() const noexcept { return sin_faces_; }

 private:
  RandomParameter rp_;
  ChaosBasis basis_;
  QuadratureRule quad_;
  ThetaGrid grid_;
  FrequencyModel freq_;
  double kappa_;
  FluxScheme scheme_;
  std::vector<double> phi_;
  std::vector<double> a_nodes_;
  std::vector<double> log_base_;
  std::vector<double> sin_faces_;
};

/// Projected densities fhat(v, k, m) for nu-node v, mode k and cell m.
struct KineticField {
  std::shared_ptr<const KineticModel> model;
  std::vector<double> fhat;
  double time = 0.0;

  std::size_t index(std::size_t v, std::size_t k, std::size_t m) const {
    return (v * model->modes() + k) * model->grid().size() + m;
  }
  double& at(std::size_t v, std::size_t k, std::size_t m) { return fhat[index(v, k, m)]; }
  double at(std::size_t v, std::size_t k, std::size_t m) const { return fhat[index(v, k, m)]; }

  /// f^M(theta_m, nu_v, z_q) for all m.
  void nodal(std::size_t q, std::size_t v, std::span<double> out) const;
  /// f^M(theta_m, nu_v, z(h)) for all m.
  void reconstruct_at(double h, std::size_t v, std::span<double> out) const;
  /// nu-marginal density at quadrature node q.
  std::vector<double> marginal_nodal(std::size_t q) const;
};

KineticField make_field(std::shared_ptr<const KineticModel> model);

/// Two-Gaussian mixture, periodized and normalized to unit mass, z-independent.
KineticField init_bimodal(std::shared_ptr<const KineticModel> model, double theta_bar_1,
                          double theta_bar_2, double sigma0_sq);

/// Samples f0(theta, nu, z) at every (cell, nu node, z node), normalizes each
/// to unit mass, and projects.
KineticField init_from(std::shared_ptr<const KineticModel> model,
                       const std::function<double(double theta, double nu, double z)>& f0);

/// sigma at every z node: kappa a(z_q) sum_v w_v sum_m (1 + cos theta_m)^z_q f Delta theta.
std::vector<double> sigma_nodes(const KineticField& field);
double sigma_at_h(const KineticField& field, double h);
/// For the gaussian-square law the branch h >= 0 is used.
double sigma_of_z(const KineticField& field, double z);

/// L_hk = sum_q w_q (nu - sigma_q sin theta) Phi_h Phi_k, row-major (M+1)^2.
std::vector<double> l_matrix(const KineticField& field, double nu, double theta);

inline constexpr double kKineticCfl = 0.9;
inline constexpr double kMusclCfl = 0.5;

double max_speed(const KineticField& field);
/// Largest stable step: min(d_theta^2, cfl_limit d_theta / max speed).
double default_kinetic_dt(const KineticField& field);

/// One forward-Euler upwind step. Throws PreconditionError on CFL violation.
KineticField step(const KineticField& field, double dt);
void step_in_place(KineticField& field, double dt);

struct MomentReport {
  std::vector<double> mean_density;
  std::vector<double> variance_density;
  std::vector<double> temperature;  // per z node
  std::vector<double> mass;         // per z node
};

MomentReport moments(const KineticField& field);

/// Mass of the nu-marginal density at every z node.
std::vector<double> node_masses(const KineticField& field);
double min_nodal_value(const KineticField& field);

/// Temperature int (theta - u)^2 f dtheta with theta in [0, 2 pi).
double temperature(const ThetaGrid& grid, std::span<const double> density);
/// Empirical second central moment of phases wrapped into [0, 2 pi).
double temperature(std::span<const double> phases);

/// Mean phase int theta f dtheta / mass with theta in (-pi, pi].
double mean_phase(const ThetaGrid& grid, std::span<const double> density);

struct DensityReconstruction {
  std::vector<double> mean;
  std::vector<double> variance;
};

/// Histogram reconstruction from particle phases at each z node, weighted
/// by the node weights.
DensityReconstruction reconstruct_particle_density(
    const std::vector<std::span<const double>>& phases_per_node,
    std::span<const double> weights, const ThetaGrid& grid);

double l1_distance(const ThetaGrid& grid, std::span<const double> a, std::span<const double> b);

/// sqrt(sum_q w_q (ref_q - sg(h_q))^2).
double l2z_error(std::span<const double> ref_nodes, const GpcCoefficients& sg,
                 const ChaosBasis& basis, const QuadratureRule& quad);

/// Discrete weighted W^{k,p} norm over (theta grid, nu nodes, z nodes).
/// p = infinity gives the max norm.
double wkp_norm(const KineticField& field, int k, double p);

}  // namespace winfree
