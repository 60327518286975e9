#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "winfree/error.hpp"
#include "winfree/kernels.hpp"
#include "winfree/kinetic.hpp"

namespace winfree {

using std::numbers::pi;

ThetaGrid::ThetaGrid(std::size_t n_theta) : n_(n_theta), d_(2.0 * pi / static_cast<double>(n_theta)) {
  if (n_theta < 8) throw ConfigError("ThetaGrid: at least 8 cells required");
}

std::size_t ThetaGrid::cell_of(double theta) const noexcept {
  double t = std::fmod(theta, 2.0 * pi);
  if (t < 0.0) t += 2.0 * pi;
  auto m = static_cast<std::size_t>(t / d_);
  return std::min(m, n_ - 1);
}

FrequencyModel FrequencyModel::zero() { return FrequencyModel{}; }

FrequencyModel FrequencyModel::dirac(double nu0) {
  FrequencyModel f;
  f.kind = Kind::dirac;
  f.nu0 = nu0;
  f.nodes = {nu0};
  return f;
}

FrequencyModel FrequencyModel::uniform(double gamma, int nodes) {
  if (!(gamma > 0.0 && gamma < 1.0)) throw DomainError("FrequencyModel: gamma must lie in (0, 1)");
  if (nodes < 1) throw ConfigError("FrequencyModel: need at least one node");
  FrequencyModel f;
  f.kind = Kind::uniform;
  f.gamma = gamma;
  const auto r = gauss_rule(ChaosFamily::legendre, nodes);
  f.nodes.resize(r.size());
  f.weights = r.weights;
  for (std::size_t i = 0; i < r.size(); ++i) f.nodes[i] = 1.0 + gamma * r.nodes[i];
  return f;
}

FrequencyModel FrequencyModel::samples(std::vector<double> values) {
  if (values.empty()) throw ConfigError("FrequencyModel: empty sample set");
  FrequencyModel f;
  f.kind = Kind::samples;
  f.weights.assign(values.size(), 1.0 / static_cast<double>(values.size()));
  f.nodes = std::move(values);
  return f;
}

KineticModel::KineticModel(RandomParameter rp, int degree, ThetaGrid grid, FrequencyModel freq,
                           double kappa, int quad_order, FluxScheme scheme)
    : rp_(rp),
      basis_(rp.chaos_family(), degree),
      quad_(make_quadrature(rp, quad_order > 0 ? quad_order : degree + 1)),
      grid_(grid),
      freq_(std::move(freq)),
      kappa_(kappa),
      scheme_(scheme) {
  if (quad_.order() < degree + 1)
    throw PreconditionError("KineticModel: quadrature order must be >= degree + 1");
  const std::size_t nq = quad_.size(), nk = modes(), n = grid_.size();
  phi_.resize(nq * nk);
  for (std::size_t q = 0; q < nq; ++q)
    basis_.eval(quad_.nodes[q], std::span<double>(phi_).subspan(q * nk, nk));
  a_nodes_.resize(nq);
  for (std::size_t q = 0; q < nq; ++q) a_nodes_[q] = normalizer_a(quad_.z_nodes[q]);
  std::vector<double> centers(n);
  for (std::size_t m = 0; m < n; ++m) centers[m] = grid_.center(m);
  log_base_.resize(n);
  kernels::TrigPowerOut tp;
  tp.log_base = log_base_;
  kernels::trig_power(centers, 1.0, tp);
  sin_faces_.resize(n);
  for (std::size_t m = 0; m < n; ++m) sin_faces_[m] = std::sin(grid_.face(m));
}

FluxScheme parse_flux_scheme(std::string_view s) {
  if (s == "upwind") return FluxScheme::upwind;
  if (s == "muscl") return FluxScheme::muscl;
  throw ConfigError("flux scheme must be 'upwind' or 'muscl'");
}

std::string_view flux_scheme_name(FluxScheme s) noexcept {
  return s == FluxScheme::upwind ? "upwind" : "muscl";
}

double KineticModel::cfl_limit() const noexcept {
  return scheme_ == FluxScheme::upwind ? kKineticCfl : kMusclCfl;
}

void KineticField::nodal(std::size_t q, std::size_t v, std::span<double> out) const {
  const std::size_t n = model->grid().size();
  std::fill(out.begin(), out.end(), 0.0);
  for (std::size_t k = 0; k < model->modes(); ++k) {
    const double p = model->phi(q, k);
    const double* row = &fhat[index(v, k, 0)];
    for (std::size_t m = 0; m < n; ++m) out[m] += p * row[m];
  }
}

void KineticField::reconstruct_at(double h, std::size_t v, std::span<double> out) const {
  const std::size_t n = model->grid().size();
  const auto phi = model->basis().eval(h);
  std::fill(out.begin(), out.end(), 0.0);
  for (std::size_t k = 0; k < model->modes(); ++k) {
    const double* row = &fhat[index(v, k, 0)];
    for (std::size_t m = 0; m < n; ++m) out[m] += phi[k] * row[m];
  }
}

std::vector<double> KineticField::marginal_nodal(std::size_t q) const {
  const std::size_t n = model->grid().size();
  std::vector<double> acc(n, 0.0), tmp(n);
  const auto& fr = model->frequencies();
  for (std::size_t v = 0; v < fr.size(); ++v) {
    nodal(q, v, tmp);
    for (std::size_t m = 0; m < n; ++m) acc[m] += fr.weights[v] * tmp[m];
  }
  return acc;
}

KineticField make_field(std::shared_ptr<const KineticModel> model) {
  KineticField f;
  const std::size_t sz = model->frequencies().size() * model->modes() * model->grid().size();
  f.model = std::move(model);
  f.fhat.assign(sz, 0.0);
  return f;
}

namespace {

// Nodal values (q, v, m) -> modal coefficients, per (v, m).
void project_nodal(KineticField& f, const std::vector<double>& nodal) {
  const auto& md = *f.model;
  const std::size_t nq = md.quadrature().size(), nv = md.frequencies().size(),
                    n = md.grid().size();
  std::fill(f.fhat.begin(), f.fhat.end(), 0.0);
  for (std::size_t q = 0; q < nq; ++q) {
    const double w = md.quadrature().weights[q];
    for (std::size_t v = 0; v < nv; ++v) {
      const double* src = &nodal[(q * nv + v) * n];
      for (std::size_t k = 0; k < md.modes(); ++k) {
        const double c = w * md.phi(q, k);
        double* dst = &f.fhat[f.index(v, k, 0)];
        for (std::size_t m = 0; m < n; ++m) dst[m] += c * src[m];
      }
    }
  }
}

std::vector<double> all_nodal(const KineticField& f) {
  const auto& md = *f.model;
  const std::size_t nq = md.quadrature().size(), nv = md.frequencies().size(),
                    n = md.grid().size();
  std::vector<double> out(nq * nv * n);
  for (std::size_t q = 0; q < nq; ++q)
    for (std::size_t v = 0; v < nv; ++v)
      f.nodal(q, v, std::span<double>(out).subspan((q * nv + v) * n, n));
  return out;
}

double minmod(double a, double b) {
  if (a * b <= 0.0) return 0.0;
  return std::abs(a) < std::abs(b) ? a : b;
}

// Conservative update with minmod-limited linear reconstruction on a periodic row.
void muscl_update(std::span<const double> f, std::span<const double> vel, double ratio,
                  std::span<double> out, std::vector<double>& slope, std::vector<double>& flux) {
  const std::size_t n = f.size();
  slope.resize(n);
  flux.resize(n);
  for (std::size_t m = 0; m < n; ++m) {
    const double fl = f[(m + n - 1) % n], fr = f[(m + 1) % n];
    slope[m] = minmod(f[m] - fl, fr - f[m]);
  }
  for (std::size_t m = 0; m < n; ++m) {
    const std::size_t r = (m + 1) % n;
    const double u = vel[m];
    // face value carried half a step forward in time
    flux[m] = u >= 0.0 ? u * (f[m] + 0.5 * (1.0 - u * ratio) * slope[m])
                       : u * (f[r] - 0.5 * (1.0 + u * ratio) * slope[r]);
  }
  for (std::size_t m = 0; m < n; ++m) out[m] = f[m] - ratio * (flux[m] - flux[(m + n - 1) % n]);
}

double sigma_from_nodal(const KineticModel& md, const double* nodal_q, double z, double a_z) {
  const std::size_t nv = md.frequencies().size(), n = md.grid().size();
  std::vector<double> w(n, 0.0);
  for (std::size_t v = 0; v < nv; ++v) {
    const double wv = md.frequencies().weights[v] * md.grid().d_theta();
    for (std::size_t m = 0; m < n; ++m) w[m] += wv * nodal_q[v * n + m];
  }
  return md.kappa() * a_z * kernels::weighted_power_sum(md.log_base(), w, z);
}

}  // namespace

KineticField init_from(std::shared_ptr<const KineticModel> model,
                       const std::function<double(double, double, double)>& f0) {
  KineticField f = make_field(model);
  const auto& md = *model;
  const std::size_t nq = md.quadrature().size(), nv = md.frequencies().size(),
                    n = md.grid().size();
  std::vector<double> nodal(nq * nv * n);
  for (std::size_t q = 0; q < nq; ++q)
    for (std::size_t v = 0; v < nv; ++v) {
      double* row = &nodal[(q * nv + v) * n];
      double mass = 0.0;
      for (std::size_t m = 0; m < n; ++m) {
        row[m] = f0(md.grid().center(m), md.frequencies().nodes[v], md.quadrature().z_nodes[q]);
        if (row[m] < 0.0) throw DomainError("init_from: negative initial density");
        mass += row[m] * md.grid().d_theta();
      }
      if (!(mass > 0.0)) throw DomainError("init_from: initial density has zero mass");
      for (std::size_t m = 0; m < n; ++m) row[m] /= mass;
    }
  project_nodal(f, nodal);
  return f;
}

KineticField init_bimodal(std::shared_ptr<const KineticModel> model, double theta_bar_1,
                          double theta_bar_2, double sigma0_sq) {
  if (!(sigma0_sq > 0.0)) throw DomainError("init_bimodal: variance must be positive");
  auto g = [=](double th, double, double) {
    double s = 0.0;
    for (int k = -2; k <= 2; ++k) {
      const double t = th + 2.0 * pi * k;
      s += std::exp(-(t - theta_bar_1) * (t - theta_bar_1) / (2.0 * sigma0_sq)) +
           std::exp(-(t - theta_bar_2) * (t - theta_bar_2) / (2.0 * sigma0_sq));
    }
    return s;
  };
  return init_from(std::move(model), g);
}

std::vector<double> sigma_nodes(const KineticField& field) {
  const auto& md = *field.model;
  const std::size_t nq = md.quadrature().size(), nv = md.frequencies().size(),
                    n = md.grid().size();
  std::vector<double> nodal(nv * n), out(nq);
  for (std::size_t q = 0; q < nq; ++q) {
    for (std::size_t v = 0; v < nv; ++v)
      field.nodal(q, v, std::span<double>(nodal).subspan(v * n, n));
    out[q] = sigma_from_nodal(md, nodal.data(), md.quadrature().z_nodes[q], md.a_node(q));
  }
  return out;
}

double sigma_at_h(const KineticField& field, double h) {
  const auto& md = *field.model;
  const std::size_t nv = md.frequencies().size(), n = md.grid().size();
  std::vector<double> nodal(nv * n);
  for (std::size_t v = 0; v < nv; ++v)
    field.reconstruct_at(h, v, std::span<double>(nodal).subspan(v * n, n));
  const double z = md.parameter().z_of_h(h);
  return sigma_from_nodal(md, nodal.data(), z, normalizer_a(z));
}

double sigma_of_z(const KineticField& field, double z) {
  const auto& rp = field.model->parameter();
  if (!(z >= rp.support_lo() && z <= rp.support_hi()))
    throw DomainError("sigma_of_z: z outside the support of its law");
  double h;
  if (rp.family() == RandomParameter::Family::uniform_affine)
    h = (2.0 * z - rp.lo() - rp.hi()) / (rp.hi() - rp.lo());
  else
    h = std::sqrt(z - rp.shift());
  return sigma_at_h(field, h);
}

std::vector<double> l_matrix(const KineticField& field, double nu, double theta) {
  const auto& md = *field.model;
  const auto sig = sigma_nodes(field);
  const std::size_t nk = md.modes();
  std::vector<double> L(nk * nk, 0.0);
  const double s = std::sin(theta);
  for (std::size_t q = 0; q < md.quadrature().size(); ++q) {
    const double u = md.quadrature().weights[q] * (nu - sig[q] * s);
    for (std::size_t h = 0; h < nk; ++h)
      for (std::size_t k = 0; k < nk; ++k) L[h * nk + k] += u * md.phi(q, h) * md.phi(q, k);
  }
  return L;
}

double max_speed(const KineticField& field) {
  const auto& fr = field.model->frequencies();
  double vmax = 0.0;
  for (double nu : fr.nodes) vmax = std::max(vmax, std::abs(nu));
  double smax = 0.0;
  for (double s : sigma_nodes(field)) smax = std::max(smax, std::abs(s));
  return vmax + smax;
}

double default_kinetic_dt(const KineticField& field) {
  const double d = field.model->grid().d_theta();
  const double v = max_speed(field);
  double dt = d * d;
  if (v > 0.0) dt = std::min(dt, field.model->cfl_limit() * d / v);
  return dt;
}

void step_in_place(KineticField& field, double dt) {
  if (!(dt > 0.0)) throw PreconditionError("step: dt must be positive");
  const auto& md = *field.model;
  const std::size_t nq = md.quadrature().size(), nv = md.frequencies().size(),
                    n = md.grid().size();
  const double d = md.grid().d_theta();
  std::vector<double> nodal = all_nodal(field);
  std::vector<double> next(nodal.size());
  std::vector<double> vel(n), slope, flux;
  const auto sf = md.sin_faces();
  const double cfl = md.cfl_limit();
  for (std::size_t q = 0; q < nq; ++q) {
    const double sig =
        sigma_from_nodal(md, &nodal[q * nv * n], md.quadrature().z_nodes[q], md.a_node(q));
    for (std::size_t v = 0; v < nv; ++v) {
      const double nu = md.frequencies().nodes[v];
      double umax = 0.0;
      for (std::size_t m = 0; m < n; ++m) {
        vel[m] = nu - sig * sf[m];
        umax = std::max(umax, std::abs(vel[m]));
      }
      if (umax * dt / d > cfl + 1e-12) throw PreconditionError("step: CFL condition violated");
      const std::size_t off = (q * nv + v) * n;
      const auto src = std::span<const double>(nodal).subspan(off, n);
      const auto dst = std::span<double>(next).subspan(off, n);
      if (md.scheme() == FluxScheme::upwind)
        kernels::upwind_update(src, vel, dt / d, dst);
      else
        muscl_update(src, vel, dt / d, dst, slope, flux);
    }
  }
  project_nodal(field, next);
  field.time += dt;
}

KineticField step(const KineticField& field, double dt) {
  KineticField out = field;
  step_in_place(out, dt);
  return out;
}

std::vector<double> node_masses(const KineticField& field) {
  const auto& md = *field.model;
  std::vector<double> out(md.quadrature().size());
  for (std::size_t q = 0; q < out.size(); ++q) {
    double s = 0.0;
    for (double x : field.marginal_nodal(q)) s += x;
    out[q] = s * md.grid().d_theta();
  }
  return out;
}

double min_nodal_value(const KineticField& field) {
  const auto nodal = all_nodal(field);
  return *std::min_element(nodal.begin(), nodal.end());
}

double temperature(const ThetaGrid& grid, std::span<const double> density) {
  double mass = 0.0, first = 0.0;
  for (std::size_t m = 0; m < grid.size(); ++m) {
    mass += density[m];
    first += grid.center(m) * density[m];
  }
  if (mass == 0.0) throw NumericError("temperature: zero mass");
  const double u = first / mass;
  double t = 0.0;
  for (std::size_t m = 0; m < grid.size(); ++m) {
    const double e = grid.center(m) - u;
    t += e * e * density[m];
  }
  return t * grid.d_theta();
}

double temperature(std::span<const double> phases) {
  if (phases.empty()) throw PreconditionError("temperature: no phases");
  std::vector<double> w(phases.size());
  double u = 0.0;
  for (std::size_t i = 0; i < phases.size(); ++i) {
    double t = std::fmod(phases[i], 2.0 * pi);
    if (t < 0.0) t += 2.0 * pi;
    w[i] = t;
    u += t;
  }
  u /= static_cast<double>(w.size());
  double s = 0.0;
  for (double t : w) s += (t - u) * (t - u);
  return s / static_cast<double>(w.size());
}

double mean_phase(const ThetaGrid& grid, std::span<const double> density) {
  double mass = 0.0, first = 0.0;
  for (std::size_t m = 0; m < grid.size(); ++m) {
    const double c = wrap_pi(grid.center(m));
    mass += density[m];
    first += c * density[m];
  }
  if (mass == 0.0) throw NumericError("mean_phase: zero mass");
  return first / mass;
}

MomentReport moments(const KineticField& field) {
  const auto& md = *field.model;
  const std::size_t nq = md.quadrature().size(), nv = md.frequencies().size(),
                    n = md.grid().size();
  MomentReport r;
  r.mean_density.assign(n, 0.0);
  r.variance_density.assign(n, 0.0);
  for (std::size_t k = 0; k < md.modes(); ++k) {
    for (std::size_t m = 0; m < n; ++m) {
      double s = 0.0;
      for (std::size_t v = 0; v < nv; ++v) s += md.frequencies().weights[v] * field.at(v, k, m);
      if (k == 0)
        r.mean_density[m] = s;
      else
        r.variance_density[m] += s * s;
    }
  }
  r.temperature.resize(nq);
  r.mass.resize(nq);
  for (std::size_t q = 0; q < nq; ++q) {
    const auto d = field.marginal_nodal(q);
    double s = 0.0;
    for (double x : d) s += x;
    r.mass[q] = s * md.grid().d_theta();
    r.temperature[q] = temperature(md.grid(), d);
  }
  return r;
}

DensityReconstruction reconstruct_particle_density(
    const std::vector<std::span<const double>>& phases_per_node, std::span<const double> weights,
    const ThetaGrid& grid) {
  if (phases_per_node.size() != weights.size())
    throw PreconditionError("reconstruct_particle_density: node count mismatch");
  const std::size_t n = grid.size();
  DensityReconstruction r;
  r.mean.assign(n, 0.0);
  r.variance.assign(n, 0.0);
  std::vector<std::vector<double>> hist(weights.size(), std::vector<double>(n, 0.0));
  for (std::size_t q = 0; q < weights.size(); ++q) {
    const auto& ph = phases_per_node[q];
    if (ph.empty()) throw PreconditionError("reconstruct_particle_density: empty node");
    const double inc = 1.0 / (static_cast<double>(ph.size()) * grid.d_theta());
    for (double t : ph) hist[q][grid.cell_of(t)] += inc;
    for (std::size_t m = 0; m < n; ++m) r.mean[m] += weights[q] * hist[q][m];
  }
  for (std::size_t q = 0; q < weights.size(); ++q)
    for (std::size_t m = 0; m < n; ++m) {
      const double e = hist[q][m] - r.mean[m];
      r.variance[m] += weights[q] * e * e;
    }
  return r;
}

double l1_distance(const ThetaGrid& grid, std::span<const double> a, std::span<const double> b) {
  if (a.size() != grid.size() || b.size() != grid.size())
    throw PreconditionError("l1_distance: size mismatch");
  double s = 0.0;
  for (std::size_t m = 0; m < grid.size(); ++m) s += std::abs(a[m] - b[m]);
  return s * grid.d_theta();
}

double l2z_error(std::span<const double> ref_nodes, const GpcCoefficients& sg,
                 const ChaosBasis& basis, const QuadratureRule& quad) {
  if (ref_nodes.size() != quad.size()) throw PreconditionError("l2z_error: size mismatch");
  double s = 0.0;
  for (std::size_t q = 0; q < quad.size(); ++q) {
    const double e = ref_nodes[q] - reconstruct(sg, basis, quad.nodes[q]);
    s += quad.weights[q] * e * e;
  }
  return std::sqrt(s);
}

double wkp_norm(const KineticField& field, int k, double p) {
  const auto& md = *field.model;
  if (k < 0) throw PreconditionError("wkp_norm: k must be >= 0");
  if (k > md.basis().degree())
    throw PreconditionError("wkp_norm: derivative order exceeds the expansion degree");
  if (!(p >= 1.0)) throw PreconditionError("wkp_norm: p must be >= 1");
  const std::size_t nq = md.quadrature().size(), nv = md.frequencies().size(),
                    n = md.grid().size(), nk = md.modes();
  const bool inf = std::isinf(p);
  double acc = 0.0;
  std::vector<double> w(static_cast<std::size_t>(k) + 1), dphi(nk), coef(nk), row(n);
  for (int l = 0; l <= k; ++l) {
    for (std::size_t q = 0; q < nq; ++q) {
      const double h = md.quadrature().nodes[q];
      std::fill(coef.begin(), coef.end(), 0.0);
      if (l == 0) {
        for (std::size_t j = 0; j < nk; ++j) coef[j] = md.phi(q, j);
      } else {
        std::span<double> ws(w.data(), static_cast<std::size_t>(l) + 1);
        if (!z_derivative_weights(md.parameter(), h, l, ws))
          throw NumericError("wkp_norm: z-derivative singular at a quadrature node");
        for (int r = 0; r <= l; ++r) {
          if (ws[r] == 0.0) continue;
          md.basis().eval_derivative(h, r, dphi);
          for (std::size_t j = 0; j < nk; ++j) coef[j] += ws[r] * dphi[j];
        }
      }
      for (std::size_t v = 0; v < nv; ++v) {
        std::fill(row.begin(), row.end(), 0.0);
        for (std::size_t j = 0; j < nk; ++j) {
          const double* src = &field.fhat[field.index(v, j, 0)];
          for (std::size_t m = 0; m < n; ++m) row[m] += coef[j] * src[m];
        }
        const double wt = md.quadrature().weights[q] * md.frequencies().weights[v] *
                          md.grid().d_theta();
        for (double x : row) {
          if (inf)
            acc = std::max(acc, std::abs(x));
          else
            acc += wt * std::pow(std::abs(x), p);
        }
      }
    }
  }
  return inf ? acc : std::pow(acc, 1.0 / p);
}

}  // namespace winfree
