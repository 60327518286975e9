#include <algorithm>
#include <cmath>
#include <string>

#include "winfree/error.hpp"
#include "winfree/kernels.hpp"
#include "winfree/particle.hpp"

namespace winfree {

// ---------------------------------------------------------------------------
// ParticleConfig

double ParticleConfig::v_inf() const noexcept { return max_abs(nu); }

std::vector<double> ParticleConfig::initial(double z) const {
  std::vector<double> out(size());
  if (initial_rule) {
    for (std::size_t i = 0; i < size(); ++i) out[i] = initial_rule(i, z);
  } else {
    std::copy(initial_phases.begin(), initial_phases.end(), out.begin());
  }
  return out;
}

std::vector<double> ParticleConfig::initial_dz(double z) const {
  std::vector<double> out(size(), 0.0);
  if (initial_rule && initial_rule_dz) {
    for (std::size_t i = 0; i < size(); ++i) out[i] = initial_rule_dz(i, z);
  }
  return out;
}

void ParticleConfig::validate(bool check_trap, std::span<const double> z_nodes) const {
  if (nu.empty()) throw PreconditionError("particle config: N must be >= 1");
  if (!(kappa >= 0.0)) throw PreconditionError("particle config: kappa must be >= 0");
  if (!initial_rule && initial_phases.size() != nu.size())
    throw PreconditionError("particle config: initial phases and frequencies differ in length");
  if (coupling_sign != 1.0 && coupling_sign != -1.0)
    throw PreconditionError("particle config: coupling sign must be +1 or -1");
  if (!check_trap) return;
  if (!initial_bound) throw PreconditionError("particle config: initial bound c is required");
  const double c = *initial_bound;
  if (!(c > 0.0 && c < 3.14159265358979323846))
    throw PreconditionError("particle config: c must lie in (0, pi)");
  auto check = [&](double z) {
    for (double th : initial(z))
      if (!(std::abs(th) < c))
        throw PreconditionError("particle config: initial phase outside B_c(0) at z = " +
                                std::to_string(z));
  };
  if (z_nodes.empty()) {
    check(1.0);
  } else {
    for (double z : z_nodes) check(z);
  }
}

void Trajectory::push(double t, std::span<const double> row) {
  times.push_back(t);
  data.insert(data.end(), row.begin(), row.end());
}

// ---------------------------------------------------------------------------
// Fixed-z drift and RK4

namespace {

inline double coupling_factor(const ParticleConfig& cfg, double a_z) {
  return -cfg.coupling_sign * a_z * cfg.kappa / static_cast<double>(cfg.size());
}

struct StepPlan {
  std::size_t steps = 0;
  double dt = 0.0;
};

StepPlan plan_steps(const IntegrationOptions& opt) {
  if (!(opt.dt > 0.0)) throw PreconditionError("integrate: dt must be > 0");
  if (!(opt.t_end >= 0.0)) throw PreconditionError("integrate: t_end must be >= 0");
  if (opt.stride == 0) throw PreconditionError("integrate: stride must be >= 1");
  if (opt.t_end == 0.0) return {0, opt.dt};
  const auto steps = static_cast<std::size_t>(std::max(1.0, std::ceil(opt.t_end / opt.dt - 1e-9)));
  return {steps, opt.t_end / static_cast<double>(steps)};
}

bool all_finite(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

// Classical RK4 on a flat vector. `rhs(y, dy)` writes the derivative.
template <class Rhs, class Sample>
void rk4_run(std::vector<double> y, const IntegrationOptions& opt, Rhs&& rhs, Sample&& sample) {
  const StepPlan plan = plan_steps(opt);
  const std::size_t n = y.size();
  std::vector<double> k1(n), k2(n), k3(n), k4(n), tmp(n);
  sample(0.0, y);
  for (std::size_t s = 1; s <= plan.steps; ++s) {
    const double h = plan.dt;
    rhs(y, k1);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + 0.5 * h * k1[i];
    rhs(tmp, k2);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + 0.5 * h * k2[i];
    rhs(tmp, k3);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + h * k3[i];
    rhs(tmp, k4);
    for (std::size_t i = 0; i < n; ++i)
      y[i] += (h / 6.0) * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    const double t = static_cast<double>(s) * h;
    if (!all_finite(y)) throw IntegrationDiverged(t, "integration diverged at t = " + std::to_string(t));
    if (s % opt.stride == 0 || s == plan.steps) sample(t, y);
  }
}

}  // namespace

void drift_into(std::span<const double> theta, const ParticleConfig& cfg, double z, double a_z,
                std::span<double> out, std::span<double> scratch) {
  const double sum = kernels::influence_sum(theta, z, scratch);
  const double f = coupling_factor(cfg, a_z) * sum;
  for (std::size_t i = 0; i < theta.size(); ++i) out[i] = cfg.nu[i] + f * scratch[i];
}

std::vector<double> drift(const PhaseState& state, const ParticleConfig& cfg, double z) {
  std::vector<double> out(state.phases.size()), scratch(state.phases.size());
  drift_into(state.phases, cfg, z, normalizer_a(z), out, scratch);
  return out;
}

Trajectory integrate_from(const ParticleConfig& cfg, std::span<const double> theta0, double z,
                          const IntegrationOptions& opt) {
  const double a_z = normalizer_a(z);
  Trajectory traj;
  traj.n = theta0.size();
  std::vector<double> scratch(traj.n);
  rk4_run(
      std::vector<double>(theta0.begin(), theta0.end()), opt,
      [&](std::span<const double> y, std::span<double> dy) { drift_into(y, cfg, z, a_z, dy, scratch); },
      [&](double t, std::span<const double> y) { traj.push(t, y); });
  return traj;
}

Trajectory integrate(const ParticleConfig& cfg, double z, const IntegrationOptions& opt) {
  cfg.validate();
  const auto theta0 = cfg.initial(z);
  return integrate_from(cfg, theta0, z, opt);
}

// ---------------------------------------------------------------------------
// Stochastic Galerkin

SgSystem::SgSystem(RandomParameter rp, int degree, int quad_order)
    : rp_(rp),
      basis_(rp.chaos_family(), degree),
      quad_(make_quadrature(rp, quad_order > 0 ? quad_order : default_quadrature_order(degree))) {
  if (quad_.order() < degree + 1)
    throw PreconditionError("sG system: quadrature order must be >= degree + 1");
  phi_.resize(quad_.size() * modes());
  for (std::size_t q = 0; q < quad_.size(); ++q)
    basis_.eval(quad_.nodes[q], std::span<double>(phi_.data() + q * modes(), modes()));
  a_nodes_.resize(quad_.size());
  for (std::size_t q = 0; q < quad_.size(); ++q) a_nodes_[q] = normalizer_a(quad_.z_nodes[q]);
}

SgPhaseState SgSystem::project_initial(const ParticleConfig& cfg) const {
  SgPhaseState s;
  s.n = cfg.size();
  s.modes = modes();
  s.coeffs.assign(s.n * s.modes, 0.0);
  for (std::size_t q = 0; q < quad_.size(); ++q) {
    const auto th = cfg.initial(quad_.z_nodes[q]);
    for (std::size_t i = 0; i < s.n; ++i)
      for (std::size_t k = 0; k < s.modes; ++k) s.at(i, k) += quad_.weights[q] * th[i] * phi(q, k);
  }
  return s;
}

void SgSystem::reconstruct_node(const SgPhaseState& s, std::size_t q, std::span<double> out) const {
  for (std::size_t i = 0; i < s.n; ++i) {
    double v = 0.0;
    for (std::size_t k = 0; k < s.modes; ++k) v += s.at(i, k) * phi(q, k);
    out[i] = v;
  }
}

std::vector<double> SgSystem::reconstruct_at(const SgPhaseState& s, double h) const {
  const auto p = basis_.eval(h);
  std::vector<double> out(s.n);
  for (std::size_t i = 0; i < s.n; ++i) {
    double v = 0.0;
    for (std::size_t k = 0; k < s.modes; ++k) v += s.at(i, k) * p[k];
    out[i] = v;
  }
  return out;
}

void SgSystem::drift_into(const SgPhaseState& s, const ParticleConfig& cfg,
                          std::span<double> out) const {
  const std::size_t n = s.n, m = s.modes;
  std::fill(out.begin(), out.end(), 0.0);
  for (std::size_t i = 0; i < n; ++i) out[i * m] = cfg.nu[i];
  std::vector<double> th(n), sn(n);
  for (std::size_t q = 0; q < quad_.size(); ++q) {
    reconstruct_node(s, q, th);
    const double sum = kernels::influence_sum(th, quad_.z_nodes[q], sn);
    const double f = coupling_factor(cfg, a_nodes_[q]) * sum;
    for (std::size_t i = 0; i < n; ++i) {
      const double wv = quad_.weights[q] * (f * sn[i]);
      for (std::size_t k = 0; k < m; ++k) out[i * m + k] += wv * phi(q, k);
    }
  }
}

std::vector<double> sg_drift(const SgPhaseState& state, const ParticleConfig& cfg,
                             const SgSystem& sys) {
  std::vector<double> out(state.coeffs.size());
  sys.drift_into(state, cfg, out);
  return out;
}

SgTrajectory sg_integrate(const ParticleConfig& cfg, const SgSystem& sys,
                          const IntegrationOptions& opt) {
  cfg.validate();
  SgPhaseState s0 = sys.project_initial(cfg);
  SgTrajectory out;
  SgPhaseState work = s0;
  rk4_run(
      s0.coeffs, opt,
      [&](std::span<const double> y, std::span<double> dy) {
        std::copy(y.begin(), y.end(), work.coeffs.begin());
        sys.drift_into(work, cfg, dy);
      },
      [&](double t, std::span<const double> y) {
        SgPhaseState snap = s0;
        snap.coeffs.assign(y.begin(), y.end());
        snap.time = t;
        out.times.push_back(t);
        out.states.push_back(std::move(snap));
      });
  return out;
}

// ---------------------------------------------------------------------------
// Variational system

namespace {

struct SensitivityWork {
  std::vector<double> sn, cs, pw, lb;
  explicit SensitivityWork(std::size_t n) : sn(n), cs(n), pw(n), lb(n) {}
};

void joint_rhs(std::span<const double> theta, std::span<const double> d, const ParticleConfig& cfg,
               double z, double a_z, double a_prime, double log_floor, SensitivityWork& w,
               std::span<double> d_theta, std::span<double> d_sens) {
  const std::size_t n = theta.size();
  kernels::trig_power(theta, z, {w.sn, w.cs, w.pw, w.lb});
  double s0 = 0.0, sl = 0.0, sd = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    const double base = 1.0 + w.cs[j];
    if (base <= log_floor)
      throw SensitivitySingular("sensitivity: 1 + cos(theta_j) vanishes for j = " +
                                std::to_string(j));
    s0 += w.pw[j];
    sl += w.pw[j] * w.lb[j];
    sd += w.sn[j] * d[j] * (w.pw[j] / base);
  }
  sd *= z;
  const double g = -cfg.coupling_sign * cfg.kappa / static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!d_theta.empty()) d_theta[i] = cfg.nu[i] + g * a_z * w.sn[i] * s0;
    d_sens[i] = g * ((a_prime * w.sn[i] + a_z * w.cs[i] * d[i]) * s0 + a_z * w.sn[i] * sl -
                     a_z * w.sn[i] * sd);
  }
}

}  // namespace

std::vector<double> sensitivity_drift(const PhaseState& phase, const SensitivityState& sens,
                                      const ParticleConfig& cfg, double z) {
  const std::size_t n = phase.phases.size();
  if (sens.d_phases.size() != n) throw PreconditionError("sensitivity_drift: size mismatch");
  SensitivityWork w(n);
  std::vector<double> out(n);
  joint_rhs(phase.phases, sens.d_phases, cfg, z, normalizer_a(z), normalizer_a_prime(z),
            kSensitivityLogFloor, w, {}, out);
  return out;
}

SensitivityRun integrate_with_sensitivity(const ParticleConfig& cfg, double z,
                                          const IntegrationOptions& opt, double log_floor) {
  cfg.validate();
  const std::size_t n = cfg.size();
  const double a_z = normalizer_a(z);
  const double a_p = normalizer_a_prime(z);
  std::vector<double> y(2 * n);
  const auto th0 = cfg.initial(z);
  const auto d0 = cfg.initial_dz(z);
  std::copy(th0.begin(), th0.end(), y.begin());
  std::copy(d0.begin(), d0.end(), y.begin() + static_cast<std::ptrdiff_t>(n));
  SensitivityWork w(n);
  SensitivityRun run;
  run.phases.n = n;
  run.sensitivities.n = n;
  rk4_run(
      std::move(y), opt,
      [&](std::span<const double> s, std::span<double> ds) {
        joint_rhs(s.first(n), s.subspan(n), cfg, z, a_z, a_p, log_floor, w, ds.first(n),
                  ds.subspan(n));
      },
      [&](double t, std::span<const double> s) {
        run.phases.push(t, s.first(n));
        run.sensitivities.push(t, s.subspan(n));
      });
  return run;
}

}  // namespace winfree
