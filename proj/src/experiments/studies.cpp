#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <numbers>
#include <thread>

#include "winfree/deathstate.hpp"
#include "winfree/error.hpp"
#include "winfree/runners.hpp"

namespace winfree {

using std::numbers::pi;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double wrap_two_pi(double t) {
  t = std::fmod(t, 2.0 * pi);
  return t < 0.0 ? t + 2.0 * pi : t;
}

// In-place RK4 on sG coefficients.
class SgStepper {
 public:
  SgStepper(const SgSystem& sys, const ParticleConfig& pc, std::size_t size)
      : sys_(sys), pc_(pc), k1_(size), k2_(size), k3_(size), k4_(size) {}

  void step(SgPhaseState& s, double h) {
    tmp_ = s;
    sys_.drift_into(s, pc_, k1_);
    axpy(s, 0.5 * h, k1_);
    sys_.drift_into(tmp_, pc_, k2_);
    axpy(s, 0.5 * h, k2_);
    sys_.drift_into(tmp_, pc_, k3_);
    axpy(s, h, k3_);
    sys_.drift_into(tmp_, pc_, k4_);
    for (std::size_t i = 0; i < s.coeffs.size(); ++i)
      s.coeffs[i] += (h / 6.0) * (k1_[i] + 2.0 * k2_[i] + 2.0 * k3_[i] + k4_[i]);
    s.time += h;
    for (double x : s.coeffs)
      if (!std::isfinite(x)) throw IntegrationDiverged(s.time, "sG integration diverged");
  }

 private:
  void axpy(const SgPhaseState& s, double a, const std::vector<double>& k) {
    for (std::size_t i = 0; i < s.coeffs.size(); ++i) tmp_.coeffs[i] = s.coeffs[i] + a * k[i];
  }

  const SgSystem& sys_;
  const ParticleConfig& pc_;
  SgPhaseState tmp_;
  std::vector<double> k1_, k2_, k3_, k4_;
};

std::vector<double> sample_frequencies(const FrequencySpec& f, std::size_t n, Philox& rng) {
  std::vector<double> nu(n, 0.0);
  if (f.model == "dirac") std::fill(nu.begin(), nu.end(), f.nu0);
  if (f.model == "uniform")
    for (auto& x : nu) x = 1.0 + f.gamma * (2.0 * rng.uniform() - 1.0);
  return nu;
}

}  // namespace

void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& task) {
  const std::size_t workers = std::min<std::size_t>(std::max(1, threads), count);
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) task(i);
    return;
  }
  std::mutex mu;
  std::size_t next = 0;
  std::exception_ptr err;
  auto body = [&] {
    for (;;) {
      std::size_t i;
      {
        std::lock_guard lock(mu);
        if (next >= count || err) return;
        i = next++;
      }
      try {
        task(i);
      } catch (...) {
        std::lock_guard lock(mu);
        if (!err) err = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(body);
  for (auto& t : pool) t.join();
  if (err) std::rethrow_exception(err);
}

std::vector<double> sample_bimodal(std::size_t n, double theta_bar_1, double theta_bar_2,
                                   double sigma0_sq, Philox& rng) {
  const double s = std::sqrt(sigma0_sq);
  std::vector<double> out(n);
  for (auto& x : out) {
    const double mu = rng.uniform() < 0.5 ? theta_bar_1 : theta_bar_2;
    x = wrap_two_pi(mu + s * rng.normal());
  }
  return out;
}

StepPlan plan_steps(double t_end, double dt) {
  if (!(t_end > 0.0 && dt > 0.0)) throw PreconditionError("plan_steps: t_end and dt must be > 0");
  StepPlan p;
  p.steps = static_cast<std::size_t>(std::ceil(t_end / dt - 1e-9));
  p.steps = std::max<std::size_t>(p.steps, 1);
  p.dt = t_end / static_cast<double>(p.steps);
  return p;
}

// ---------------------------------------------------------------------------

MeanFieldResult mean_field_compare(const ExperimentConfig& cfg, double sigma0_sq, int particles,
                                   std::uint64_t stream) {
  const auto rp = cfg.z.make();
  const ThetaGrid grid(static_cast<std::size_t>(cfg.n_theta));
  auto model = std::make_shared<const KineticModel>(rp, cfg.degree, grid, cfg.frequencies.make(),
                                                    cfg.kappa * cfg.coupling_sign, -1,
                                                    parse_flux_scheme(cfg.scheme));
  KineticField field = init_bimodal(model, cfg.theta_bar_1, cfg.theta_bar_2, sigma0_sq);

  Philox rng(cfg.seed, stream);
  ParticleConfig pc;
  pc.initial_phases = sample_bimodal(static_cast<std::size_t>(particles), cfg.theta_bar_1,
                                     cfg.theta_bar_2, sigma0_sq, rng);
  pc.nu = sample_frequencies(cfg.frequencies, pc.initial_phases.size(), rng);
  pc.kappa = cfg.kappa;
  pc.coupling_sign = cfg.coupling_sign;
  pc.validate();
  const SgSystem sys(rp, cfg.degree);
  SgPhaseState state = sys.project_initial(pc);
  SgStepper stepper(sys, pc, state.coeffs.size());

  const StepPlan plan = plan_steps(cfg.t_end, cfg.time_step());
  std::vector<std::size_t> marks;
  for (double t : cfg.snapshots) marks.push_back(static_cast<std::size_t>(std::llround(t / plan.dt)));

  MeanFieldResult r;
  r.sigma0_sq = sigma0_sq;
  r.particles = particles;
  const auto mass0 = node_masses(field);
  r.max_mass_drift.assign(mass0.size(), 0.0);
  r.min_nodal = min_nodal_value(field);

  std::vector<std::vector<double>> node_phases(model->quadrature().size());
  auto record = [&](double t) {
    DensitySnapshot s;
    s.t = t;
    const auto mom = moments(field);
    s.kinetic_mean = mom.mean_density;
    s.kinetic_variance = mom.variance_density;
    std::vector<std::span<const double>> spans;
    const auto& kq = model->quadrature();
    for (std::size_t q = 0; q < kq.size(); ++q) {
      node_phases[q] = sys.reconstruct_at(state, kq.nodes[q]);
      spans.emplace_back(node_phases[q]);
    }
    const auto rec = reconstruct_particle_density(spans, kq.weights, grid);
    s.particle_mean = rec.mean;
    s.particle_variance = rec.variance;
    s.l1 = l1_distance(grid, s.kinetic_mean, s.particle_mean);
    r.snapshots.push_back(std::move(s));
  };

  for (std::size_t k = 0;; ++k) {
    for (std::size_t m = 0; m < marks.size(); ++m)
      if (marks[m] == k) record(cfg.snapshots[m]);
    if (k == plan.steps) break;
    step_in_place(field, plan.dt);
    stepper.step(state, plan.dt);
    const auto mass = node_masses(field);
    for (std::size_t q = 0; q < mass.size(); ++q)
      r.max_mass_drift[q] = std::max(r.max_mass_drift[q], std::abs(mass[q] - mass0[q]));
    r.min_nodal = std::min(r.min_nodal, min_nodal_value(field));
  }
  return r;
}

// ---------------------------------------------------------------------------

std::vector<double> sg_temperature_at(const SgSystem& sys, const ParticleConfig& pc,
                                      const IntegrationOptions& opt,
                                      const QuadratureRule& eval_rule) {
  SgPhaseState state = sys.project_initial(pc);
  SgStepper stepper(sys, pc, state.coeffs.size());
  const StepPlan plan = plan_steps(opt.t_end, opt.dt);
  for (std::size_t k = 0; k < plan.steps; ++k) stepper.step(state, plan.dt);
  std::vector<double> out(eval_rule.size());
  for (std::size_t q = 0; q < eval_rule.size(); ++q)
    out[q] = temperature(sys.reconstruct_at(state, eval_rule.nodes[q]));
  return out;
}

SpectralErrorResult spectral_error(const ExperimentConfig& cfg, const std::string& law,
                                   double kappa, int threads) {
  ZLawSpec zs = cfg.z;
  zs.law = law;
  const auto rp = zs.make();
  Philox rng(cfg.seed, 0);
  ParticleConfig pc;
  pc.initial_phases = sample_bimodal(static_cast<std::size_t>(cfg.particles.back()),
                                     cfg.theta_bar_1, cfg.theta_bar_2, cfg.sigma0_sq.front(), rng);
  pc.nu = sample_frequencies(cfg.frequencies, pc.initial_phases.size(), rng);
  pc.kappa = kappa;
  pc.coupling_sign = cfg.coupling_sign;
  pc.validate();
  IntegrationOptions opt;
  opt.t_end = cfg.t_end;
  opt.dt = cfg.time_step();

  const SgSystem ref(rp, cfg.reference_degree);
  const auto& rule = ref.quadrature();
  const auto t_ref = sg_temperature_at(ref, pc, opt, rule);

  auto l2 = [&](const std::vector<double>& t) {
    double s = 0.0;
    for (std::size_t q = 0; q < rule.size(); ++q) s += rule.weights[q] * (t_ref[q] - t[q]) * (t_ref[q] - t[q]);
    return std::sqrt(s);
  };

  SpectralErrorResult r;
  r.law = law;
  r.kappa = kappa;
  for (int m = 0; m <= cfg.max_degree; ++m) r.degrees.push_back(m);
  r.errors.assign(r.degrees.size(), 0.0);
  parallel_for(r.degrees.size(), threads, [&](std::size_t i) {
    const SgSystem sys(rp, r.degrees[i]);
    r.errors[i] = l2(sg_temperature_at(sys, pc, opt, rule));
  });
  r.self_error = l2(t_ref);
  return r;
}

// ---------------------------------------------------------------------------

ParticleConfig random_trapped_config(const ExperimentConfig& cfg, std::size_t index,
                                     const QuadratureRule& quad, double& c_out) {
  Philox rng(cfg.seed, 1000 + index);
  ParticleConfig pc;
  const std::size_t n = 2 + static_cast<std::size_t>(rng.uniform() * 19.0);
  const double c = 0.4 + 2.0 * rng.uniform();
  const double v = 0.05 + 0.45 * rng.uniform();
  pc.nu.resize(n);
  pc.initial_phases.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    pc.nu[i] = v * (2.0 * rng.uniform() - 1.0);
    pc.initial_phases[i] = 0.95 * c * (2.0 * rng.uniform() - 1.0);
  }
  double thr = 0.0;
  for (double z : quad.z_nodes) thr = std::max(thr, kappa_threshold(c, z, pc.v_inf()));
  pc.kappa = thr * (1.2 + 1.8 * rng.uniform());
  pc.initial_bound = c;
  pc.coupling_sign = cfg.coupling_sign;
  c_out = c;
  return pc;
}

double log_slope(std::span<const double> t, std::span<const double> dev, double t0, double floor) {
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t[i] < t0 || !(dev[i] >= floor)) continue;
    const double y = std::log(dev[i]);
    sx += t[i];
    sy += y;
    sxx += t[i] * t[i];
    sxy += t[i] * y;
    ++n;
  }
  if (n < 5) return kNaN;
  const double dn = static_cast<double>(n);
  const double den = dn * sxx - sx * sx;
  if (den <= 0.0) return kNaN;
  return (dn * sxy - sx * sy) / den;
}

TrapConfigResult trapping_study(const ExperimentConfig& cfg, std::size_t index) {
  const auto rp = cfg.z.make();
  const auto quad = make_quadrature(rp, default_quadrature_order(cfg.degree));
  TrapConfigResult r;
  r.index = index;
  double c = 0.0;
  const ParticleConfig pc = random_trapped_config(cfg, index, quad, c);
  pc.validate(true, quad.z_nodes);
  r.n = pc.size();
  r.c = c;
  r.kappa = pc.kappa;
  r.v_inf = pc.v_inf();
  IntegrationOptions opt;
  opt.t_end = cfg.t_end;
  for (double z : quad.z_nodes) {
    // step below the RK4 stability limit
    const double lip = pc.kappa * normalizer_a(z) * std::pow(2.0, z) * (z + 1.0);
    opt.dt = std::min(cfg.time_step(), 0.25 / lip);
    TrapNodeResult nr;
    nr.z = z;
    nr.c_star = c_star(c, z);
    nr.kappa_threshold = kappa_threshold(c, z, r.v_inf);
    const auto eb = entrance_time_bound(c, z, pc.kappa, r.v_inf);
    nr.assumption = eb.assumption_holds;
    nr.entrance_bound = eb.value;
    const auto traj = integrate(pc, z, opt);
    nr.invariant = trapping_check(traj, c).invariant;
    nr.entrance_measured = entrance_time(traj, nr.c_star).value_or(kNaN);
    const auto phi = equilibrium(pc, z, c);
    nr.equilibrium_residual = equilibrium_residual(pc, z, phi);
    nr.decay_rate = decay_rate(nr.c_star, z, pc.kappa);
    std::vector<double> dev(traj.samples());
    for (std::size_t k = 0; k < traj.samples(); ++k) dev[k] = deviation_l1(traj.at(k), phi);
    const double fit_from = std::isnan(nr.entrance_measured) ? eb.value : nr.entrance_measured;
    nr.fitted_slope = log_slope(traj.times, dev, fit_from, kRelaxationFloor);
    r.nodes.push_back(nr);
  }
  return r;
}

// ---------------------------------------------------------------------------

ParticleConfig sensitivity_config(const ExperimentConfig& cfg) {
  Philox rng(cfg.seed, 7);
  ParticleConfig pc;
  const auto n = static_cast<std::size_t>(cfg.oscillators);
  pc.nu.resize(n);
  pc.initial_phases.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    pc.nu[i] = 0.2 * (2.0 * rng.uniform() - 1.0);
    pc.initial_phases[i] = 0.9 * cfg.c * (2.0 * rng.uniform() - 1.0);
  }
  pc.kappa = cfg.kappa;
  pc.initial_bound = cfg.c;
  pc.coupling_sign = cfg.coupling_sign;
  return pc;
}

SensitivityResult sensitivity_study(const ExperimentConfig& cfg, double t_end) {
  const auto rp = cfg.z.make();
  const auto quad = make_quadrature(rp, default_quadrature_order(cfg.degree));
  SensitivityResult r;
  r.particles = sensitivity_config(cfg);
  const auto& pc = r.particles;
  pc.validate(true, quad.z_nodes);
  IntegrationOptions opt;
  opt.t_end = t_end;
  opt.dt = cfg.time_step();
  std::vector<SensitivityRun> runs(quad.size());
  parallel_for(quad.size(), cfg.threads,
               [&](std::size_t q) { runs[q] = integrate_with_sensitivity(pc, quad.z_nodes[q], opt); });
  for (std::size_t q = 0; q < quad.size(); ++q) {
    const double z = quad.z_nodes[q];
    SensitivityNodeSeries s;
    s.z = z;
    const auto eb = entrance_time_bound(cfg.c, z, pc.kappa, pc.v_inf());
    if (!eb.assumption_holds)
      throw PreconditionError("sensitivity: kappa-assumption fails at z = " + format_double(z));
    s.tau_e = eb.value;
    const auto k = sensitivity_coeffs(cfg.c, z, pc.kappa, pc.size());
    const auto& ph = runs[q].phases;
    const auto& se = runs[q].sensitivities;
    s.times = ph.times;
    for (std::size_t i = 0; i < ph.samples(); ++i) {
      double a = 0.0, b = 0.0;
      for (double x : ph.at(i)) a += x * x;
      for (double x : se.at(i)) b += x * x;
      s.norm_theta.push_back(std::sqrt(a));
      s.norm_dz.push_back(std::sqrt(b));
      s.envelope.push_back(sensitivity_envelope(ph.times[i], k, s.tau_e));
    }
    r.nodes.push_back(std::move(s));
  }
  r.times = runs.front().phases.times;
  for (std::size_t i = 0; i < r.times.size(); ++i) {
    std::vector<std::span<const double>> a, b;
    for (std::size_t q = 0; q < quad.size(); ++q) {
      a.push_back(runs[q].phases.at(i));
      b.push_back(runs[q].sensitivities.at(i));
    }
    r.h1z.push_back(h1z_norms(a, b, quad).h1z);
  }
  return r;
}

GradientCheck gradient_check(const ParticleConfig& pc, double z, const IntegrationOptions& opt,
                             std::span<const double> deltas) {
  const auto run = integrate_with_sensitivity(pc, z, opt);
  GradientCheck g;
  for (double d : deltas) {
    const auto plus = integrate(pc, z + d, opt);
    const auto minus = integrate(pc, z - d, opt);
    double e = 0.0;
    for (std::size_t k = 0; k < plus.samples(); ++k) {
      const auto s = run.sensitivities.at(k);
      const auto p = plus.at(k), m = minus.at(k);
      for (std::size_t i = 0; i < s.size(); ++i)
        e = std::max(e, std::abs(s[i] - (p[i] - m[i]) / (2.0 * d)));
    }
    g.deltas.push_back(d);
    g.max_errors.push_back(e);
  }
  return g;
}

// ---------------------------------------------------------------------------

DeathTrackResult kinetic_death_track(const RandomParameter& rp, int degree, int n_theta,
                                     double nu0, double kappa_factor, double t_end,
                                     double width) {
  const ThetaGrid grid(static_cast<std::size_t>(n_theta));
  const auto probe = make_quadrature(rp, degree + 1);
  const double kappa = kappa_factor * kappa_threshold_dirac_random(nu0, probe);
  auto model = std::make_shared<const KineticModel>(rp, degree, grid, FrequencyModel::dirac(nu0),
                                                    kappa);
  auto theta_star = [&](double z) {
    const auto rep = solve_sigma_dirac(kappa, nu0, z);
    if (!rep.exists) throw NumericError("kinetic_death_track: no death state at z");
    return death_profile(rep.canonical_sigma, nu0, z);
  };
  KineticField field = init_from(model, [&](double th, double, double z) {
    const double c = theta_star(z);
    double s = 0.0;
    for (int k = -2; k <= 2; ++k) {
      const double e = th + 2.0 * pi * k - c;
      s += std::exp(-e * e / (2.0 * width * width));
    }
    return s;
  });
  DeathTrackResult r;
  r.nu0 = nu0;
  r.kappa = kappa;
  r.d_theta = grid.d_theta();
  const auto& quad = model->quadrature();
  r.z_nodes = quad.z_nodes;
  for (double z : quad.z_nodes) r.target.push_back(theta_star(z));
  r.max_deviation.assign(quad.size(), 0.0);
  auto track = [&] {
    for (std::size_t q = 0; q < quad.size(); ++q) {
      const double mp = mean_phase(grid, field.marginal_nodal(q));
      r.max_deviation[q] = std::max(r.max_deviation[q], std::abs(mp - r.target[q]));
    }
  };
  track();
  const StepPlan plan = plan_steps(t_end, default_kinetic_dt(field));
  for (std::size_t k = 0; k < plan.steps; ++k) {
    step_in_place(field, plan.dt);
    track();
  }
  return r;
}

double influence_window_mass(double z, double half_width) {
  static const QuadratureRule gl = gauss_rule(ChaosFamily::legendre, 64);
  const double a = normalizer_a(z);
  double s = 0.0;
  for (std::size_t i = 0; i < gl.size(); ++i)
    s += gl.weights[i] * std::pow(1.0 + std::cos(half_width * gl.nodes[i]), z);
  return a * 2.0 * half_width * s;
}

}  // namespace winfree
