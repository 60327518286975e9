#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numbers>
#include <string>

#include <json.hpp>

#include "winfree/deathstate.hpp"
#include "winfree/error.hpp"
#include "winfree/kernels.hpp"
#include "winfree/runners.hpp"

namespace winfree {

using std::numbers::pi;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

// Short token for file names: 0.1 -> "0.1", 1e-2 -> "0.01".
std::string tag(double x) { return format_double(x); }

std::string tag_index(std::size_t i) { return std::to_string(i); }

class Emitter {
 public:
  explicit Emitter(const ExperimentConfig& cfg) : cfg_(cfg), meta_(run_metadata(cfg)) {
    std::filesystem::create_directories(cfg.output);
  }

  CsvWriter open(const std::string& name, std::initializer_list<std::string_view> columns,
                 const Metadata& extra = {}) {
    Metadata m = meta_;
    m.insert(m.end(), extra.begin(), extra.end());
    const auto path = cfg_.output / name;
    result_.files.push_back(path);
    return CsvWriter(path, m, columns);
  }

  RunResult finish() {
    nlohmann::ordered_json j;
    for (const auto& [k, v] : meta_) j[k] = v;
    j["config"] = cfg_.canonical();
    auto& files = j["files"] = nlohmann::ordered_json::array();
    for (const auto& p : result_.files) files.push_back(p.filename().string());
    const auto path = cfg_.output / "manifest.json";
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path.string());
    out << j.dump(2) << '\n';
    result_.files.push_back(path);
    return result_;
  }

 private:
  const ExperimentConfig& cfg_;
  Metadata meta_;
  RunResult result_;
};

void write_density_table(Emitter& em, const std::string& name, const ThetaGrid& grid,
                         const DensitySnapshot& s, const Metadata& extra) {
  auto w = em.open(name,
                   {"t", "theta", "kinetic_mean", "particle_mean", "kinetic_variance",
                    "particle_variance"},
                   extra);
  for (std::size_t m = 0; m < grid.size(); ++m)
    w.row({s.t, grid.center(m), s.kinetic_mean[m], s.particle_mean[m], s.kinetic_variance[m],
           s.particle_variance[m]});
}

void write_influence(Emitter& em, std::span<const double> zs) {
  constexpr int kSamples = 361;
  auto prof = em.open("influence_profile.csv", {"theta", "z", "influence"});
  for (double z : zs)
    for (int i = 0; i < kSamples; ++i) {
      const double th = -pi + 2.0 * pi * i / (kSamples - 1);
      prof.row({th, z, influence(th, z)});
    }
  auto win = em.open("influence_window.csv", {"z", "half_width", "mass"});
  for (double z : zs) win.row({z, 0.5, influence_window_mass(z, 0.5)});
}

std::vector<MeanFieldResult> mean_field_runs(const ExperimentConfig& cfg,
                                             const std::vector<int>& particles) {
  struct Job {
    std::size_t s, n;
  };
  std::vector<Job> jobs;
  for (std::size_t s = 0; s < cfg.sigma0_sq.size(); ++s)
    for (std::size_t n = 0; n < particles.size(); ++n) jobs.push_back({s, n});
  std::vector<MeanFieldResult> out(jobs.size());
  parallel_for(jobs.size(), cfg.threads, [&](std::size_t i) {
    const auto [s, n] = jobs[i];
    out[i] = mean_field_compare(cfg, cfg.sigma0_sq[s], particles[n], 16 * s + n);
  });
  return out;
}

}  // namespace

Metadata run_metadata(const ExperimentConfig& cfg) {
  const std::string v(kVersion);
  return {{"experiment", std::string(experiment_name(cfg.experiment))},
          {"config_hash", hex64(cfg.hash())},
          {"version", v},
          {"modules", "uncertainty=" + v + ";particle=" + v + ";analysis=" + v + ";kinetic=" + v +
                          ";deathstate=" + v + ";cli=" + v},
          {"seed", std::to_string(cfg.seed)},
          {"rng", std::string(Philox::name)},
          {"isa", std::string(kernels::isa_name(kernels::active_isa()))}};
}

RunResult run_mean_field(const ExperimentConfig& cfg) {
  Emitter em(cfg);
  const ThetaGrid grid(static_cast<std::size_t>(cfg.n_theta));
  const auto runs = mean_field_runs(cfg, cfg.particles);
  auto l1 = em.open("mean_field_l1.csv", {"sigma0_sq", "particles", "t", "l1"});
  auto cons = em.open("mean_field_conservation.csv",
                      {"sigma0_sq", "particles", "max_mass_drift", "min_nodal"});
  for (const auto& r : runs) {
    double drift = 0.0;
    for (double d : r.max_mass_drift) drift = std::max(drift, d);
    cons.row({r.sigma0_sq, static_cast<double>(r.particles), drift, r.min_nodal});
    for (const auto& s : r.snapshots) {
      l1.row({r.sigma0_sq, static_cast<double>(r.particles), s.t, s.l1});
      write_density_table(em,
                          "mean_field_s" + tag(r.sigma0_sq) + "_n" + std::to_string(r.particles) +
                              "_t" + tag(s.t) + ".csv",
                          grid, s,
                          {{"sigma0_sq", format_double(r.sigma0_sq)},
                           {"particles", std::to_string(r.particles)}});
    }
  }
  return em.finish();
}

RunResult run_bands(const ExperimentConfig& cfg) {
  Emitter em(cfg);
  const ThetaGrid grid(static_cast<std::size_t>(cfg.n_theta));
  const auto runs = mean_field_runs(cfg, {cfg.particles.back()});
  for (const auto& r : runs)
    for (const auto& s : r.snapshots) {
      auto w = em.open("bands_s" + tag(r.sigma0_sq) + "_t" + tag(s.t) + ".csv",
                       {"theta", "kinetic_mean", "kinetic_lower", "kinetic_upper",
                        "particle_mean", "particle_lower", "particle_upper"},
                       {{"sigma0_sq", format_double(r.sigma0_sq)},
                        {"particles", std::to_string(r.particles)},
                        {"t", format_double(s.t)}});
      for (std::size_t m = 0; m < grid.size(); ++m) {
        const double ks = std::sqrt(std::max(s.kinetic_variance[m], 0.0));
        const double ps = std::sqrt(std::max(s.particle_variance[m], 0.0));
        w.row({grid.center(m), s.kinetic_mean[m], s.kinetic_mean[m] - ks, s.kinetic_mean[m] + ks,
               s.particle_mean[m], s.particle_mean[m] - ps, s.particle_mean[m] + ps});
      }
    }
  return em.finish();
}

RunResult run_spectral_error(const ExperimentConfig& cfg) {
  Emitter em(cfg);
  for (const auto& law : cfg.laws)
    for (double kappa : cfg.kappas) {
      const auto r = spectral_error(cfg, law, kappa, cfg.threads);
      auto w = em.open("spectral_error_" + law + "_k" + tag(kappa) + ".csv", {"M", "error"},
                       {{"law", law},
                        {"kappa", format_double(kappa)},
                        {"reference_degree", std::to_string(cfg.reference_degree)},
                        {"self_error", format_double(r.self_error)}});
      for (std::size_t i = 0; i < r.degrees.size(); ++i)
        w.row({static_cast<double>(r.degrees[i]), r.errors[i]});
    }
  return em.finish();
}

RunResult run_death_sweep(const ExperimentConfig& cfg) {
  Emitter em(cfg);
  constexpr int kU = 401;
  {
    auto surf = em.open("h_surface.csv", {"u", "z", "h"});
    auto peak = em.open("h_peak.csv", {"z", "u_grid_argmax", "u_peak", "h_max"});
    for (double z : cfg.zs) {
      double best = -1.0, arg = 0.0;
      for (int i = 0; i < kU; ++i) {
        const double u = static_cast<double>(i) / (kU - 1);
        const double h = h_func(u, z);
        surf.row({u, z, h});
        if (h > best) best = h, arg = u;
      }
      const double up = h_peak_location(z);
      peak.row({z, arg, up, h_func(up, z)});
    }
  }
  {
    auto thr = em.open("thresholds.csv", {"gamma", "z", "kappa_threshold", "x_star_or_nan"});
    for (double g : cfg.gammas)
      for (double z : cfg.zs)
        thr.row({g, z, kappa_threshold_uniform(g, z), g < gamma_star(z) ? x_star(g, z) : kNaN});
  }
  const double factors[] = {0.9, 1.1, 1.5};
  {
    auto roots = em.open("sigma_roots_uniform.csv",
                         {"kappa", "gamma_or_nu0", "z", "exists", "sigma_1", "sigma_2"});
    for (double g : cfg.gammas)
      for (double z : cfg.zs)
        for (double f : factors) {
          const auto rep = solve_sigma_uniform(f * kappa_threshold_uniform(g, z), g, z);
          const auto& s = rep.sigma_roots;
          roots.row({rep.kappa, g, z, rep.exists ? 1.0 : 0.0, s.size() > 0 ? s[0] : kNaN,
                     s.size() > 1 ? s[1] : kNaN});
        }
  }
  {
    auto roots = em.open("sigma_roots_dirac.csv",
                         {"kappa", "gamma_or_nu0", "z", "exists", "sigma_1", "sigma_2"});
    for (double nu0 : cfg.nu0s)
      for (double z : cfg.zs)
        for (double f : factors) {
          const auto rep = solve_sigma_dirac(f * kappa_threshold_dirac(nu0, z), nu0, z);
          const auto& s = rep.sigma_roots;
          roots.row({rep.kappa, nu0, z, rep.exists ? 1.0 : 0.0, s.size() > 0 ? s[0] : kNaN,
                     s.size() > 1 ? s[1] : kNaN});
        }
  }
  {
    constexpr int kC = 24;
    auto adj = em.open("adjoint.csv", {"c", "z", "beta", "c_star", "residual"});
    for (double z : cfg.zs) {
      const double b = beta(z);
      for (int i = 1; i <= kC; ++i) {
        const double c = b + (pi - b) * i / (kC + 1);
        const double cs = c_star(c, z);
        adj.row({c, z, b, cs, std::abs(adjoint_g(cs, z) - adjoint_g(c, z))});
      }
    }
  }
  write_influence(em, cfg.zs);
  return em.finish();
}

RunResult run_sensitivity(const ExperimentConfig& cfg) {
  Emitter em(cfg);
  const auto r = sensitivity_study(cfg, cfg.t_end);
  for (std::size_t q = 0; q < r.nodes.size(); ++q) {
    const auto& s = r.nodes[q];
    auto w = em.open("sensitivity_node" + tag_index(q) + ".csv",
                     {"t", "norm_theta", "norm_dz", "h1z", "envelope"},
                     {{"z", format_double(s.z)}, {"tau_e", format_double(s.tau_e)}});
    for (std::size_t i = 0; i < s.times.size(); ++i)
      w.row({s.times[i], s.norm_theta[i], s.norm_dz[i], r.h1z[i], s.envelope[i]});
  }
  return em.finish();
}

RunResult run_trapping(const ExperimentConfig& cfg) {
  Emitter em(cfg);
  const auto count = static_cast<std::size_t>(cfg.configs);
  std::vector<TrapConfigResult> res(count);
  parallel_for(count, cfg.threads, [&](std::size_t i) { res[i] = trapping_study(cfg, i); });

  auto nodes = em.open("trapping_nodes.csv",
                       {"config", "n", "c", "kappa", "v_inf", "z", "c_star", "kappa_threshold",
                        "assumption", "invariant", "entrance_measured", "entrance_bound",
                        "decay_rate", "fitted_slope", "equilibrium_residual"});
  for (const auto& r : res)
    for (const auto& n : r.nodes)
      nodes.row({static_cast<double>(r.index), static_cast<double>(r.n), r.c, r.kappa, r.v_inf,
                 n.z, n.c_star, n.kappa_threshold, n.assumption ? 1.0 : 0.0,
                 n.invariant ? 1.0 : 0.0, n.entrance_measured, n.entrance_bound, n.decay_rate,
                 n.fitted_slope, n.equilibrium_residual});

  auto thr = em.open("deterministic_thresholds.csv",
                     {"config", "n_exponent", "incoherence_ok", "incoherence_slack", "death_ok",
                      "death_slack", "locking_ok", "locking_alpha_bound", "locking_kappa_bound",
                      "locking_diameter_bound"});
  const auto quad = make_quadrature(cfg.z.make(), default_quadrature_order(cfg.degree));
  for (std::size_t i = 0; i < count; ++i) {
    double c = 0.0;
    const auto pc = random_trapped_config(cfg, i, quad, c);
    for (int n = 1; n <= 3; ++n) {
      const auto t = deterministic_thresholds(n, pc.nu, pc.kappa, c, pc.initial_phases);
      thr.row({static_cast<double>(i), static_cast<double>(n), t.incoherence_ok ? 1.0 : 0.0,
               t.incoherence_slack, t.death_ok ? 1.0 : 0.0, t.death_slack,
               t.locking_ok ? 1.0 : 0.0, t.locking_alpha_bound, t.locking_kappa_bound,
               t.locking_diameter_bound});
    }
  }
  return em.finish();
}

RunResult run_influence_profile(const ExperimentConfig& cfg) {
  Emitter em(cfg);
  write_influence(em, cfg.zs);
  return em.finish();
}

RunResult run_experiment(const ExperimentConfig& cfg) {
  switch (cfg.experiment) {
    case Experiment::mean_field: return run_mean_field(cfg);
    case Experiment::bands: return run_bands(cfg);
    case Experiment::spectral_error: return run_spectral_error(cfg);
    case Experiment::death_sweep: return run_death_sweep(cfg);
    case Experiment::sensitivity: return run_sensitivity(cfg);
    case Experiment::trapping: return run_trapping(cfg);
    case Experiment::influence_profile: return run_influence_profile(cfg);
  }
  throw ConfigError("experiment: unknown");
}

}  // namespace winfree
