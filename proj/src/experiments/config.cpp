#include <yaml-cpp/yaml.h>

#include <cmath>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include "winfree/config.hpp"
#include "winfree/error.hpp"
#include "winfree/output.hpp"

namespace winfree {

namespace {

constexpr std::pair<Experiment, std::string_view> kNames[] = {
    {Experiment::mean_field, "mean-field"},
    {Experiment::bands, "bands"},
    {Experiment::spectral_error, "spectral-error"},
    {Experiment::death_sweep, "death-sweep"},
    {Experiment::sensitivity, "sensitivity"},
    {Experiment::trapping, "trapping"},
    {Experiment::influence_profile, "influence-profile"},
};

[[noreturn]] void bad(const std::string& field, const std::string& msg) {
  throw ConfigError(field + ": " + msg);
}

template <class T>
T scalar(const YAML::Node& n, const std::string& field) {
  try {
    return n.as<T>();
  } catch (const YAML::Exception&) {
    bad(field, "wrong type");
  }
}

template <class T>
std::vector<T> list(const YAML::Node& n, const std::string& field) {
  if (n.IsScalar()) return {scalar<T>(n, field)};
  if (!n.IsSequence()) bad(field, "expected a value or a list");
  std::vector<T> out;
  for (const auto& e : n) out.push_back(scalar<T>(e, field));
  return out;
}

void check_keys(const YAML::Node& n, const std::string& section,
                std::initializer_list<std::string_view> allowed) {
  if (!n.IsMap()) bad(section, "expected a table");
  for (const auto& kv : n) {
    const auto key = kv.first.as<std::string>();
    bool ok = false;
    for (auto a : allowed) ok = ok || key == a;
    if (!ok) bad(section.empty() ? key : section + "." + key, "unknown key");
  }
}

void set_path(YAML::Node root, const std::string& dotted, const YAML::Node& value) {
  std::vector<std::string> parts;
  std::stringstream ss(dotted);
  for (std::string p; std::getline(ss, p, '.');) {
    if (p.empty()) bad(dotted, "malformed override key");
    parts.push_back(p);
  }
  if (parts.empty()) bad(dotted, "malformed override key");
  // yaml-cpp nodes are handles; walking by value keeps the tree shared.
  std::vector<YAML::Node> chain{root};
  for (std::size_t i = 0; i + 1 < parts.size(); ++i) {
    YAML::Node next = chain.back()[parts[i]];
    if (!next.IsDefined() || next.IsNull()) {
      chain.back()[parts[i]] = YAML::Node(YAML::NodeType::Map);
      next = chain.back()[parts[i]];
    }
    chain.push_back(next);
  }
  chain.back()[parts.back()] = value;
}

void parse_into(ExperimentConfig& c, const YAML::Node& root) {
  if (!root || root.IsNull()) return;
  check_keys(root, "", {"experiment", "seed", "threads", "output", "model", "grid", "time", "z",
                        "frequencies", "initial", "spectral", "sweep"});
  if (auto n = root["experiment"]) {
    const auto e = parse_experiment(scalar<std::string>(n, "experiment"));
    if (e != c.experiment) bad("experiment", "does not match the subcommand");
  }
  if (auto n = root["seed"]) c.seed = scalar<std::uint64_t>(n, "seed");
  if (auto n = root["threads"]) c.threads = scalar<int>(n, "threads");
  if (auto n = root["output"]) c.output = scalar<std::string>(n, "output");
  if (auto m = root["model"]) {
    check_keys(m, "model", {"particles", "degree", "kappa", "c", "coupling_sign", "oscillators"});
    if (auto n = m["particles"]) c.particles = list<int>(n, "model.particles");
    if (auto n = m["degree"]) c.degree = scalar<int>(n, "model.degree");
    if (auto n = m["kappa"]) c.kappa = scalar<double>(n, "model.kappa");
    if (auto n = m["c"]) c.c = scalar<double>(n, "model.c");
    if (auto n = m["coupling_sign"]) c.coupling_sign = scalar<double>(n, "model.coupling_sign");
    if (auto n = m["oscillators"]) c.oscillators = scalar<int>(n, "model.oscillators");
  }
  if (auto g = root["grid"]) {
    check_keys(g, "grid", {"n_theta", "scheme"});
    if (auto n = g["n_theta"]) c.n_theta = scalar<int>(n, "grid.n_theta");
    if (auto n = g["scheme"]) c.scheme = scalar<std::string>(n, "grid.scheme");
  }
  if (auto t = root["time"]) {
    check_keys(t, "time", {"t_end", "dt_policy", "dt", "snapshots"});
    if (auto n = t["t_end"]) c.t_end = scalar<double>(n, "time.t_end");
    if (auto n = t["dt_policy"]) c.dt_policy = scalar<std::string>(n, "time.dt_policy");
    if (auto n = t["dt"]) c.dt = scalar<double>(n, "time.dt");
    if (auto n = t["snapshots"]) c.snapshots = list<double>(n, "time.snapshots");
  }
  if (auto z = root["z"]) {
    check_keys(z, "z", {"law", "lo", "hi", "shift"});
    if (auto n = z["law"]) c.z.law = scalar<std::string>(n, "z.law");
    if (auto n = z["lo"]) c.z.lo = scalar<double>(n, "z.lo");
    if (auto n = z["hi"]) c.z.hi = scalar<double>(n, "z.hi");
    if (auto n = z["shift"]) c.z.shift = scalar<double>(n, "z.shift");
  }
  if (auto f = root["frequencies"]) {
    check_keys(f, "frequencies", {"model", "nu0", "gamma", "nodes"});
    if (auto n = f["model"]) c.frequencies.model = scalar<std::string>(n, "frequencies.model");
    if (auto n = f["nu0"]) c.frequencies.nu0 = scalar<double>(n, "frequencies.nu0");
    if (auto n = f["gamma"]) c.frequencies.gamma = scalar<double>(n, "frequencies.gamma");
    if (auto n = f["nodes"]) c.frequencies.nodes = scalar<int>(n, "frequencies.nodes");
  }
  if (auto i = root["initial"]) {
    check_keys(i, "initial", {"theta_bar_1", "theta_bar_2", "sigma0_sq"});
    if (auto n = i["theta_bar_1"]) c.theta_bar_1 = scalar<double>(n, "initial.theta_bar_1");
    if (auto n = i["theta_bar_2"]) c.theta_bar_2 = scalar<double>(n, "initial.theta_bar_2");
    if (auto n = i["sigma0_sq"]) c.sigma0_sq = list<double>(n, "initial.sigma0_sq");
  }
  if (auto s = root["spectral"]) {
    check_keys(s, "spectral", {"reference_degree", "max_degree", "kappas", "laws"});
    if (auto n = s["reference_degree"])
      c.reference_degree = scalar<int>(n, "spectral.reference_degree");
    if (auto n = s["max_degree"]) c.max_degree = scalar<int>(n, "spectral.max_degree");
    if (auto n = s["kappas"]) c.kappas = list<double>(n, "spectral.kappas");
    if (auto n = s["laws"]) c.laws = list<std::string>(n, "spectral.laws");
  }
  if (auto s = root["sweep"]) {
    check_keys(s, "sweep", {"gammas", "zs", "nu0s", "configs"});
    if (auto n = s["gammas"]) c.gammas = list<double>(n, "sweep.gammas");
    if (auto n = s["zs"]) c.zs = list<double>(n, "sweep.zs");
    if (auto n = s["nu0s"]) c.nu0s = list<double>(n, "sweep.nu0s");
    if (auto n = s["configs"]) c.configs = scalar<int>(n, "sweep.configs");
  }
}

void check_law(const std::string& law, const std::string& field) {
  if (law != "uniform" && law != "gaussian-square")
    bad(field, "must be 'uniform' or 'gaussian-square'");
}

template <class T>
void join(std::ostringstream& os, const std::vector<T>& v) {
  os << '[';
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) os << ',';
    if constexpr (std::is_same_v<T, double>)
      os << format_double(v[i]);
    else
      os << v[i];
  }
  os << ']';
}

}  // namespace

std::string_view experiment_name(Experiment e) noexcept {
  for (auto [k, v] : kNames)
    if (k == e) return v;
  return "?";
}

Experiment parse_experiment(std::string_view s) {
  for (auto [k, v] : kNames)
    if (v == s) return k;
  throw ConfigError("experiment: unknown experiment '" + std::string(s) + "'");
}

RandomParameter ZLawSpec::make() const {
  if (law == "uniform") return RandomParameter::uniform(lo, hi);
  if (law == "gaussian-square") return RandomParameter::gaussian_square(shift);
  throw ConfigError("z.law: must be 'uniform' or 'gaussian-square'");
}

FrequencyModel FrequencySpec::make() const {
  if (model == "zero") return FrequencyModel::zero();
  if (model == "dirac") return FrequencyModel::dirac(nu0);
  if (model == "uniform") return FrequencyModel::uniform(gamma, nodes);
  throw ConfigError("frequencies.model: must be 'zero', 'dirac' or 'uniform'");
}

double ExperimentConfig::time_step() const {
  if (dt_policy == "grid") {
    const double d = 2.0 * std::numbers::pi / n_theta;
    return d * d;
  }
  return dt;
}

void ExperimentConfig::validate() const {
  if (threads < 1) bad("threads", "must be >= 1");
  if (particles.empty()) bad("model.particles", "must not be empty");
  for (int n : particles)
    if (n < 1) bad("model.particles", "must be >= 1");
  if (degree < 0) bad("model.degree", "must be >= 0");
  if (!(kappa >= 0.0) || !std::isfinite(kappa)) bad("model.kappa", "must be finite and >= 0");
  if (!(c > 0.0 && c < std::numbers::pi)) bad("model.c", "must lie in (0, pi)");
  if (coupling_sign != 1.0 && coupling_sign != -1.0) bad("model.coupling_sign", "must be 1 or -1");
  if (oscillators < 1) bad("model.oscillators", "must be >= 1");
  if (n_theta < 8) bad("grid.n_theta", "must be >= 8");
  if (scheme != "upwind" && scheme != "muscl") bad("grid.scheme", "must be 'upwind' or 'muscl'");
  if (!(t_end > 0.0) || !std::isfinite(t_end)) bad("time.t_end", "must be finite and > 0");
  if (dt_policy != "grid" && dt_policy != "fixed") bad("time.dt_policy", "must be 'grid' or 'fixed'");
  if (!(dt > 0.0) || dt > t_end) bad("time.dt", "must lie in (0, t_end]");
  for (double s : snapshots)
    if (!(s >= 0.0 && s <= t_end)) bad("time.snapshots", "must lie in [0, t_end]");
  check_law(z.law, "z.law");
  if (z.law == "uniform") {
    if (!(z.lo < z.hi)) bad("z.lo", "must be < z.hi");
    if (!(z.lo >= 1.0)) bad("z.lo", "must be >= 1");
    if (!std::isfinite(z.hi)) bad("z.hi", "must be finite");
  } else if (!(z.shift >= 1.0)) {
    bad("z.shift", "must be >= 1");
  }
  const auto& f = frequencies;
  if (f.model != "zero" && f.model != "dirac" && f.model != "uniform")
    bad("frequencies.model", "must be 'zero', 'dirac' or 'uniform'");
  if (f.model == "uniform" && !(f.gamma > 0.0 && f.gamma < 1.0))
    bad("frequencies.gamma", "must lie in (0, 1)");
  if (f.nodes < 1) bad("frequencies.nodes", "must be >= 1");
  if (!std::isfinite(f.nu0)) bad("frequencies.nu0", "must be finite");
  if (sigma0_sq.empty()) bad("initial.sigma0_sq", "must not be empty");
  for (double s : sigma0_sq)
    if (!(s > 0.0)) bad("initial.sigma0_sq", "must be > 0");
  if (reference_degree < 1) bad("spectral.reference_degree", "must be >= 1");
  if (max_degree < 0 || max_degree >= reference_degree)
    bad("spectral.max_degree", "must lie in [0, reference_degree)");
  for (double k : kappas)
    if (!(k >= 0.0)) bad("spectral.kappas", "must be >= 0");
  for (const auto& l : laws) check_law(l, "spectral.laws");
  for (double g : gammas)
    if (!(g > 0.0 && g < 1.0)) bad("sweep.gammas", "must lie in (0, 1)");
  for (double v : zs)
    if (!(v >= 1.0)) bad("sweep.zs", "must be >= 1");
  if (configs < 1) bad("sweep.configs", "must be >= 1");
}

std::string ExperimentConfig::canonical() const {
  std::ostringstream os;
  os << "experiment=" << experiment_name(experiment) << "\nseed=" << seed
     << "\nparticles=";
  join(os, particles);
  os << "\ndegree=" << degree << "\nkappa=" << format_double(kappa) << "\nc=" << format_double(c)
     << "\ncoupling_sign=" << format_double(coupling_sign) << "\noscillators=" << oscillators
     << "\nn_theta=" << n_theta << "\nscheme=" << scheme << "\nt_end=" << format_double(t_end) << "\ndt_policy=" << dt_policy
     << "\ndt=" << format_double(dt) << "\nsnapshots=";
  join(os, snapshots);
  os << "\nz=" << z.law << ',' << format_double(z.lo) << ',' << format_double(z.hi) << ','
     << format_double(z.shift) << "\nfrequencies=" << frequencies.model << ','
     << format_double(frequencies.nu0) << ',' << format_double(frequencies.gamma) << ','
     << frequencies.nodes << "\ninitial=" << format_double(theta_bar_1) << ','
     << format_double(theta_bar_2) << ',';
  join(os, sigma0_sq);
  os << "\nspectral=" << reference_degree << ',' << max_degree << ',';
  join(os, kappas);
  os << ',';
  join(os, laws);
  os << "\nsweep=";
  join(os, gammas);
  join(os, zs);
  join(os, nu0s);
  os << ',' << configs << '\n';
  return os.str();
}

std::uint64_t ExperimentConfig::hash() const { return fnv1a(canonical()); }

ExperimentConfig default_config(Experiment e) {
  ExperimentConfig c;
  c.experiment = e;
  switch (e) {
    case Experiment::mean_field:
      c.scheme = "muscl";
      break;
    case Experiment::bands:
      c.scheme = "muscl";
      c.particles = {10000};
      c.t_end = 0.5;
      c.snapshots = {0.5};
      break;
    case Experiment::spectral_error:
      c.particles = {10000};
      c.dt_policy = "fixed";
      c.dt = 1e-2;
      c.sigma0_sq = {0.1};
      c.snapshots = {1.0};
      break;
    case Experiment::death_sweep:
      break;
    case Experiment::sensitivity:
      c.t_end = 10.0;
      c.dt_policy = "fixed";
      c.dt = 1e-2;
      c.snapshots = {};
      break;
    case Experiment::trapping:
      c.t_end = 10.0;
      c.dt_policy = "fixed";
      c.dt = 1e-2;
      c.snapshots = {};
      break;
    case Experiment::influence_profile:
      c.zs = {1.0, 3.0, 9.0};
      break;
  }
  return c;
}

ExperimentConfig load_config(Experiment e, const std::string& yaml_text,
                             const std::vector<std::string>& overrides) {
  YAML::Node root;
  try {
    root = yaml_text.empty() ? YAML::Node(YAML::NodeType::Map) : YAML::Load(yaml_text);
    if (root.IsNull()) root = YAML::Node(YAML::NodeType::Map);
    for (const auto& o : overrides) {
      const auto eq = o.find('=');
      if (eq == std::string::npos || eq == 0) bad(o, "override must have the form key=value");
      set_path(root, o.substr(0, eq), YAML::Load(o.substr(eq + 1)));
    }
  } catch (const YAML::Exception& ex) {
    throw ConfigError(std::string("config: ") + ex.what());
  }
  ExperimentConfig c = default_config(e);
  parse_into(c, root);
  c.validate();
  return c;
}

ExperimentConfig load_config_file(Experiment e, const std::filesystem::path& path,
                                  const std::vector<std::string>& overrides) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot read " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return load_config(e, ss.str(), overrides);
}

}  // namespace winfree
