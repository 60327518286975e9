#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "winfree/analysis.hpp"
#include "winfree/error.hpp"
#include "winfree/particle.hpp"

using namespace winfree;
using std::numbers::pi;

namespace {

ParticleConfig make_cfg(std::vector<double> nu, std::vector<double> th0, double kappa) {
  ParticleConfig c;
  c.nu = std::move(nu);
  c.initial_phases = std::move(th0);
  c.kappa = kappa;
  return c;
}

// Direct O(N^2) evaluation used as the drift oracle.
std::vector<double> naive_drift(const std::vector<double>& th, const ParticleConfig& c, double z) {
  std::vector<double> out(th.size());
  const double a = std::exp(std::lgamma(z + 1.0) * 2.0 - std::lgamma(2.0 * z + 1.0)) *
                   std::pow(2.0, z);  // a(z) = 2^z Gamma(z+1)^2 / Gamma(2z+1)
  for (std::size_t i = 0; i < th.size(); ++i) {
    double s = 0.0;
    for (double t : th) s += std::pow(1.0 + std::cos(t), z);
    out[i] = c.nu[i] - c.coupling_sign * a * c.kappa / th.size() * std::sin(th[i]) * s;
  }
  return out;
}

double terminal_error(const ParticleConfig& c, double z, double dt, const std::vector<double>& ref) {
  IntegrationOptions o;
  o.t_end = 1.0;
  o.dt = dt;
  const auto tr = integrate(c, z, o);
  const auto last = tr.at(tr.samples() - 1);
  double e = 0.0;
  for (std::size_t i = 0; i < ref.size(); ++i) e = std::max(e, std::abs(last[i] - ref[i]));
  return e;
}

}  // namespace

TEST_CASE("drift trivial values") {
  auto c = make_cfg({0.0, 0.0}, {0.0, 0.0}, 1.0);
  PhaseState s{{0.0, 0.0}, 0.0};
  for (double v : drift(s, c, 2.5)) CHECK(v == 0.0);

  auto one = make_cfg({0.0}, {pi / 2}, 1.0);
  PhaseState s1{{pi / 2}, 0.0};
  CHECK(drift(s1, one, 1.0)[0] == doctest::Approx(-1.0).epsilon(1e-14));
}

TEST_CASE("drift agrees with direct double sum") {
  std::mt19937_64 g(3);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  std::vector<double> nu(17), th(17);
  for (auto& x : nu) x = 0.3 * u(g);
  for (auto& x : th) x = u(g);
  auto c = make_cfg(nu, th, 0.7);
  for (double z : {1.0, 1.7, 4.2}) {
    const auto d = drift(PhaseState{th, 0.0}, c, z);
    const auto ref = naive_drift(th, c, z);
    for (std::size_t i = 0; i < th.size(); ++i) CHECK(d[i] == doctest::Approx(ref[i]).epsilon(1e-12));
  }
}

TEST_CASE("coupling sign flips the interaction") {
  auto c = make_cfg({0.1, -0.2}, {0.4, -0.9}, 1.3);
  const auto a = drift(PhaseState{c.initial_phases, 0.0}, c, 2.0);
  c.coupling_sign = -1.0;
  const auto b = drift(PhaseState{c.initial_phases, 0.0}, c, 2.0);
  for (std::size_t i = 0; i < 2; ++i) CHECK(b[i] - c.nu[i] == doctest::Approx(-(a[i] - c.nu[i])));
}

TEST_CASE("integrate: equilibrium and free rotation") {
  IntegrationOptions o;
  o.t_end = 3.0;
  o.dt = 1e-2;
  const auto rest = integrate(make_cfg({0.0, 0.0, 0.0}, {0.0, 0.0, 0.0}, 2.0), 1.5, o);
  for (double v : rest.data) CHECK(v == 0.0);

  const auto free = integrate(make_cfg({0.3, -1.1}, {0.2, 5.0}, 0.0), 2.0, o);
  const auto last = free.at(free.samples() - 1);
  CHECK(free.times.back() == doctest::Approx(3.0));
  CHECK(std::abs(last[0] - (0.2 + 0.3 * 3.0)) < 1e-10 * 3.0);
  CHECK(std::abs(last[1] - (5.0 - 1.1 * 3.0)) < 1e-10 * 3.0);
}

TEST_CASE("phases are stored unwrapped") {
  IntegrationOptions o;
  o.t_end = 10.0;
  o.dt = 1e-2;
  const auto tr = integrate(make_cfg({2.0}, {0.0}, 0.0), 1.0, o);
  CHECK(tr.at(tr.samples() - 1)[0] == doctest::Approx(20.0));
}

TEST_CASE("RK4 observed order") {
  auto c = make_cfg({0.4, -0.3}, {1.0, -0.5}, 1.2);
  const double z = 1.8;
  IntegrationOptions fine;
  fine.t_end = 1.0;
  fine.dt = 1.0 / 2560.0;
  const auto rt = integrate(c, z, fine);
  const auto r = rt.at(rt.samples() - 1);
  const std::vector<double> ref(r.begin(), r.end());
  const double e1 = terminal_error(c, z, 1.0 / 20.0, ref);
  const double e2 = terminal_error(c, z, 1.0 / 40.0, ref);
  const double order = std::log2(e1 / e2);
  CHECK(order > 3.5);
  CHECK(order < 4.5);
}

TEST_CASE("integrate: stride and divergence") {
  IntegrationOptions o;
  o.t_end = 1.0;
  o.dt = 0.1;
  o.stride = 5;
  const auto tr = integrate(make_cfg({0.1}, {0.0}, 0.5), 1.0, o);
  CHECK(tr.samples() == 3);
  CHECK(tr.times.back() == doctest::Approx(1.0));

  auto bad = make_cfg({std::numeric_limits<double>::infinity()}, {0.0}, 0.0);
  CHECK_THROWS_AS(integrate(bad, 1.0, o), IntegrationDiverged);
}

TEST_CASE("config validation") {
  CHECK_THROWS_AS(make_cfg({0.0, 1.0}, {0.0}, 1.0).validate(), PreconditionError);
  CHECK_THROWS_AS(make_cfg({0.0}, {0.0}, -1.0).validate(), PreconditionError);
  auto c = make_cfg({0.0}, {1.0}, 1.0);
  c.initial_bound = 0.5;
  const double zs[] = {1.0};
  CHECK_THROWS_AS(c.validate(true, zs), PreconditionError);
  c.initial_bound = 1.5;
  CHECK_NOTHROW(c.validate(true, zs));
}

TEST_CASE("sG with all-zero state has zero drift") {
  const SgSystem sys(RandomParameter::uniform(1.0, 3.0), 3);
  auto c = make_cfg({0.0, 0.0}, {0.0, 0.0}, 1.0);
  const auto s = sys.project_initial(c);
  for (double v : sg_drift(s, c, sys)) CHECK(v == 0.0);
}

TEST_CASE("sG at M = 0 equals drift at the single node") {
  const auto rp = RandomParameter::uniform(1.0, 3.0);
  const SgSystem sys(rp, 0, 1);
  auto c = make_cfg({0.1, -0.2, 0.05}, {0.3, -0.7, 1.1}, 0.8);
  const auto s = sys.project_initial(c);
  const auto sg = sg_drift(s, c, sys);
  const auto d = drift(PhaseState{c.initial_phases, 0.0}, c, sys.quadrature().z_nodes[0]);
  CHECK(sys.quadrature().z_nodes[0] == doctest::Approx(2.0));
  for (std::size_t i = 0; i < 3; ++i) CHECK(sg[i] == doctest::Approx(d[i]).epsilon(1e-13));
}

TEST_CASE("sG per-node reconstruction converges to fixed-z runs") {
  const auto rp = RandomParameter::uniform(1.0, 3.0);
  auto c = make_cfg({0.2, -0.1, 0.05, 0.0}, {0.5, -0.4, 1.0, -1.2}, 1.0);
  IntegrationOptions o;
  o.t_end = 1.0;
  o.dt = 1e-2;
  double prev = 1e300;
  double last = 0.0;
  for (int m : {1, 2, 4, 6, 8}) {
    const SgSystem sys(rp, m);
    const auto tr = sg_integrate(c, sys, o);
    const auto& st = tr.states.back();
    double err = 0.0;
    for (std::size_t q = 0; q < sys.quadrature().size(); ++q) {
      std::vector<double> rec(c.size());
      sys.reconstruct_node(st, q, rec);
      const auto ref = integrate(c, sys.quadrature().z_nodes[q], o);
      const auto rz = ref.at(ref.samples() - 1);
      for (std::size_t i = 0; i < c.size(); ++i) err = std::max(err, std::abs(rec[i] - rz[i]));
    }
    CHECK(err < prev);
    prev = err;
    last = err;
  }
  CHECK(last < 1e-6);
}

TEST_CASE("sensitivity drift vanishes at zero state") {
  auto c = make_cfg({0.0, 0.0}, {0.0, 0.0}, 1.0);
  for (double v : sensitivity_drift(PhaseState{{0.0, 0.0}, 0.0}, SensitivityState{{0.0, 0.0}}, c, 2.0))
    CHECK(v == 0.0);
  CHECK_THROWS_AS(
      sensitivity_drift(PhaseState{{pi, 0.0}, 0.0}, SensitivityState{{0.0, 0.0}}, c, 2.0),
      SensitivitySingular);
}

TEST_CASE("sensitivity drift matches derivative of drift in z") {
  // d/dt dTheta = d_theta F . dTheta + d_z F; compare with finite differences of drift.
  std::vector<double> th{0.3, -0.5, 0.9}, d{0.1, -0.2, 0.05};
  auto c = make_cfg({0.1, 0.0, -0.1}, th, 0.9);
  const double z = 2.3, h = 1e-5;
  const auto s = sensitivity_drift(PhaseState{th, 0.0}, SensitivityState{d}, c, z);
  std::vector<double> tp(3), tm(3);
  for (int i = 0; i < 3; ++i) tp[i] = th[i] + h * d[i], tm[i] = th[i] - h * d[i];
  const auto fp = drift(PhaseState{tp, 0.0}, c, z + h);
  const auto fm = drift(PhaseState{tm, 0.0}, c, z - h);
  for (int i = 0; i < 3; ++i) CHECK(s[i] == doctest::Approx((fp[i] - fm[i]) / (2 * h)).epsilon(1e-7));
}

TEST_CASE("rotation numbers and pattern classification") {
  IntegrationOptions o;
  o.t_end = 20.0;
  o.dt = 1e-2;
  const auto free = integrate(make_cfg({0.3, -0.7}, {0.0, 1.0}, 0.0), 1.0, o);
  const auto rho = rotation_numbers(free, 5.0);
  CHECK(rho.rho[0] == doctest::Approx(0.3).epsilon(1e-10));
  CHECK(rho.rho[1] == doctest::Approx(-0.7).epsilon(1e-10));
  CHECK_FALSE(rho.short_window);
  CHECK(rotation_numbers(free, 15.0).short_window);

  const auto twin = integrate(make_cfg({0.5, 0.5}, {0.2, 0.2}, 0.3), 1.0, o);
  const auto rt = rotation_numbers(twin, 5.0);
  CHECK(std::abs(rt.rho[0] - rt.rho[1]) < 1e-12);

  const double z3[] = {0.0, 0.0, 0.0}, l3[] = {1.0, 1.0, 1.0}, i3[] = {0.1, 0.5, 0.9};
  CHECK(classify_pattern(z3, 1e-3) == Pattern::death);
  CHECK(classify_pattern(l3, 1e-3) == Pattern::locking);
  CHECK(classify_pattern(i3, 1e-3) == Pattern::incoherence);
  const double m3[] = {0.1, 0.1, 0.9};
  CHECK(classify_pattern(m3, 1e-3) == Pattern::mixed);
  CHECK(default_pattern_tol(10.0, 0.5) == doctest::Approx(1.0));
  CHECK(default_pattern_tol(10.0, 3.0) == doctest::Approx(3.0));
}

TEST_CASE("trapped run has near-zero rotation") {
  auto c = make_cfg({0.1, -0.05, 0.08}, {0.3, -0.2, 0.1}, 0.0);
  const double cb = 1.0, z = 2.0;
  c.kappa = 1.5 * kappa_threshold(cb, z, c.v_inf());
  IntegrationOptions o;
  o.t_end = 40.0;
  o.dt = 1e-2;
  const auto tr = integrate(c, z, o);
  const auto rho = rotation_numbers(tr, 10.0);
  for (double r : rho.rho) CHECK(std::abs(r) < 2 * cb / 30.0);
  CHECK(trapping_check(tr, cb).invariant);
  CHECK(classify_pattern(rho.rho, default_pattern_tol(rho.window, c.v_inf())) == Pattern::death);
}

TEST_CASE("trapping check and entrance time") {
  IntegrationOptions o;
  o.t_end = 5.0;
  o.dt = 1e-2;
  const auto rest = integrate(make_cfg({0.0}, {0.0}, 0.0), 1.0, o);
  CHECK(trapping_check(rest, 0.5).invariant);
  CHECK(entrance_time(rest, 0.1).value() == 0.0);

  // free drift leaves the box no later than the linear bound
  auto c = make_cfg({0.4, 0.2}, {0.1, -0.3}, 0.0);
  const auto tr = integrate(c, 1.0, o);
  const auto chk = trapping_check(tr, 1.0);
  REQUIRE_FALSE(chk.invariant);
  CHECK(*chk.first_exit <= (1.0 - 0.3) / 0.2 + o.dt);
  CHECK_FALSE(entrance_time(tr, 0.2).has_value());
}

TEST_CASE("h1z norms and deviation") {
  const auto quad = make_quadrature(RandomParameter::uniform(1.0, 3.0), 4);
  std::vector<double> zeros(3, 0.0), ones{1.0, 2.0, 2.0};
  std::vector<std::span<const double>> ph(quad.size(), std::span<const double>(zeros));
  auto n0 = h1z_norms(ph, ph, quad);
  CHECK(n0.h1z == 0.0);
  std::vector<std::span<const double>> p1(quad.size(), std::span<const double>(ones));
  auto n1 = h1z_norms(p1, ph, quad);
  CHECK(n1.norm_dz_theta == 0.0);
  CHECK(n1.norm_theta == doctest::Approx(3.0));
  CHECK(n1.h1z == doctest::Approx(3.0));

  const double a[] = {0.5, -0.5}, b[] = {0.25, 0.0};
  CHECK(deviation_l1(a, a) == 0.0);
  CHECK(deviation_l1(a, b) == doctest::Approx(0.75));
  const double c1[] = {0.5};
  CHECK_THROWS(deviation_l1(a, c1));
}
