#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "winfree/analysis.hpp"
#include "winfree/error.hpp"

using namespace winfree;
using std::numbers::pi;

namespace {

double g(double y, double z) { return std::sin(y) * std::pow(1.0 + std::cos(y), z); }

// Plain bisection written independently of the library helper.
double oracle_root(double target, double z, double lo, double hi) {
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (g(mid, z) < target ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

double a_int(int n) {
  double r = 1.0;
  for (int k = 1; k <= n; ++k) r *= (2.0 * k) / (2.0 * (2.0 * k - 1.0));
  return r;  // (2n)!! / (2^n (2n-1)!!)
}

}  // namespace

TEST_CASE("bisect") {
  CHECK(bisect([](double x) { return x * x - 2.0; }, 0.0, 2.0) ==
        doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
  CHECK_THROWS_AS(bisect([](double x) { return x * x + 1.0; }, -1.0, 1.0), NumericError);
  CHECK(bisect([](double x) { return x; }, 0.0, 1.0) == 0.0);
}

TEST_CASE("beta") {
  CHECK(beta(1.0) == doctest::Approx(pi / 3).epsilon(1e-15));
  double prev = beta(1.0);
  for (double z = 1.5; z <= 20.0; z += 0.5) {
    CHECK(beta(z) < prev);
    prev = beta(z);
  }
  const double b = beta(3.0);
  CHECK(g(b + 1e-4, 3.0) < g(b, 3.0));
  CHECK(g(b - 1e-4, 3.0) < g(b, 3.0));
  CHECK_THROWS_AS(beta(0.5), DomainError);
}

TEST_CASE("c_star") {
  CHECK(c_star(beta(3.0), 3.0) == beta(3.0));
  CHECK(c_star(0.3, 3.0) == 0.3);
  const double cs = c_star(2.0, 3.0);
  CHECK(cs > 0.02);
  CHECK(cs < 0.03);
  CHECK(cs == doctest::Approx(oracle_root(g(2.0, 3.0), 3.0, 0.0, beta(3.0))).epsilon(1e-11));
  CHECK_THROWS_AS(c_star(0.0, 2.0), DomainError);
  CHECK_THROWS_AS(c_star(pi, 2.0), DomainError);
}

TEST_CASE("c_star properties on random inputs") {
  std::mt19937_64 r(11);
  std::uniform_real_distribution<double> uc(1e-3, pi - 1e-3), uz(1.0, 12.0);
  for (int i = 0; i < 200; ++i) {
    const double c = uc(r), z = uz(r);
    const double cs = c_star(c, z);
    CHECK(cs > 0.0);
    CHECK(cs <= beta(z));
    CHECK(beta(z) < pi / 2);
    CHECK(cs <= c);
    CHECK(std::abs(g(cs, z) - g(c, z)) < 1e-10);
    CHECK(std::abs(c_star(cs, z) - cs) < 1e-12);
  }
}

TEST_CASE("kappa threshold") {
  CHECK(kappa_threshold(pi / 2, 1.0, 1.0) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(kappa_threshold(1.0, 2.0, 0.0) == 0.0);
  CHECK(kappa_threshold(1.0, 50.0, 1.0) / kappa_threshold(1.0, 10.0, 1.0) > 10.0);
  CHECK(kappa_assumption_holds(1.01, pi / 2, 1.0, 1.0));
  CHECK_FALSE(kappa_assumption_holds(0.99, pi / 2, 1.0, 1.0));
}

TEST_CASE("entrance time bound") {
  const double z = 2.0;
  CHECK(entrance_time_bound(0.5 * beta(z), z, 1.0, 0.1).value == 0.0);
  const double c = 2.0, v = 0.2;
  const double thr = kappa_threshold(c, z, v);
  const auto far = entrance_time_bound(c, z, 3.0 * thr, v);
  CHECK(far.assumption_holds);
  CHECK(far.value == doctest::Approx((c - c_star(c, z)) / (normalizer_a(z) * 3.0 * thr * g(c, z) - v)));
  const auto near = entrance_time_bound(c, z, thr * (1.0 + 1e-9), v);
  CHECK(near.value > 1e6 * far.value);
  const auto below = entrance_time_bound(c, z, 0.5 * thr, v);
  CHECK_FALSE(below.assumption_holds);
  CHECK(std::isinf(below.value));

  const auto rep = trapped_regime(c, z, 3.0 * thr, v);
  CHECK(rep.beta == beta(z));
  CHECK(rep.kappa_assumption_holds);
  CHECK(rep.entrance_time_bound == far.value);
}

TEST_CASE("equilibrium") {
  ParticleConfig homo;
  homo.nu = {0.0, 0.0, 0.0};
  homo.kappa = 1.0;
  for (double p : equilibrium(homo, 2.0, 1.0)) CHECK(p == 0.0);

  ParticleConfig one;
  one.nu = {0.1};
  one.kappa = 1.0;
  const auto phi = equilibrium(one, 1.0, pi / 2);
  // 0.1 = a(1) sin(phi) (1 + cos phi) with a(1) = 1
  double lo = 0.0, hi = beta(1.0);
  for (int i = 0; i < 200; ++i) {
    const double m = 0.5 * (lo + hi);
    (g(m, 1.0) < 0.1 ? lo : hi) = m;
  }
  CHECK(phi[0] == doctest::Approx(lo).epsilon(1e-10));
  CHECK(equilibrium_residual(one, 1.0, phi) < 1e-9);

  std::mt19937_64 r(5);
  std::uniform_real_distribution<double> u(-0.3, 0.3);
  for (int trial = 0; trial < 20; ++trial) {
    ParticleConfig pc;
    pc.nu.resize(12);
    for (auto& x : pc.nu) x = u(r);
    const double z = 1.0 + trial * 0.4, c = 1.2;
    pc.kappa = 1.3 * kappa_threshold(c, z, pc.v_inf());
    const auto ph = equilibrium(pc, z, c);
    CHECK(equilibrium_residual(pc, z, ph) < 1e-9);
    for (double p : ph) CHECK(std::abs(p) <= c_star(c, z) + 1e-12);
  }
  ParticleConfig weak = one;
  weak.kappa = 0.01;
  CHECK_THROWS_AS(equilibrium(weak, 1.0, pi / 2), PreconditionError);
}

TEST_CASE("decay rate") {
  for (double z : {1.0, 2.5, 7.0}) {
    CHECK(std::abs(decay_rate(beta(z), z, 1.3)) < 1e-14);
    CHECK(decay_rate(0.5 * beta(z), z, 1.3) < 0.0);
  }
  const double s = std::sqrt(2.0) / 2.0;
  CHECK(decay_rate(pi / 4, 1.0, 1.0) == doctest::Approx((1.0 + s) * (1.0 - 2.0 * s)).epsilon(1e-14));
}

TEST_CASE("sensitivity coefficients against a second implementation") {
  for (double c : {0.8, 1.4, 2.2})
    for (double z : {1.0, 2.0, 4.5}) {
      const double kappa = 0.9;
      const std::size_t n = 7;
      const auto k = sensitivity_coeffs(c, z, kappa, n);
      const double a = normalizer_a(z), ap = normalizer_a_prime(z);
      const double c111 =
          std::cos(c) < 0 ? std::pow(2.0, z) * std::cos(c) : std::cos(c) * std::pow(1 + std::cos(c), z);
      const double c11 =
          kappa * a * (-c111 + z / std::sqrt(2 * z - 1) * std::pow((2 * z - 1) / z, z));
      const double cs = c_star(c, z);
      const double c12 = kappa * a * z * (1 - (z + 1) / z * std::cos(cs)) * std::pow(1 + std::cos(cs), z);
      const double c21 = kappa * std::abs(ap) * std::pow(2.0, z) * std::sqrt(7.0) +
                         kappa * a * std::pow(2.0, z) * std::sqrt(7.0) * std::log(2.0);
      CHECK(k.C_111 == doctest::Approx(c111).epsilon(1e-13));
      CHECK(k.C_11 == doctest::Approx(c11).epsilon(1e-12));
      CHECK(k.C_12 == doctest::Approx(c12).epsilon(1e-10));
      CHECK(k.C_21 == doctest::Approx(c21).epsilon(1e-12));
      CHECK(k.C_22 == doctest::Approx(c21 * std::sin(cs)).epsilon(1e-12));
      CHECK(k.C_21 >= 0.0);
      CHECK(k.C_22 >= 0.0);
      if (cs < beta(z)) CHECK(k.C_12 < 0.0);
    }
}

TEST_CASE("sensitivity envelope") {
  const auto k = sensitivity_coeffs(2.0, 2.0, 1.5, 5);
  const double tau = 0.7;
  CHECK(sensitivity_envelope(0.0, k, tau) == 0.0);
  const double left = sensitivity_envelope(tau * (1 - 1e-15), k, tau);
  CHECK(std::abs(sensitivity_envelope(tau, k, tau) - left) < 1e-12 * std::max(1.0, left));
  CHECK(sensitivity_envelope(1e4, k, tau) == doctest::Approx(-k.C_22 / k.C_12).epsilon(1e-12));
  auto k0 = k;
  k0.C_11 = 0.0;
  CHECK(sensitivity_envelope(0.5, k0, tau) == doctest::Approx(0.5 * k.C_21));
  CHECK_THROWS_AS(sensitivity_envelope(-1.0, k, tau), PreconditionError);
}

TEST_CASE("deterministic thresholds") {
  const double nu[] = {0.1, 0.4, -0.3};
  const double th[] = {0.1, -0.1, 0.2};
  const auto r0 = deterministic_thresholds(2, nu, 0.0, 1.5, th);
  CHECK(r0.incoherence_ok);
  CHECK(r0.incoherence_slack == doctest::Approx(0.3 / (2.0 * 4.0 * a_int(2))));

  // death condition at alpha = c agrees with kappa_threshold at integer z
  for (int n = 1; n <= 4; ++n) {
    const double alpha = 1.5;
    const double thr = kappa_threshold(alpha, n, 0.4);
    const auto r = deterministic_thresholds(n, nu, 1.1 * thr, alpha, th);
    CHECK(r.death_ok);
    CHECK(r.death_slack == doctest::Approx(0.1 * thr).epsilon(1e-10));
    CHECK_FALSE(deterministic_thresholds(n, nu, 0.9 * thr, alpha, th).death_ok);
  }

  // locking bound at n = 1: a_1 = 1
  const double eq[] = {1.0, 1.0};
  const double tin[] = {0.0, 1e-6};
  const auto l = deterministic_thresholds(1, eq, 0.01, 0.05, tin);
  const double alpha_bound = (pi / 4.0 * 0.5 - 0.5);
  CHECK(l.locking_alpha_bound == doctest::Approx(alpha_bound).epsilon(1e-14));
  CHECK(alpha_bound < 0.0);
  CHECK_FALSE(l.locking_ok);
  CHECK(l.locking_kappa_bound == doctest::Approx(0.25));
  CHECK_THROWS_AS(deterministic_thresholds(0, nu, 0.1, 1.0, th), DomainError);
}

TEST_CASE("threshold consistency under simulation") {
  std::mt19937_64 r(21);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  ParticleConfig pc;
  pc.nu.resize(10);
  pc.initial_phases.resize(10);
  const double c = 1.3, z = 2.0;
  for (auto& x : pc.nu) x = 0.3 * u(r);
  for (auto& x : pc.initial_phases) x = 0.9 * c * u(r);
  pc.kappa = 1.01 * kappa_threshold(c, z, pc.v_inf());
  IntegrationOptions o;
  o.t_end = 20.0;
  o.dt = 1e-2;
  CHECK(trapping_check(integrate(pc, z, o), c).invariant);
  pc.kappa = 0.0;
  CHECK_FALSE(trapping_check(integrate(pc, z, o), c).invariant);
}
