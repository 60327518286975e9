#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "winfree/kernels.hpp"

namespace k = winfree::kernels;

namespace {

std::vector<double> random_angles(std::size_t n, double span, unsigned seed) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> u(-span, span);
  std::vector<double> v(n);
  for (auto& x : v) x = u(gen);
  return v;
}

double rel_diff(double a, double b) {
  const double scale = std::max({std::abs(a), std::abs(b), 1e-300});
  return std::abs(a - b) / scale;
}

}  // namespace

TEST_CASE("scalar trig_power matches libm") {
  auto th = random_angles(37, 10.0, 1);
  std::vector<double> s(th.size()), c(th.size()), p(th.size()), lb(th.size());
  k::scalar::trig_power(th, 2.5, {s, c, p, lb});
  for (std::size_t i = 0; i < th.size(); ++i) {
    CHECK(s[i] == std::sin(th[i]));
    CHECK(c[i] == std::cos(th[i]));
    CHECK(p[i] == doctest::Approx(std::pow(1.0 + std::cos(th[i]), 2.5)).epsilon(1e-13));
  }
}

TEST_CASE("power is exactly zero at theta = pi") {
  std::vector<double> th{std::numbers::pi, -std::numbers::pi, 3 * std::numbers::pi};
  std::vector<double> p(3), lb(3);
  k::scalar::trig_power(th, 1.7, {{}, {}, p, lb});
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(p[i] == 0.0);
    CHECK(std::isinf(lb[i]));
  }
}

TEST_CASE("dispatch honours set_isa") {
  const auto before = k::active_isa();
  CHECK(k::set_isa(k::Isa::scalar));
  CHECK(k::active_isa() == k::Isa::scalar);
  CHECK(k::isa_name(k::Isa::scalar) == "scalar");
  k::set_isa(before);
}

#if defined(WINFREE_HAVE_AVX2)

TEST_CASE("avx2 kernels agree with scalar reference") {
  if (!k::isa_supported(k::Isa::avx2)) return;
  for (std::size_t n : {1u, 3u, 4u, 7u, 64u, 101u, 1000u}) {
    for (double span : {0.5, 3.2, 50.0, 1e4, 2e6}) {
      auto th = random_angles(n, span, static_cast<unsigned>(n * 7 + span));
      for (double z : {1.0, 1.5, 3.0, 27.0}) {
        const std::size_t m = th.size();
        std::vector<double> s0(m), c0(m), p0(m), l0(m), s1(m), c1(m), p1(m), l1(m);
        k::scalar::trig_power(th, z, {s0, c0, p0, l0});
        k::avx2::trig_power(th, z, {s1, c1, p1, l1});
        for (std::size_t i = 0; i < m; ++i) {
          CHECK(std::abs(s0[i] - s1[i]) < 4e-16);
          CHECK(std::abs(c0[i] - c1[i]) < 4e-16);
          // (1 + cos) loses relative accuracy near theta = pi in either variant.
          CHECK(std::abs(p0[i] - p1[i]) <= 1e-13 * std::pow(2.0, z));
        }
        std::vector<double> sa(m), sb(m);
        const double a = k::scalar::influence_sum(th, z, sa);
        const double b = k::avx2::influence_sum(th, z, sb);
        CHECK(rel_diff(a, b) < 1e-13);
        for (std::size_t i = 0; i < m; ++i) CHECK(std::abs(sa[i] - sb[i]) < 4e-16);
      }
    }
  }
}

TEST_CASE("avx2 vector exp and log near range edges") {
  if (!k::isa_supported(k::Isa::avx2)) return;
  std::vector<double> lb{-1e-300, -700.0 / 3.0, -1.0, 0.0, 0.6931471805599453, -745.0, -1e5,
                         -std::numeric_limits<double>::infinity(), 1e-8};
  std::vector<double> w(lb.size(), 1.0);
  for (double z : {1.0, 3.0}) {
    for (std::size_t i = 0; i < lb.size(); ++i) {
      std::span<const double> one(&lb[i], 1);
      std::vector<double> four(4, lb[i]);
      std::vector<double> w4(4, 1.0);
      const double a = k::scalar::weighted_power_sum(one, std::span<const double>(&w[i], 1), z);
      const double b = k::avx2::weighted_power_sum(four, w4, z) / 4.0;
      CHECK(std::abs(a - b) <= 1e-300 + 1e-14 * std::abs(a));
    }
  }
}

TEST_CASE("avx2 weighted_power_sum agrees with scalar") {
  if (!k::isa_supported(k::Isa::avx2)) return;
  for (std::size_t n : {5u, 8u, 101u, 256u}) {
    auto th = random_angles(n, 3.14159, 11 + static_cast<unsigned>(n));
    std::vector<double> lb(n), w(n);
    k::scalar::trig_power(th, 1.0, {{}, {}, {}, lb});
    for (std::size_t i = 0; i < n; ++i) w[i] = 1.0 + 0.01 * static_cast<double>(i);
    for (double z : {1.0, 2.25, 9.0}) {
      CHECK(rel_diff(k::scalar::weighted_power_sum(lb, w, z), k::avx2::weighted_power_sum(lb, w, z)) <
            1e-13);
    }
  }
}

TEST_CASE("avx2 upwind_update agrees with scalar and conserves mass") {
  if (!k::isa_supported(k::Isa::avx2)) return;
  for (std::size_t n : {3u, 8u, 9u, 101u, 128u}) {
    auto f = random_angles(n, 1.0, 3);
    auto v = random_angles(n, 2.0, 4);
    for (auto& x : f) x = std::abs(x);
    std::vector<double> a(n), b(n);
    k::scalar::upwind_update(f, v, 0.3, a);
    k::avx2::upwind_update(f, v, 0.3, b);
    double sa = 0, sb = 0, s0 = 0;
    for (std::size_t i = 0; i < n; ++i) {
      CHECK(std::abs(a[i] - b[i]) < 1e-15);
      sa += a[i];
      sb += b[i];
      s0 += f[i];
    }
    CHECK(std::abs(sa - s0) < 1e-13);
    CHECK(std::abs(sb - s0) < 1e-13);
  }
}

#endif
