#include <immintrin.h>

#include <array>
#include <cmath>
#include <limits>

#include "vecmath_avx2.hpp"
#include "winfree/kernels.hpp"

namespace winfree::kernels::avx2 {

namespace {

constexpr std::size_t kLanes = 4;

struct Terms {
  __m256d sin, cos, power, log_base;
};

// Lanes with 1 + cos below the floor get power 0 and log -inf.
inline Terms eval_terms(__m256d theta, __m256d z) {
  Terms t;
  vm::sincos(theta, &t.sin, &t.cos);
  const __m256d base = _mm256_add_pd(_mm256_set1_pd(1.0), t.cos);
  const __m256d zero_base = _mm256_cmp_pd(base, _mm256_set1_pd(kPowerFloor), _CMP_LT_OQ);
  const __m256d lb = vm::log(_mm256_max_pd(base, _mm256_set1_pd(kPowerFloor)));
  t.log_base = _mm256_blendv_pd(lb, _mm256_set1_pd(-std::numeric_limits<double>::infinity()),
                                zero_base);
  t.power = _mm256_andnot_pd(zero_base, vm::exp(_mm256_mul_pd(z, lb)));
  return t;
}

inline bool out_of_range(__m256d theta) {
  const __m256d abs = _mm256_andnot_pd(_mm256_set1_pd(-0.0), theta);
  // NaN lanes compare false here and propagate through the vector path.
  return _mm256_movemask_pd(_mm256_cmp_pd(abs, _mm256_set1_pd(vm::kSinCosMaxArg), _CMP_GT_OQ)) != 0;
}

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

}  // namespace

void trig_power(std::span<const double> theta, double z, const TrigPowerOut& out) {
  const std::size_t n = theta.size();
  const __m256d vz = _mm256_set1_pd(z);
  std::size_t i = 0;
  for (; i + kLanes <= n; i += kLanes) {
    const __m256d th = _mm256_loadu_pd(theta.data() + i);
    if (out_of_range(th)) {
      TrigPowerOut sub{out.sin.empty() ? out.sin : out.sin.subspan(i, kLanes),
                       out.cos.empty() ? out.cos : out.cos.subspan(i, kLanes),
                       out.power.empty() ? out.power : out.power.subspan(i, kLanes),
                       out.log_base.empty() ? out.log_base : out.log_base.subspan(i, kLanes)};
      scalar::trig_power(theta.subspan(i, kLanes), z, sub);
      continue;
    }
    const Terms t = eval_terms(th, vz);
    if (!out.sin.empty()) _mm256_storeu_pd(out.sin.data() + i, t.sin);
    if (!out.cos.empty()) _mm256_storeu_pd(out.cos.data() + i, t.cos);
    if (!out.power.empty()) _mm256_storeu_pd(out.power.data() + i, t.power);
    if (!out.log_base.empty()) _mm256_storeu_pd(out.log_base.data() + i, t.log_base);
  }
  if (i < n) {
    const std::size_t rest = n - i;
    TrigPowerOut sub{out.sin.empty() ? out.sin : out.sin.subspan(i, rest),
                     out.cos.empty() ? out.cos : out.cos.subspan(i, rest),
                     out.power.empty() ? out.power : out.power.subspan(i, rest),
                     out.log_base.empty() ? out.log_base : out.log_base.subspan(i, rest)};
    scalar::trig_power(theta.subspan(i, rest), z, sub);
  }
}

double influence_sum(std::span<const double> theta, double z, std::span<double> sin_out) {
  const std::size_t n = theta.size();
  const __m256d vz = _mm256_set1_pd(z);
  __m256d acc = _mm256_setzero_pd();
  double tail = 0.0;
  std::size_t i = 0;
  for (; i + kLanes <= n; i += kLanes) {
    const __m256d th = _mm256_loadu_pd(theta.data() + i);
    if (out_of_range(th)) {
      tail += scalar::influence_sum(theta.subspan(i, kLanes), z, sin_out.subspan(i, kLanes));
      continue;
    }
    const Terms t = eval_terms(th, vz);
    _mm256_storeu_pd(sin_out.data() + i, t.sin);
    acc = _mm256_add_pd(acc, t.power);
  }
  if (i < n) tail += scalar::influence_sum(theta.subspan(i), z, sin_out.subspan(i));
  return hsum(acc) + tail;
}

double weighted_power_sum(std::span<const double> log_base, std::span<const double> weights,
                          double z) {
  const std::size_t n = log_base.size();
  const __m256d vz = _mm256_set1_pd(z);
  const __m256d neg_inf = _mm256_set1_pd(-std::numeric_limits<double>::infinity());
  __m256d acc = _mm256_setzero_pd();
  std::size_t m = 0;
  for (; m + kLanes <= n; m += kLanes) {
    const __m256d lb = _mm256_loadu_pd(log_base.data() + m);
    const __m256d w = _mm256_loadu_pd(weights.data() + m);
    const __m256d is_zero = _mm256_cmp_pd(lb, neg_inf, _CMP_EQ_OQ);
    const __m256d p = _mm256_andnot_pd(is_zero, vm::exp(_mm256_mul_pd(vz, lb)));
    acc = _mm256_fmadd_pd(w, p, acc);
  }
  double tail = 0.0;
  if (m < n) tail = scalar::weighted_power_sum(log_base.subspan(m), weights.subspan(m), z);
  return hsum(acc) + tail;
}

void upwind_update(std::span<const double> f, std::span<const double> face_velocity,
                   double ratio, std::span<double> out) {
  const std::size_t n = f.size();
  if (n < 2 * kLanes) {
    scalar::upwind_update(f, face_velocity, ratio, out);
    return;
  }
  const __m256d zero = _mm256_setzero_pd();
  const __m256d vr = _mm256_set1_pd(ratio);
  auto flux_scalar = [&](std::size_t m) {
    const double v = face_velocity[m];
    const double right = f[m + 1 == n ? 0 : m + 1];
    return (v > 0.0 ? v : 0.0) * f[m] + (v < 0.0 ? v : 0.0) * right;
  };
  // Faces 0..n-2 have their right neighbour in range; face n-1 wraps.
  std::size_t m = 1;
  // out[0] uses the wrapped flux F[n-1].
  out[0] = f[0] - ratio * (flux_scalar(0) - flux_scalar(n - 1));
  for (; m + kLanes < n; m += kLanes) {
    const __m256d fm = _mm256_loadu_pd(f.data() + m);
    const __m256d fr = _mm256_loadu_pd(f.data() + m + 1);
    const __m256d fl = _mm256_loadu_pd(f.data() + m - 1);
    const __m256d vm_ = _mm256_loadu_pd(face_velocity.data() + m);
    const __m256d vl = _mm256_loadu_pd(face_velocity.data() + m - 1);
    const __m256d flux_r = _mm256_fmadd_pd(_mm256_max_pd(vm_, zero), fm,
                                           _mm256_mul_pd(_mm256_min_pd(vm_, zero), fr));
    const __m256d flux_l = _mm256_fmadd_pd(_mm256_max_pd(vl, zero), fl,
                                           _mm256_mul_pd(_mm256_min_pd(vl, zero), fm));
    _mm256_storeu_pd(out.data() + m, _mm256_fnmadd_pd(vr, _mm256_sub_pd(flux_r, flux_l), fm));
  }
  for (; m < n; ++m) out[m] = f[m] - ratio * (flux_scalar(m) - flux_scalar(m - 1));
}

}  // namespace winfree::kernels::avx2
