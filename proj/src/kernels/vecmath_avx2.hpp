#pragma once

// Four-lane double-precision sin/cos, log and exp for AVX2+FMA.
// Accuracy is within a few ulp of libm on the argument ranges used by the
// kernels: |x| <= kSinCosMaxArg for sincos, normal positive x for log and
// any finite x for exp (results flush to zero below -708.39).

#include <immintrin.h>

namespace winfree::kernels::avx2::vm {

inline constexpr double kSinCosMaxArg = 1.0e6;

inline __m256d set1(double v) { return _mm256_set1_pd(v); }

inline __m256d poly(__m256d x, const double* c, int n) {
  __m256d acc = set1(c[n - 1]);
  for (int i = n - 2; i >= 0; --i) acc = _mm256_fmadd_pd(acc, x, set1(c[i]));
  return acc;
}

// Cody-Waite split of pi/2 with trailing zeros so that k * part is exact.
inline constexpr double kPio2A = 1.5707963109016418457;
inline constexpr double kPio2B = 1.5893254712295856735e-08;
inline constexpr double kPio2C = 6.123233932053594251e-17;
inline constexpr double kPio2D = 6.3683171635109499080e-25;

inline void sincos(__m256d x, __m256d* sin_out, __m256d* cos_out) {
  const __m256d k =
      _mm256_round_pd(_mm256_mul_pd(x, set1(0.636619772367581343076)),
                      _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
  __m256d r = _mm256_fnmadd_pd(k, set1(kPio2A), x);
  r = _mm256_fnmadd_pd(k, set1(kPio2B), r);
  r = _mm256_fnmadd_pd(k, set1(kPio2C), r);
  r = _mm256_fnmadd_pd(k, set1(kPio2D), r);

  static constexpr double kSin[] = {-1.66666666666666324348e-01, 8.33333333332248946124e-03,
                                    -1.98412698298579493134e-04, 2.75573137070700676789e-06,
                                    -2.50507602534068634195e-08, 1.58969099521155010221e-10};
  static constexpr double kCos[] = {4.16666666666666019037e-02, -1.38888888888741095749e-03,
                                    2.48015872894767294178e-05, -2.75573143513906633035e-07,
                                    2.08757232129817482790e-09, -1.13596475577881948265e-11};
  const __m256d r2 = _mm256_mul_pd(r, r);
  const __m256d r3 = _mm256_mul_pd(r2, r);
  const __m256d s = _mm256_fmadd_pd(r3, poly(r2, kSin, 6), r);
  const __m256d r4 = _mm256_mul_pd(r2, r2);
  const __m256d c =
      _mm256_fmadd_pd(r4, poly(r2, kCos, 6), _mm256_fnmadd_pd(set1(0.5), r2, set1(1.0)));

  // Quadrant q = k mod 4 selects (+-sin r, +-cos r).
  const __m256i q = _mm256_cvtepi32_epi64(_mm256_cvtpd_epi32(k));
  const __m256i one = _mm256_set1_epi64x(1);
  const __m256i two = _mm256_set1_epi64x(2);
  const __m256d swap =
      _mm256_castsi256_pd(_mm256_cmpeq_epi64(_mm256_and_si256(q, one), one));
  const __m256d sin_sign = _mm256_castsi256_pd(_mm256_slli_epi64(_mm256_and_si256(q, two), 62));
  const __m256d cos_sign = _mm256_castsi256_pd(
      _mm256_slli_epi64(_mm256_and_si256(_mm256_add_epi64(q, one), two), 62));
  *sin_out = _mm256_xor_pd(_mm256_blendv_pd(s, c, swap), sin_sign);
  *cos_out = _mm256_xor_pd(_mm256_blendv_pd(c, s, swap), cos_sign);
}

// Natural log for positive normal x (fdlibm reduction and coefficients).
inline __m256d log(__m256d x) {
  const __m256i bits = _mm256_castpd_si256(x);
  const __m256i mant_mask = _mm256_set1_epi64x(0x000FFFFFFFFFFFFFLL);
  const __m256i one_bits = _mm256_set1_epi64x(0x3FF0000000000000LL);
  const __m256i magic_bits = _mm256_set1_epi64x(0x4330000000000000LL);  // 2^52
  __m256d m = _mm256_castsi256_pd(_mm256_or_si256(_mm256_and_si256(bits, mant_mask), one_bits));
  const __m256i biased = _mm256_srli_epi64(bits, 52);
  __m256d e = _mm256_sub_pd(_mm256_castsi256_pd(_mm256_or_si256(biased, magic_bits)),
                            set1(4503599627370496.0 + 1023.0));
  const __m256d big = _mm256_cmp_pd(m, set1(1.41421356237309504880), _CMP_GT_OQ);
  m = _mm256_blendv_pd(m, _mm256_mul_pd(m, set1(0.5)), big);
  e = _mm256_add_pd(e, _mm256_and_pd(big, set1(1.0)));

  static constexpr double kLg[] = {6.666666666666735130e-01, 3.999999999940941908e-01,
                                   2.857142874366239149e-01, 2.222219843214978396e-01,
                                   1.818357216161805012e-01, 1.531383769920937332e-01,
                                   1.479819860511658591e-01};
  const __m256d f = _mm256_sub_pd(m, set1(1.0));
  const __m256d s = _mm256_div_pd(f, _mm256_add_pd(set1(2.0), f));
  const __m256d z = _mm256_mul_pd(s, s);
  const __m256d R = _mm256_mul_pd(z, poly(z, kLg, 7));
  const __m256d hfsq = _mm256_mul_pd(_mm256_mul_pd(set1(0.5), f), f);
  const __m256d ln2_hi = set1(6.93147180369123816490e-01);
  const __m256d ln2_lo = set1(1.90821492927058770002e-10);
  // e*ln2_hi - ((hfsq - (s*(hfsq+R) + e*ln2_lo)) - f)
  const __m256d inner = _mm256_fmadd_pd(s, _mm256_add_pd(hfsq, R), _mm256_mul_pd(e, ln2_lo));
  const __m256d tail = _mm256_sub_pd(_mm256_sub_pd(hfsq, inner), f);
  return _mm256_fmsub_pd(e, ln2_hi, tail);
}

inline __m256d exp(__m256d x) {
  const __m256d underflow = _mm256_cmp_pd(x, set1(-708.39), _CMP_LT_OQ);
  x = _mm256_min_pd(_mm256_max_pd(x, set1(-708.39)), set1(709.0));
  const __m256d k =
      _mm256_round_pd(_mm256_mul_pd(x, set1(1.44269504088896340736)),
                      _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
  __m256d r = _mm256_fnmadd_pd(k, set1(6.93147180369123816490e-01), x);
  r = _mm256_fnmadd_pd(k, set1(1.90821492927058770002e-10), r);

  static constexpr double kTaylor[] = {1.0,
                                       1.0,
                                       1.0 / 2,
                                       1.0 / 6,
                                       1.0 / 24,
                                       1.0 / 120,
                                       1.0 / 720,
                                       1.0 / 5040,
                                       1.0 / 40320,
                                       1.0 / 362880,
                                       1.0 / 3628800,
                                       1.0 / 39916800,
                                       1.0 / 479001600,
                                       1.0 / 6227020800.0};
  const __m256d p = poly(r, kTaylor, 14);
  const __m128i k32 = _mm_add_epi32(_mm256_cvtpd_epi32(k), _mm_set1_epi32(1023));
  const __m256d scale =
      _mm256_castsi256_pd(_mm256_slli_epi64(_mm256_cvtepi32_epi64(k32), 52));
  return _mm256_andnot_pd(underflow, _mm256_mul_pd(p, scale));
}

}  // namespace winfree::kernels::avx2::vm
