#pragma once

// Data-parallel inner loops of the particle and kinetic solvers.
//
// Every kernel has a portable scalar reference implementation and, on x86-64,
// an AVX2+FMA variant. The variant is chosen once at runtime from CPUID and
// can be forced with the WINFREE_KERNELS environment variable
// ("scalar", "avx2" or "auto") or with set_isa().

#include <cstddef>
#include <span>
#include <string_view>

namespace winfree::kernels {

enum class Isa { scalar, avx2 };

std::string_view isa_name(Isa isa) noexcept;

/// True when the CPU (and the build) can run the given variant.
bool isa_supported(Isa isa) noexcept;

/// Variant used by the free functions below.
Isa active_isa() noexcept;

/// Forces a variant. Returns false (and leaves the selection unchanged) when
/// the variant is not supported on this machine.
bool set_isa(Isa isa) noexcept;

/// Below this value 1 + cos(theta) is treated as exactly zero, so that
/// (1 + cos theta)^z = 0 and ln(1 + cos theta) = -inf.
inline constexpr double kPowerFloor = 1e-300;

/// Elementwise evaluation of the trigonometric terms of the Winfree coupling.
/// Output spans may be empty when a term is not needed; non-empty spans must
/// have the length of `theta`.
struct TrigPowerOut {
  std::span<double> sin;
  std::span<double> cos;
  std::span<double> power;     // (1 + cos theta)^z
  std::span<double> log_base;  // ln(1 + cos theta)
};

void trig_power(std::span<const double> theta, double z, const TrigPowerOut& out);

/// Fused form used by the particle drift: writes sin(theta_i) into `sin_out`
/// and returns sum_j (1 + cos theta_j)^z.
double influence_sum(std::span<const double> theta, double z, std::span<double> sin_out);

/// sum_m weights[m] * exp(z * log_base[m]); entries with log_base = -inf
/// contribute zero.
double weighted_power_sum(std::span<const double> log_base, std::span<const double> weights,
                          double z);

/// One conservative first-order upwind update on a periodic row:
///   F[m]  = max(v[m],0) f[m] + min(v[m],0) f[m+1]   (v[m] at face m+1/2)
///   out[m] = f[m] - ratio (F[m] - F[m-1])
/// `out` must not alias `f`.
void upwind_update(std::span<const double> f, std::span<const double> face_velocity,
                   double ratio, std::span<double> out);

namespace scalar {
void trig_power(std::span<const double> theta, double z, const TrigPowerOut& out);
double influence_sum(std::span<const double> theta, double z, std::span<double> sin_out);
double weighted_power_sum(std::span<const double> log_base, std::span<const double> weights,
                          double z);
void upwind_update(std::span<const double> f, std::span<const double> face_velocity,
                   double ratio, std::span<double> out);
}  // namespace scalar

#if defined(WINFREE_HAVE_AVX2)
namespace avx2 {
void trig_power(std::span<const double> theta, double z, const TrigPowerOut& out);
double influence_sum(std::span<const double> theta, double z, std::span<double> sin_out);
double weighted_power_sum(std::span<const double> log_base, std::span<const double> weights,
                          double z);
void upwind_update(std::span<const double> f, std::span<const double> face_velocity,
                   double ratio, std::span<double> out);
}  // namespace avx2
#endif

}  // namespace winfree::kernels
