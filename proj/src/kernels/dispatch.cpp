#include <atomic>
#include <cstdlib>
#include <string_view>

#include "winfree/kernels.hpp"

namespace winfree::kernels {

namespace {

Isa detect() noexcept {
  if (const char* env = std::getenv("WINFREE_KERNELS")) {
    const std::string_view v(env);
    if (v == "scalar") return Isa::scalar;
    if (v == "avx2" && isa_supported(Isa::avx2)) return Isa::avx2;
  }
  return isa_supported(Isa::avx2) ? Isa::avx2 : Isa::scalar;
}

std::atomic<Isa>& current() {
  static std::atomic<Isa> isa{detect()};
  return isa;
}

}  // namespace

std::string_view isa_name(Isa isa) noexcept {
  return isa == Isa::avx2 ? "avx2" : "scalar";
}

bool isa_supported(Isa isa) noexcept {
  if (isa == Isa::scalar) return true;
#if defined(WINFREE_HAVE_AVX2)
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

Isa active_isa() noexcept { return current().load(std::memory_order_relaxed); }

bool set_isa(Isa isa) noexcept {
  if (!isa_supported(isa)) return false;
  current().store(isa, std::memory_order_relaxed);
  return true;
}

void trig_power(std::span<const double> theta, double z, const TrigPowerOut& out) {
#if defined(WINFREE_HAVE_AVX2)
  if (active_isa() == Isa::avx2) return avx2::trig_power(theta, z, out);
#endif
  scalar::trig_power(theta, z, out);
}

double influence_sum(std::span<const double> theta, double z, std::span<double> sin_out) {
#if defined(WINFREE_HAVE_AVX2)
  if (active_isa() == Isa::avx2) return avx2::influence_sum(theta, z, sin_out);
#endif
  return scalar::influence_sum(theta, z, sin_out);
}

double weighted_power_sum(std::span<const double> log_base, std::span<const double> weights,
                          double z) {
#if defined(WINFREE_HAVE_AVX2)
  if (active_isa() == Isa::avx2) return avx2::weighted_power_sum(log_base, weights, z);
#endif
  return scalar::weighted_power_sum(log_base, weights, z);
}

void upwind_update(std::span<const double> f, std::span<const double> face_velocity,
                   double ratio, std::span<double> out) {
#if defined(WINFREE_HAVE_AVX2)
  if (active_isa() == Isa::avx2) return avx2::upwind_update(f, face_velocity, ratio, out);
#endif
  scalar::upwind_update(f, face_velocity, ratio, out);
}

}  // namespace winfree::kernels
