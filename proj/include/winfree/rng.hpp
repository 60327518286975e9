#pragma once

#include <array>
#include <cstdint>
#include <string_view>

namespace winfree {

/// Philox4x32-10 counter-based generator (Salmon et al. 2011).
/// Stream `stream` of key `seed` is reproducible and independent of thread
/// scheduling.
class Philox {
 public:
  using result_type = std::uint32_t;
  static constexpr std::string_view name = "philox4x32-10";

  explicit Philox(std::uint64_t seed, std::uint64_t stream = 0) noexcept;

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return 0xffffffffu; }

  result_type operator()() noexcept;
  std::uint64_t next_u64() noexcept;
  /// Uniform on [0, 1) with 53 random bits.
  double uniform() noexcept;
  /// Uniform on (0, 1].
  double uniform_pos() noexcept;
  /// Standard normal via Box-Muller; the second variate is cached.
  double normal() noexcept;

  /// The raw block function, exposed for known-answer tests.
  static std::array<std::uint32_t, 4> block(std::array<std::uint32_t, 4> ctr,
                                            std::array<std::uint32_t, 2> key) noexcept;

 private:
  void refill() noexcept;

  std::array<std::uint32_t, 2> key_;
  std::array<std::uint32_t, 4> ctr_{};
  std::array<std::uint32_t, 4> buf_{};
  int pos_ = 4;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace winfree
