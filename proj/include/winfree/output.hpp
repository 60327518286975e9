#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace winfree {

inline constexpr std::string_view kVersion = "0.1.0";

/// 64-bit FNV-1a.
std::uint64_t fnv1a(std::string_view data, std::uint64_t h = 0xcbf29ce484222325ull) noexcept;

/// Shortest round-trip decimal form, "nan" / "inf" / "-inf" for non-finite.
std::string format_double(double x);

using Metadata = std::vector<std::pair<std::string, std::string>>;

/// Comma-separated file with '#'-prefixed metadata lines and one header row.
class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, const Metadata& meta,
            std::initializer_list<std::string_view> columns);

  void row(std::span<const double> values);
  void row(std::initializer_list<double> values) { row(std::span<const double>(values.begin(), values.size())); }
  const std::filesystem::path& path() const noexcept { return path_; }

 private:
  std::filesystem::path path_;
  std::ofstream out_;
  std::size_t ncols_;
  std::string line_;
};

}  // namespace winfree
