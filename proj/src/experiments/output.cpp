#include <charconv>
#include <cmath>

#include "winfree/error.hpp"
#include "winfree/output.hpp"

namespace winfree {

std::uint64_t fnv1a(std::string_view data, std::uint64_t h) noexcept {
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, end);
}

CsvWriter::CsvWriter(const std::filesystem::path& path, const Metadata& meta,
                     std::initializer_list<std::string_view> columns)
    : path_(path), ncols_(columns.size()) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  out_.open(path, std::ios::binary | std::ios::trunc);
  if (!out_) throw Error("cannot open output file " + path.string());
  for (const auto& [k, v] : meta) out_ << "# " << k << ": " << v << '\n';
  bool first = true;
  for (auto c : columns) {
    if (!first) out_ << ',';
    out_ << c;
    first = false;
  }
  out_ << '\n';
}

void CsvWriter::row(std::span<const double> values) {
  if (values.size() != ncols_) throw PreconditionError("CsvWriter: column count mismatch");
  line_.clear();
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) line_ += ',';
    line_ += format_double(values[i]);
  }
  line_ += '\n';
  out_ << line_;
}

}  // namespace winfree
