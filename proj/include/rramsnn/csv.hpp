#pragma once

// Number formatting for the CSV outputs: shortest round-trip decimal form,
// '.' separator regardless of locale.

#include <charconv>
#include <cstdint>
#include <istream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "rramsnn/dataset.hpp"

namespace rramsnn::csv {

inline std::string fmt(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc{}) throw std::runtime_error("csv: number formatting failed");
  return std::string(buf, ptr);
}

inline std::string fmt(std::uint64_t v) { return std::to_string(v); }

inline double to_double(std::string_view s) {
  auto v = detail::parse_double(s);
  if (!v) throw std::runtime_error("csv: bad number '" + std::string(s) + "'");
  return *v;
}

inline std::size_t to_index(std::string_view s) {
  auto v = detail::parse_index(detail::trim(s));
  if (!v) throw std::runtime_error("csv: bad integer '" + std::string(s) + "'");
  return *v;
}

/// Reads a header + rows file; checks the header matches `expected`.
inline std::vector<std::vector<std::string>> read_table(std::istream& in, const std::vector<std::string>& expected) {
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("csv: empty file");
  if (detail::split_fields(line, ',') != expected) throw std::runtime_error("csv: unexpected header '" + line + "'");
  std::vector<std::vector<std::string>> rows;
  while (std::getline(in, line)) {
    if (detail::trim(line).empty()) continue;
    auto f = detail::split_fields(line, ',');
    if (f.size() != expected.size()) throw std::runtime_error("csv: wrong field count in '" + line + "'");
    rows.push_back(std::move(f));
  }
  return rows;
}

}  // namespace rramsnn::csv
