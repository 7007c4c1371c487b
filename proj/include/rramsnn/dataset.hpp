#pragma once

// Tabular classification data: CSV ingestion, min-max scaling and a
// stratified, seeded train/test split.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <istream>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "rramsnn/rng.hpp"

namespace rramsnn {

class DatasetError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Sample {
  std::vector<double> features;
  std::size_t label = 0;
};

struct Dataset {
  std::string name;
  std::vector<Sample> samples;
  std::size_t num_classes = 0;
  std::size_t num_features = 0;
  std::vector<std::string> class_names;

  std::size_t size() const noexcept { return samples.size(); }
  bool empty() const noexcept { return samples.empty(); }

  std::vector<std::size_t> class_counts() const {
    std::vector<std::size_t> counts(num_classes, 0);
    for (const auto& s : samples) ++counts.at(s.label);
    return counts;
  }
};

enum class HeaderMode { Auto, Present, Absent };

/// Column mapping for load_csv. Columns are referenced either by header
/// name or by 0-based index written as a decimal string.
struct CsvSchema {
  std::string label_col;
  std::vector<std::string> feature_cols;  // empty: every column but label/ignored
  std::vector<std::string> ignore_cols;
  HeaderMode header = HeaderMode::Auto;
  std::string missing_marker = "?";
  char delimiter = ',';
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

inline std::vector<std::string> split_fields(std::string_view line, char delim) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    auto pos = line.find(delim, start);
    auto field = trim(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (field.size() >= 2 && field.front() == '"' && field.back() == '"') field = field.substr(1, field.size() - 2);
    out.emplace_back(field);
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

inline std::optional<double> parse_double(std::string_view s) {
  s = trim(s);
  if (s.empty()) return std::nullopt;
  if (s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

inline std::optional<std::size_t> parse_index(std::string_view s) {
  std::size_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

}  // namespace detail

/// Parse CSV text. Rows containing the missing marker (or an unparsable
/// feature) are dropped. Class indices follow the sorted order of the
/// label strings (numeric order when every label is numeric).
inline Dataset parse_csv(std::istream& in, const CsvSchema& schema, std::string name = "csv") {
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (detail::trim(line).empty()) continue;
    rows.push_back(detail::split_fields(line, schema.delimiter));
  }
  if (rows.empty()) throw DatasetError("zero usable rows");

  const std::size_t width = rows.front().size();
  std::vector<std::string> header;
  bool has_header = schema.header == HeaderMode::Present;
  if (schema.header == HeaderMode::Auto) {
    // A header row is one where some column holds a non-numeric token that
    // is also not the label of a numeric-looking data row below it.
    const auto& first = rows.front();
    std::size_t non_numeric = 0;
    for (const auto& f : first)
      if (!detail::parse_double(f) && f != schema.missing_marker) ++non_numeric;
    std::size_t second_non_numeric = non_numeric;
    if (rows.size() > 1) {
      second_non_numeric = 0;
      for (const auto& f : rows[1])
        if (!detail::parse_double(f) && f != schema.missing_marker) ++second_non_numeric;
    }
    has_header = non_numeric > second_non_numeric || (rows.size() == 1 && non_numeric == width);
    if (!has_header && schema.label_col.size() && !detail::parse_index(schema.label_col)) {
      // Label referenced by name: the first row must be the header.
      has_header = true;
    }
  }
  if (has_header) {
    header = rows.front();
    rows.erase(rows.begin());
  }

  auto resolve = [&](const std::string& ref) -> std::optional<std::size_t> {
    if (!header.empty()) {
      auto it = std::find(header.begin(), header.end(), ref);
      if (it != header.end()) return static_cast<std::size_t>(it - header.begin());
    }
    if (auto idx = detail::parse_index(ref); idx && *idx < width) return idx;
    return std::nullopt;
  };

  if (schema.label_col.empty()) throw DatasetError("label column absent: no label column given");
  const auto label_idx = resolve(schema.label_col);
  if (!label_idx) throw DatasetError("label column absent: '" + schema.label_col + "'");

  std::vector<std::size_t> ignored;
  for (const auto& c : schema.ignore_cols) {
    auto idx = resolve(c);
    if (!idx) throw DatasetError("unknown column '" + c + "'");
    ignored.push_back(*idx);
  }
  std::vector<std::size_t> feature_idx;
  if (schema.feature_cols.empty()) {
    for (std::size_t c = 0; c < width; ++c)
      if (c != *label_idx && std::find(ignored.begin(), ignored.end(), c) == ignored.end()) feature_idx.push_back(c);
  } else {
    for (const auto& c : schema.feature_cols) {
      auto idx = resolve(c);
      if (!idx) throw DatasetError("unknown feature column '" + c + "'");
      feature_idx.push_back(*idx);
    }
  }
  if (feature_idx.empty()) throw DatasetError("no feature columns");

  struct RawRow {
    std::vector<double> x;
    std::string label;
  };
  std::vector<RawRow> usable;
  for (const auto& row : rows) {
    if (row.size() != width) continue;
    const auto& lab = row[*label_idx];
    if (lab.empty() || lab == schema.missing_marker) continue;
    RawRow r;
    r.label = lab;
    bool ok = true;
    for (auto c : feature_idx) {
      if (row[c] == schema.missing_marker) { ok = false; break; }
      auto v = detail::parse_double(row[c]);
      if (!v) { ok = false; break; }
      r.x.push_back(*v);
    }
    if (ok) usable.push_back(std::move(r));
  }
  if (usable.empty()) throw DatasetError("zero usable rows");

  std::vector<std::string> labels;
  for (const auto& r : usable) labels.push_back(r.label);
  std::sort(labels.begin(), labels.end());
  labels.erase(std::unique(labels.begin(), labels.end()), labels.end());
  const bool numeric_labels = std::all_of(labels.begin(), labels.end(),
                                          [](const std::string& s) { return detail::parse_double(s).has_value(); });
  if (numeric_labels) {
    std::stable_sort(labels.begin(), labels.end(), [](const std::string& a, const std::string& b) {
      return *detail::parse_double(a) < *detail::parse_double(b);
    });
  }
  std::map<std::string, std::size_t> class_of;
  for (std::size_t i = 0; i < labels.size(); ++i) class_of[labels[i]] = i;

  Dataset d;
  d.name = std::move(name);
  d.num_classes = labels.size();
  d.num_features = feature_idx.size();
  d.class_names = labels;
  d.samples.reserve(usable.size());
  for (auto& r : usable) d.samples.push_back(Sample{std::move(r.x), class_of.at(r.label)});
  return d;
}

inline Dataset load_csv(const std::string& path, const CsvSchema& schema) {
  std::ifstream in(path);
  if (!in) throw DatasetError("unreadable file: " + path);
  auto name = path.substr(path.find_last_of("/\\") == std::string::npos ? 0 : path.find_last_of("/\\") + 1);
  return parse_csv(in, schema, name);
}

/// Per-feature min-max scaling onto [0, 1]; constant features map to 0.5.
inline Dataset normalize(Dataset d) {
  if (d.empty()) return d;
  for (std::size_t f = 0; f < d.num_features; ++f) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (const auto& s : d.samples) {
      lo = std::min(lo, s.features[f]);
      hi = std::max(hi, s.features[f]);
    }
    const double span = hi - lo;
    for (auto& s : d.samples) {
      double& x = s.features[f];
      x = span > 0.0 ? std::clamp((x - lo) / span, 0.0, 1.0) : 0.5;
    }
  }
  return d;
}

/// Stratified split. Each class contributes round(fraction * count) samples
/// to the first partition; both partitions keep the input order.
inline std::pair<Dataset, Dataset> split(const Dataset& d, double train_fraction, std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0))
    throw DatasetError("train fraction must lie in (0, 1)");
  Rng rng(seed);
  std::vector<std::vector<std::size_t>> by_class(d.num_classes);
  for (std::size_t i = 0; i < d.samples.size(); ++i) by_class.at(d.samples[i].label).push_back(i);

  std::vector<char> in_train(d.samples.size(), 0);
  for (std::size_t c = 0; c < d.num_classes; ++c) {
    auto& idx = by_class[c];
    const auto n_train = static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(idx.size())));
    if (n_train == 0 || n_train >= idx.size())
      throw DatasetError("split leaves class " + std::to_string(c) + " empty on one side");
    std::shuffle(idx.begin(), idx.end(), rng);
    for (std::size_t k = 0; k < n_train; ++k) in_train[idx[k]] = 1;
  }

  Dataset train{d.name + ":train", {}, d.num_classes, d.num_features, d.class_names};
  Dataset test{d.name + ":test", {}, d.num_classes, d.num_features, d.class_names};
  for (std::size_t i = 0; i < d.samples.size(); ++i)
    (in_train[i] ? train : test).samples.push_back(d.samples[i]);
  return {std::move(train), std::move(test)};
}

}  // namespace rramsnn
