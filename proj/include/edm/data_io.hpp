#pragma once

#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "edm/error.hpp"
#include "edm/matrix.hpp"
#include "edm/rng.hpp"

namespace edm {

/// Labeled matrix of equal-length univariate series.
struct TimeSeriesDataset {
  std::string name;
  Matrix values;                     // n x L
  std::vector<std::size_t> labels;   // class indices
  std::map<std::string, std::size_t> label_map;  // token -> class index

  std::size_t size() const noexcept { return values.rows(); }
  std::size_t length() const noexcept { return values.cols(); }
  std::size_t n_classes() const noexcept { return label_map.size(); }

  /// Inverse of label_map.
  std::vector<std::string> label_tokens() const {
    std::vector<std::string> tokens(label_map.size());
    for (const auto& [tok, idx] : label_map) tokens[idx] = tok;
    return tokens;
  }

  TimeSeriesDataset subset(std::span<const std::size_t> idx) const {
    TimeSeriesDataset out;
    out.name = name;
    out.values = values.select_rows(idx);
    out.labels.reserve(idx.size());
    for (auto i : idx) out.labels.push_back(labels[i]);
    out.label_map = label_map;
    return out;
  }

  friend bool operator==(const TimeSeriesDataset&,
                         const TimeSeriesDataset&) = default;
};

namespace detail {

inline std::vector<std::string_view> split_fields(std::string_view line,
                                                  char delim) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(delim, start);
    out.push_back(line.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

inline bool parse_real(std::string_view s, double& out) {
  s = trim(s);
  if (s.empty()) return false;
  if (s.front() == '+') s.remove_prefix(1);
  const auto* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, out);
  return ec == std::errc{} && ptr == end;
}

inline std::string format_real(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace detail

/// Parses UCR text: one series per line, `label<TAB>v1<TAB>...<TAB>vL`.
/// Comma is accepted as the delimiter when the first line has no TAB. Labels
/// are mapped to class indices in lexicographic order of their tokens.
inline TimeSeriesDataset parse_ucr(std::istream& in, std::string name) {
  std::vector<std::string> tokens;
  std::vector<double> values;
  std::size_t length = 0;
  char delim = '\t';
  std::size_t line_no = 0;
  std::size_t rows = 0;

  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    const auto trimmed = detail::trim(line);
    if (trimmed.empty()) continue;
    if (rows == 0 && trimmed.find('\t') == std::string_view::npos &&
        trimmed.find(',') != std::string_view::npos)
      delim = ',';
    const auto fields = detail::split_fields(trimmed, delim);
    if (fields.size() < 2)
      throw ParseError(line_no, "expected a label followed by values");
    const auto len = fields.size() - 1;
    if (rows == 0) {
      length = len;
    } else if (len != length) {
      throw RaggedLengths("line " + std::to_string(line_no) + " has " +
                          std::to_string(len) + " values, expected " +
                          std::to_string(length));
    }
    const auto label = detail::trim(fields[0]);
    if (label.empty()) throw ParseError(line_no, "empty label");
    tokens.emplace_back(label);
    for (std::size_t j = 1; j < fields.size(); ++j) {
      double v = 0.0;
      if (!detail::parse_real(fields[j], v))
        throw ParseError(line_no, "value " + std::to_string(j) +
                                      " is not a real: \"" +
                                      std::string(fields[j]) + "\"");
      values.push_back(v);
    }
    ++rows;
  }
  if (rows == 0) throw EmptyFile(name.empty() ? "no series" : name);
  if (length < 2)
    throw ParseError(1, "series must have at least 2 values");

  TimeSeriesDataset ds;
  ds.name = std::move(name);
  ds.values = Matrix(rows, length, std::move(values));
  const std::set<std::string> distinct(tokens.begin(), tokens.end());
  std::size_t idx = 0;
  for (const auto& t : distinct) ds.label_map[t] = idx++;
  ds.labels.reserve(rows);
  for (const auto& t : tokens) ds.labels.push_back(ds.label_map.at(t));
  return ds;
}

inline TimeSeriesDataset load_ucr_tsv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  try {
    return parse_ucr(in, path.stem().string());
  } catch (const EmptyFile&) {
    throw EmptyFile(path.string());
  }
}

/// Writes the dataset in UCR TSV form with 17 significant digits, so a load
/// of the output reproduces every value exactly.
inline void write_ucr_tsv(std::ostream& out, const TimeSeriesDataset& ds) {
  const auto tokens = ds.label_tokens();
  for (std::size_t i = 0; i < ds.size(); ++i) {
    out << tokens[ds.labels[i]];
    for (double v : ds.values.row(i)) out << '\t' << detail::format_real(v);
    out << '\n';
  }
}

inline void save_ucr_tsv(const std::filesystem::path& path,
                         const TimeSeriesDataset& ds) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  write_ucr_tsv(out, ds);
  if (!out) throw IoError("write failed for " + path.string());
}

/// Re-indexes labels through another label map (test data through the
/// training map), so class indices agree between the two files.
inline TimeSeriesDataset align_labels(TimeSeriesDataset ds,
                                      const std::map<std::string, std::size_t>& label_map) {
  const auto tokens = ds.label_tokens();
  for (auto& y : ds.labels) {
    const auto it = label_map.find(tokens[y]);
    if (it == label_map.end())
      throw UnknownLabel("label \"" + tokens[y] + "\" does not occur in the reference labels");
    y = it->second;
  }
  ds.label_map = label_map;
  return ds;
}

/// Zero mean, unit population standard deviation, in place on one series.
/// Series with std below 1e-8 become all zeros.
inline void z_normalize_series(std::span<double> x) {
  if (x.empty()) return;
  const double n = static_cast<double>(x.size());
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= n;
  double var = 0.0;
  for (double v : x) var += (v - mean) * (v - mean);
  const double sd = std::sqrt(var / n);
  if (sd < 1e-8) {
    std::fill(x.begin(), x.end(), 0.0);
    return;
  }
  for (double& v : x) v = (v - mean) / sd;
}

inline TimeSeriesDataset z_normalize(TimeSeriesDataset ds) {
  for (std::size_t i = 0; i < ds.size(); ++i)
    z_normalize_series(ds.values.row(i));
  return ds;
}

struct SyntheticParams {
  std::size_t n_per_class = 50;
  std::size_t length = 100;
  std::size_t t_star = 40;  // 1-based: columns t_star..L carry the gap
  double gap = 3.0;
  double noise_sd = 1.0;
};

/// Two-class step data. Every value is N(0, noise_sd^2) noise; from time
/// t_star on (1-based), class 1 is shifted by +gap. Rows alternate 0,1,0,1...
/// and value (i, j) is drawn from the stream split(i) of the seed, so data is
/// a pure function of (params, seed).
inline TimeSeriesDataset make_synthetic(const SyntheticParams& p,
                                        std::uint64_t seed) {
  if (p.n_per_class < 1) throw InvalidParam("n_per_class must be >= 1");
  if (p.length < 2) throw InvalidParam("length must be >= 2");
  if (p.t_star < 1 || p.t_star > p.length)
    throw InvalidParam("t_star must lie in [1, length]");
  if (!(p.noise_sd > 0.0)) throw InvalidParam("noise_sd must be > 0");
  if (!std::isfinite(p.gap)) throw InvalidParam("gap must be finite");

  const std::size_t n = 2 * p.n_per_class;
  TimeSeriesDataset ds;
  ds.name = "synthetic";
  ds.values = Matrix(n, p.length);
  ds.labels.resize(n);
  ds.label_map = {{"0", 0}, {"1", 1}};
  const SplitMix64 root(seed);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t label = i % 2;
    ds.labels[i] = label;
    auto rng = root.split(i);
    auto row = ds.values.row(i);
    for (std::size_t j = 0; j < p.length; ++j) {
      const double shift = (label == 1 && j + 1 >= p.t_star) ? p.gap : 0.0;
      row[j] = shift + p.noise_sd * rng.normal();
    }
  }
  return ds;
}

/// k disjoint, sorted index sets covering [0, n). Within each class (in class
/// order) the member indices are shuffled by the class's own split stream and
/// dealt round-robin, continuing the dealing position across classes, so
/// per-class and total fold sizes each differ by at most one.
inline std::vector<std::vector<std::size_t>> stratified_kfold(
    std::span<const std::size_t> labels, std::size_t k, std::uint64_t seed) {
  if (k < 2) throw InvalidParam("fold count must be >= 2");
  std::map<std::size_t, std::vector<std::size_t>> by_class;
  for (std::size_t i = 0; i < labels.size(); ++i)
    by_class[labels[i]].push_back(i);
  for (const auto& [c, members] : by_class)
    if (members.size() < k)
      throw TooFewPerClass("class " + std::to_string(c) + " has " +
                           std::to_string(members.size()) +
                           " members, fewer than " + std::to_string(k) +
                           " folds");

  std::vector<std::vector<std::size_t>> folds(k);
  const SplitMix64 root(seed);
  std::size_t deal = 0;
  for (auto& [c, members] : by_class) {
    auto rng = root.split(c);
    rng.shuffle(members);
    for (auto idx : members) folds[deal++ % k].push_back(idx);
  }
  for (auto& f : folds) std::sort(f.begin(), f.end());
  return folds;
}

/// m = min(count, L) prefix lengths ceil(i * L / m), i = 1..m.
inline std::vector<std::size_t> default_timestamps(std::size_t length,
                                                   std::size_t count) {
  if (count < 1) throw InvalidParam("timestamp count must be >= 1");
  const std::size_t m = std::min(count, length);
  std::vector<std::size_t> ts;
  ts.reserve(m);
  for (std::size_t i = 1; i <= m; ++i) {
    const std::size_t t = (i * length + m - 1) / m;
    if (ts.empty() || ts.back() != t) ts.push_back(t);
  }
  return ts;
}

}  // namespace edm
