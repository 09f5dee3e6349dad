#pragma once

#include <algorithm>
#include <cstddef>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"

#include "edm/error.hpp"
#include "edm/matrix.hpp"

namespace edm {

/// D(t) = alpha * t / max_T.
struct LinearDelay {
  double alpha = 1.0;
  friend bool operator==(const LinearDelay&, const LinearDelay&) = default;
};

/// One delay value per monitored timestamp.
struct TableDelay {
  std::vector<double> values;
  friend bool operator==(const TableDelay&, const TableDelay&) = default;
};

using DelayCost = std::variant<LinearDelay, TableDelay>;

/// The cost setting every estimator is trained and evaluated against.
///
/// Misclassification costs are indexed [true][predicted]. Timestamps are
/// 1-based prefix lengths; the last one is the full series length max_T, so a
/// forced decision at the end is always defined.
struct CostSpec {
  std::size_t n_classes = 0;
  std::vector<std::size_t> timestamps;
  Matrix misclf;
  DelayCost delay = LinearDelay{};

  std::size_t max_t() const noexcept {
    return timestamps.empty() ? 0 : timestamps.back();
  }

  friend bool operator==(const CostSpec&, const CostSpec&) = default;
};

/// Binary symmetric 0/1 misclassification with a linear delay.
inline CostSpec symmetric_linear_spec(std::size_t n_classes,
                                      std::vector<std::size_t> timestamps,
                                      double alpha) {
  CostSpec spec;
  spec.n_classes = n_classes;
  spec.timestamps = std::move(timestamps);
  spec.misclf = Matrix(n_classes, n_classes, 1.0);
  for (std::size_t c = 0; c < n_classes; ++c) spec.misclf(c, c) = 0.0;
  spec.delay = LinearDelay{alpha};
  return spec;
}

/// Every violated CostSpec invariant, in a fixed order. Empty means valid.
inline std::vector<std::string> validate_spec(const CostSpec& spec) {
  std::vector<std::string> v;
  if (spec.n_classes == 0) v.emplace_back("n_classes must be positive");

  const auto& ts = spec.timestamps;
  if (ts.empty()) {
    v.emplace_back("timestamps empty");
  } else {
    bool increasing = true;
    for (std::size_t k = 1; k < ts.size(); ++k)
      if (ts[k] <= ts[k - 1]) increasing = false;
    if (!increasing) v.emplace_back("timestamps not strictly increasing");
    if (ts.front() < 1) v.emplace_back("timestamp below 1");
    // max_T is the last timestamp; anything above it cannot be a prefix.
    if (std::any_of(ts.begin(), ts.end(), [&](auto t) { return t > ts.back(); }))
      v.emplace_back("timestamp exceeds max_T (the last timestamp)");
  }

  if (spec.misclf.rows() != spec.n_classes ||
      spec.misclf.cols() != spec.n_classes) {
    v.emplace_back("misclassification matrix is not n_classes x n_classes");
  }
  for (double c : spec.misclf.data())
    if (!(c >= 0.0)) {
      v.emplace_back("negative misclassification cost");
      break;
    }

  if (const auto* lin = std::get_if<LinearDelay>(&spec.delay)) {
    if (!(lin->alpha >= 0.0)) v.emplace_back("negative delay alpha");
  } else {
    const auto& vals = std::get<TableDelay>(spec.delay).values;
    if (vals.size() != ts.size())
      v.emplace_back("delay table length differs from timestamps");
    for (double d : vals)
      if (!(d >= 0.0)) {
        v.emplace_back("negative delay cost");
        break;
      }
    for (std::size_t k = 1; k < vals.size(); ++k)
      if (vals[k] < vals[k - 1]) {
        v.emplace_back("delay table decreasing");
        break;
      }
  }
  return v;
}

inline std::string join_violations(const std::vector<std::string>& v) {
  std::string msg;
  for (const auto& s : v) msg += (msg.empty() ? "" : "; ") + s;
  return msg;
}

/// Delay D(t_k) for timestamp index k of a valid spec.
inline double delay_at(const CostSpec& spec, std::size_t k) {
  if (const auto* lin = std::get_if<LinearDelay>(&spec.delay))
    return lin->alpha * (static_cast<double>(spec.timestamps[k]) /
                         static_cast<double>(spec.max_t()));
  return std::get<TableDelay>(spec.delay).values[k];
}

/// Materialized per-timestamp decision costs C_k[y][y_hat] =
/// misclf[y][y_hat] + D(t_k). Immutable once built.
class CostMatrices {
 public:
  const CostSpec& spec() const noexcept { return spec_; }
  std::size_t n_classes() const noexcept { return spec_.n_classes; }
  std::size_t n_timestamps() const noexcept { return spec_.timestamps.size(); }
  const std::vector<std::size_t>& timestamps() const noexcept {
    return spec_.timestamps;
  }
  std::size_t max_t() const noexcept { return spec_.max_t(); }

  const Matrix& table(std::size_t k) const { return tables_.at(k); }
  double delay(std::size_t k) const { return delays_.at(k); }
  double misclf(std::size_t y_true, std::size_t y_pred) const {
    return spec_.misclf(y_true, y_pred);
  }
  /// t_k / max_T.
  double time_fraction(std::size_t k) const {
    return static_cast<double>(spec_.timestamps.at(k)) /
           static_cast<double>(max_t());
  }

  friend CostMatrices build_cost_matrices(CostSpec spec);

 private:
  CostSpec spec_;
  std::vector<double> delays_;
  std::vector<Matrix> tables_;
};

inline CostMatrices build_cost_matrices(CostSpec spec) {
  if (auto violations = validate_spec(spec); !violations.empty())
    throw InvalidSpec(join_violations(violations));
  CostMatrices cm;
  const std::size_t m = spec.timestamps.size();
  const std::size_t c = spec.n_classes;
  cm.delays_.resize(m);
  cm.tables_.reserve(m);
  for (std::size_t k = 0; k < m; ++k) {
    const double d = delay_at(spec, k);
    cm.delays_[k] = d;
    Matrix table(c, c);
    for (std::size_t y = 0; y < c; ++y)
      for (std::size_t p = 0; p < c; ++p) table(y, p) = spec.misclf(y, p) + d;
    cm.tables_.push_back(std::move(table));
  }
  cm.spec_ = std::move(spec);
  return cm;
}

/// C_k[y_true][y_pred], with range checks.
inline double decision_cost(const CostMatrices& cm, std::size_t y_true,
                            std::size_t y_pred, std::size_t k) {
  if (y_true >= cm.n_classes() || y_pred >= cm.n_classes())
    throw IndexOutOfRange("class index outside [0, " +
                          std::to_string(cm.n_classes()) + ")");
  if (k >= cm.n_timestamps())
    throw IndexOutOfRange("timestamp index " + std::to_string(k) +
                          " outside [0, " +
                          std::to_string(cm.n_timestamps()) + ")");
  return cm.table(k)(y_true, y_pred);
}

// JSON document:
//   {"n_classes": C, "timestamps": [...], "misclf": [row-major C*C],
//    "delay": {"kind": "linear", "alpha": a} | {"kind": "table", "values": [...]}}

inline nlohmann::json cost_spec_to_json(const CostSpec& spec) {
  nlohmann::json j;
  j["n_classes"] = spec.n_classes;
  j["timestamps"] = spec.timestamps;
  j["misclf"] = spec.misclf.data();
  if (const auto* lin = std::get_if<LinearDelay>(&spec.delay))
    j["delay"] = {{"kind", "linear"}, {"alpha", lin->alpha}};
  else
    j["delay"] = {{"kind", "table"},
                  {"values", std::get<TableDelay>(spec.delay).values}};
  return j;
}

/// Parses and validates. Structural problems and invariant violations both
/// surface as InvalidSpec.
inline CostSpec cost_spec_from_json(const nlohmann::json& j) {
  CostSpec spec;
  try {
    for (const auto& [key, _] : j.items())
      if (key != "n_classes" && key != "timestamps" && key != "misclf" &&
          key != "delay")
        throw InvalidSpec("unknown cost spec key \"" + key + "\"");
    spec.n_classes = j.at("n_classes").get<std::size_t>();
    spec.timestamps = j.at("timestamps").get<std::vector<std::size_t>>();
    auto flat = j.at("misclf").get<std::vector<double>>();
    if (flat.size() != spec.n_classes * spec.n_classes)
      throw InvalidSpec("misclf must hold n_classes^2 row-major entries");
    spec.misclf = Matrix(spec.n_classes, spec.n_classes, std::move(flat));
    const auto& d = j.at("delay");
    const auto kind = d.at("kind").get<std::string>();
    if (kind == "linear")
      spec.delay = LinearDelay{d.at("alpha").get<double>()};
    else if (kind == "table")
      spec.delay = TableDelay{d.at("values").get<std::vector<double>>()};
    else
      throw InvalidSpec("delay kind must be \"linear\" or \"table\", got \"" +
                        kind + "\"");
  } catch (const nlohmann::json::exception& e) {
    throw InvalidSpec(std::string("malformed cost spec: ") + e.what());
  }
  if (auto violations = validate_spec(spec); !violations.empty())
    throw InvalidSpec(join_violations(violations));
  return spec;
}

}  // namespace edm
