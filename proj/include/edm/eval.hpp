#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "edm/cost_model.hpp"
#include "edm/error.hpp"

namespace edm {

/// One early decision on one series.
struct PredictionOutcome {
  std::size_t predicted_class = 0;
  std::size_t decision_index = 0;  // timestamp index k
  std::size_t decision_time = 0;   // t_k
  std::vector<double> posterior;   // member-k posterior at the decision
  bool forced = false;             // reached the final timestamp without firing

  friend bool operator==(const PredictionOutcome&, const PredictionOutcome&) = default;
};

struct Metrics {
  double avg_cost = 0.0;
  double accuracy = 0.0;
  double earliness = 0.0;
};

/// avg_cost = mean C_{k_i}[y_i][pred_i], accuracy = mean(pred_i == y_i),
/// earliness = mean(t_{k_i} / max_T).
inline Metrics compute_metrics(std::span<const PredictionOutcome> outcomes,
                               std::span<const std::size_t> labels,
                               const CostMatrices& cost) {
  if (outcomes.empty()) throw EmptyInput("no outcomes to score");
  if (outcomes.size() != labels.size())
    throw LengthMismatch(std::to_string(outcomes.size()) + " outcomes vs " +
                         std::to_string(labels.size()) + " labels");
  double cost_sum = 0.0, early_sum = 0.0;
  std::size_t correct = 0;
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    const auto& o = outcomes[i];
    cost_sum += decision_cost(cost, labels[i], o.predicted_class, o.decision_index);
    early_sum += cost.time_fraction(o.decision_index);
    if (o.predicted_class == labels[i]) ++correct;
  }
  const double n = static_cast<double>(outcomes.size());
  return {cost_sum / n, static_cast<double>(correct) / n, early_sum / n};
}

/// Per-instance line of a report.
struct OutcomeRecord {
  std::size_t pred = 0;
  std::size_t truth = 0;
  std::size_t t = 0;
  bool forced = false;
  friend bool operator==(const OutcomeRecord&, const OutcomeRecord&) = default;
};

struct EvaluationReport {
  std::string dataset;
  std::string trigger;
  std::string classifier;
  double avg_cost = 0.0;
  double accuracy = 0.0;
  double earliness = 0.0;
  std::size_t n_test = 0;
  std::uint64_t seed = 0;
  std::string config_digest;
  std::optional<std::size_t> jobs;  // run metadata, not part of the digest
  std::optional<std::vector<OutcomeRecord>> outcomes;

  friend bool operator==(const EvaluationReport&, const EvaluationReport&) = default;
};

/// Canonical JSON text: object keys sorted, two-space indentation, reals
/// with 17 significant digits, integers verbatim. The output is a pure
/// function of the value, so a parse/serialize cycle is byte-stable.
inline void write_canonical(std::string& out, const nlohmann::json& j, int depth = 0) {
  const auto indent = [&](int d) { out.append(static_cast<std::size_t>(2 * d), ' '); };
  switch (j.type()) {
    case nlohmann::json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        break;
      }
      out += "{\n";
      bool first = true;
      for (const auto& [key, value] : j.items()) {  // std::map: sorted keys
        if (!first) out += ",\n";
        first = false;
        indent(depth + 1);
        out += nlohmann::json(key).dump();
        out += ": ";
        write_canonical(out, value, depth + 1);
      }
      out += "\n";
      indent(depth);
      out += "}";
      break;
    }
    case nlohmann::json::value_t::array: {
      if (j.empty()) {
        out += "[]";
        break;
      }
      out += "[\n";
      for (std::size_t i = 0; i < j.size(); ++i) {
        if (i) out += ",\n";
        indent(depth + 1);
        write_canonical(out, j[i], depth + 1);
      }
      out += "\n";
      indent(depth);
      out += "]";
      break;
    }
    case nlohmann::json::value_t::number_float: {
      const double v = j.get<double>();
      if (!std::isfinite(v)) {
        out += "null";
        break;
      }
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.17g", v);
      out += buf;
      break;
    }
    default:
      out += j.dump();
  }
}

inline std::string canonical_json(const nlohmann::json& j) {
  std::string out;
  write_canonical(out, j);
  out += '\n';
  return out;
}

inline nlohmann::json report_to_json(const EvaluationReport& r) {
  nlohmann::json j;
  j["dataset"] = r.dataset;
  j["trigger"] = r.trigger;
  j["classifier"] = r.classifier;
  j["avg_cost"] = r.avg_cost;
  j["accuracy"] = r.accuracy;
  j["earliness"] = r.earliness;
  j["n_test"] = r.n_test;
  j["seed"] = r.seed;
  j["config_digest"] = r.config_digest;
  if (r.jobs) j["jobs"] = *r.jobs;
  if (r.outcomes) {
    auto& arr = j["outcomes"] = nlohmann::json::array();
    for (const auto& o : *r.outcomes)
      arr.push_back({{"pred", o.pred}, {"true", o.truth}, {"t", o.t}, {"forced", o.forced}});
  }
  return j;
}

inline std::string serialize_report(const EvaluationReport& r) {
  return canonical_json(report_to_json(r));
}

inline EvaluationReport parse_report(const std::string& text) {
  try {
    const auto j = nlohmann::json::parse(text);
    EvaluationReport r;
    r.dataset = j.at("dataset").get<std::string>();
    r.trigger = j.at("trigger").get<std::string>();
    r.classifier = j.at("classifier").get<std::string>();
    r.avg_cost = j.at("avg_cost").get<double>();
    r.accuracy = j.at("accuracy").get<double>();
    r.earliness = j.at("earliness").get<double>();
    r.n_test = j.at("n_test").get<std::size_t>();
    r.seed = j.at("seed").get<std::uint64_t>();
    r.config_digest = j.at("config_digest").get<std::string>();
    if (j.contains("jobs")) r.jobs = j.at("jobs").get<std::size_t>();
    if (j.contains("outcomes")) {
      r.outcomes.emplace();
      for (const auto& o : j.at("outcomes"))
        r.outcomes->push_back({o.at("pred").get<std::size_t>(), o.at("true").get<std::size_t>(),
                               o.at("t").get<std::size_t>(), o.at("forced").get<bool>()});
    }
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("malformed report: ") + e.what());
  }
}

}  // namespace edm
