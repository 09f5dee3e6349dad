#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"

#include "edm/triggers/calimera.hpp"
#include "edm/triggers/ecec.hpp"
#include "edm/triggers/economy_gamma.hpp"
#include "edm/triggers/policy.hpp"
#include "edm/triggers/stopping_rule.hpp"
#include "edm/triggers/teaser.hpp"
#include "edm/triggers/threshold.hpp"

namespace edm {

// Fitting options per model.
struct ThresholdConfig {
  std::optional<double> theta;  // set: skip fitting and use this value
  std::vector<double> grid = unit_grid();
};
struct StoppingRuleConfig {};
struct EconomyGammaConfig {
  std::size_t bins = 5;
};
struct EcecConfig {
  std::vector<double> grid = unit_grid();
};
struct TeaserConfig {
  double quantile = 0.95;
  std::size_t max_v = 5;
};
struct CalimeraConfig {
  double lambda = 1.0;
};

using TriggerConfig = std::variant<ThresholdConfig, StoppingRuleConfig, EconomyGammaConfig,
                                   EcecConfig, TeaserConfig, CalimeraConfig>;

/// Names in the order of TriggerConfig / Trigger alternatives.
inline const std::vector<std::string>& trigger_names() {
  static const std::vector<std::string> names{
      "threshold", "stopping-rule", "economy-gamma", "ecec", "teaser", "calimera"};
  return names;
}

/// Default options for a trigger name; nullopt if unknown.
inline std::optional<TriggerConfig> trigger_config_for(const std::string& name) {
  if (name == "threshold") return ThresholdConfig{};
  if (name == "stopping-rule") return StoppingRuleConfig{};
  if (name == "economy-gamma") return EconomyGammaConfig{};
  if (name == "ecec") return EcecConfig{};
  if (name == "teaser") return TeaserConfig{};
  if (name == "calimera") return CalimeraConfig{};
  return std::nullopt;
}

inline std::string trigger_name(const TriggerConfig& cfg) {
  return trigger_names()[cfg.index()];
}

/// Any fitted trigger model. Immutable; should_trigger is pure.
class Trigger {
 public:
  using State = std::variant<ThresholdState, StoppingRuleState, EconomyGammaState, EcecState,
                             TeaserState, CalimeraState>;

  Trigger(State s) : state_(std::move(s)) {}
  template <class S>
    requires(!std::same_as<std::decay_t<S>, Trigger> && std::constructible_from<State, S>)
  Trigger(S&& s) : state_(std::forward<S>(s)) {}

  const State& state() const noexcept { return state_; }
  std::string name() const { return trigger_names()[state_.index()]; }

  bool should_trigger(const PosteriorHistory& h) const {
    return std::visit([&](const auto& s) { return s.should_trigger(h); }, state_);
  }

  friend bool operator==(const Trigger&, const Trigger&) = default;

 private:
  State state_;
};

static_assert(TriggerPolicy<Trigger>);

inline Trigger fit_trigger(const TriggerConfig& cfg, const ProbabilityCube& cube,
                           const CostMatrices& cost, std::size_t jobs = 1) {
  struct Visitor {
    const ProbabilityCube& cube;
    const CostMatrices& cost;
    std::size_t jobs;

    Trigger operator()(const ThresholdConfig& c) const {
      if (c.theta) {
        detail::check_calibration_cube(cube, cost);
        return ThresholdState{*c.theta, cost.n_timestamps()};
      }
      return fit_threshold(cube, cost, c.grid, jobs);
    }
    Trigger operator()(const StoppingRuleConfig&) const {
      return fit_stopping_rule(cube, cost, jobs);
    }
    Trigger operator()(const EconomyGammaConfig& c) const {
      return fit_economy_gamma(cube, cost, c.bins);
    }
    Trigger operator()(const EcecConfig& c) const { return fit_ecec(cube, cost, c.grid, jobs); }
    Trigger operator()(const TeaserConfig& c) const {
      return fit_teaser(cube, cost, c.quantile, c.max_v, jobs);
    }
    Trigger operator()(const CalimeraConfig& c) const {
      return fit_calimera(cube, cost, c.lambda);
    }
  };
  return std::visit(Visitor{cube, cost, jobs}, cfg);
}

// JSON form of fitted states: {"model": name, ...parameters}. Reals are
// emitted in shortest round-trip form, so from_json(to_json(t)) == t.

inline nlohmann::json matrix_to_json(const Matrix& m) {
  return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", m.data()}};
}

inline Matrix matrix_from_json(const nlohmann::json& j) {
  const auto rows = j.at("rows").get<std::size_t>();
  const auto cols = j.at("cols").get<std::size_t>();
  auto data = j.at("data").get<std::vector<double>>();
  if (data.size() != rows * cols) throw FormatError("matrix data size mismatch");
  return Matrix(rows, cols, std::move(data));
}

inline nlohmann::json trigger_to_json(const Trigger& t) {
  nlohmann::json j;
  j["model"] = t.name();
  std::visit(
      [&](const auto& s) {
        using S = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<S, ThresholdState>) {
          j["theta"] = s.theta;
          j["n_timestamps"] = s.n_timestamps;
        } else if constexpr (std::is_same_v<S, StoppingRuleState>) {
          j["gamma"] = s.gamma;
          j["time_fractions"] = s.time_fractions;
        } else if constexpr (std::is_same_v<S, EconomyGammaState>) {
          j["bins"] = s.bins;
          j["boundaries"] = s.boundaries;
          j["expected_cost"] = s.expected_cost;
          j["delays"] = s.delays;
          auto& tr = j["transitions"] = nlohmann::json::array();
          for (const auto& p : s.transitions) tr.push_back(matrix_to_json(p));
        } else if constexpr (std::is_same_v<S, EcecState>) {
          j["theta"] = s.theta;
          j["reliability"] = matrix_to_json(s.reliability);
        } else if constexpr (std::is_same_v<S, TeaserState>) {
          j["v"] = s.v;
          j["quantile"] = s.quantile;
          auto& env = j["envelopes"] = nlohmann::json::array();
          for (const auto& e : s.envelopes)
            env.push_back({{"mean", e.mean}, {"var", e.var}, {"threshold", e.threshold}});
        } else {
          j["time_fractions"] = s.time_fractions;
          auto& regs = j["regressors"] = nlohmann::json::array();
          for (const auto& r : s.regressors)
            regs.push_back({{"weights", r.weights}, {"intercept", r.intercept}});
        }
      },
      t.state());
  return j;
}

inline Trigger trigger_from_json(const nlohmann::json& j) {
  try {
    const auto model = j.at("model").get<std::string>();
    if (model == "threshold")
      return ThresholdState{j.at("theta").get<double>(), j.at("n_timestamps").get<std::size_t>()};
    if (model == "stopping-rule")
      return StoppingRuleState{j.at("gamma").get<std::array<double, 3>>(),
                               j.at("time_fractions").get<std::vector<double>>()};
    if (model == "economy-gamma") {
      EconomyGammaState s;
      s.bins = j.at("bins").get<std::size_t>();
      s.boundaries = j.at("boundaries").get<std::vector<std::vector<double>>>();
      s.expected_cost = j.at("expected_cost").get<std::vector<std::vector<double>>>();
      s.delays = j.at("delays").get<std::vector<double>>();
      for (const auto& p : j.at("transitions")) s.transitions.push_back(matrix_from_json(p));
      return s;
    }
    if (model == "ecec")
      return EcecState{matrix_from_json(j.at("reliability")), j.at("theta").get<double>()};
    if (model == "teaser") {
      TeaserState s;
      s.v = j.at("v").get<std::size_t>();
      s.quantile = j.at("quantile").get<double>();
      for (const auto& e : j.at("envelopes"))
        s.envelopes.push_back({e.at("mean").get<std::vector<double>>(),
                               e.at("var").get<std::vector<double>>(),
                               e.at("threshold").get<double>()});
      return s;
    }
    if (model == "calimera") {
      CalimeraState s;
      s.time_fractions = j.at("time_fractions").get<std::vector<double>>();
      for (const auto& r : j.at("regressors"))
        s.regressors.push_back(
            {r.at("weights").get<std::vector<double>>(), r.at("intercept").get<double>()});
      return s;
    }
    throw FormatError("unknown trigger model \"" + model + "\"");
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("malformed trigger JSON: ") + e.what());
  }
}

}  // namespace edm
