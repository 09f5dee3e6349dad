#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "edm/collection.hpp"
#include "edm/cost_model.hpp"
#include "edm/eval.hpp"
#include "edm/triggers/trigger.hpp"

namespace edm {

/// Unveils the series one monitored timestamp at a time: member k sees only
/// the first t_k values, its posterior joins the history, and the policy
/// decides. The first firing (or the final timestamp) is the decision.
template <TriggerPolicy P>
PredictionOutcome predict_early(const ClassifiersCollection& coll, const P& policy,
                                std::span<const double> series) {
  const std::size_t m = coll.size();
  if (m == 0) throw InvalidParam("empty collection");
  if (series.size() != coll.timestamps.back())
    throw LengthMismatch("series length " + std::to_string(series.size()) +
                         " vs max_T " + std::to_string(coll.timestamps.back()));
  const std::size_t c = coll.n_classes;
  std::vector<double> history;
  history.reserve(m * c);
  for (std::size_t k = 0; k < m; ++k) {
    const auto p = coll.members[k]->posterior(series.first(coll.timestamps[k]));
    history.insert(history.end(), p.begin(), p.end());
    const bool final = k + 1 == m;
    if (final || policy.should_trigger(PosteriorHistory(history.data(), k + 1, c))) {
      PredictionOutcome o;
      o.predicted_class = argmax(p);
      o.decision_index = k;
      o.decision_time = coll.timestamps[k];
      o.posterior = p;
      o.forced = final;
      return o;
    }
  }
  throw std::logic_error("unreachable: final timestamp always decides");
}

/// Collection + fitted trigger + cost setting.
struct EarlyClassifierPipeline {
  ClassifiersCollection collection;
  Trigger trigger;
  CostMatrices cost;
  bool prefit = false;
};

struct PipelineOptions {
  std::size_t folds = 5;
  std::uint64_t seed = 0;
  std::size_t jobs = 1;
  /// Set to reuse an already fitted collection; then `calibration_cube` is
  /// required as well.
  std::optional<ClassifiersCollection> prefit_collection;
  std::optional<ProbabilityCube> calibration_cube;
};

/// Out-of-fold calibration cube, trigger fit on it, then the collection refit
/// on the full training set.
inline EarlyClassifierPipeline fit_pipeline(const TimeSeriesDataset& train,
                                            const CostMatrices& cost,
                                            const ClassifierTrainer& trainer,
                                            std::string classifier_name,
                                            const TriggerConfig& trigger_cfg,
                                            PipelineOptions opts = {}) {
  if (train.length() != cost.max_t())
    throw TimestampMismatch("series length " + std::to_string(train.length()) +
                            " vs cost max_T " + std::to_string(cost.max_t()));
  if (train.n_classes() != cost.n_classes())
    throw TimestampMismatch("dataset has " + std::to_string(train.n_classes()) +
                            " classes, cost setting has " + std::to_string(cost.n_classes()));
  const auto& ts = cost.timestamps();

  if (opts.prefit_collection) {
    if (!opts.calibration_cube)
      throw MissingCalibrationCube("a prefit collection needs a caller-supplied calibration cube");
    if (opts.prefit_collection->timestamps != ts)
      throw TimestampMismatch("prefit collection timestamps differ from the cost setting");
    auto trigger = fit_trigger(trigger_cfg, *opts.calibration_cube, cost, opts.jobs);
    return {std::move(*opts.prefit_collection), std::move(trigger), cost, true};
  }

  const auto cube = opts.calibration_cube
                        ? *opts.calibration_cube
                        : out_of_fold_cube(train, ts, trainer, opts.folds, opts.seed, opts.jobs);
  auto trigger = fit_trigger(trigger_cfg, cube, cost, opts.jobs);
  auto coll = fit_collection(train, ts, trainer, std::move(classifier_name), opts.jobs);
  return {std::move(coll), std::move(trigger), cost, false};
}

inline EarlyClassifierPipeline fit_pipeline(const TimeSeriesDataset& train,
                                            const CostMatrices& cost,
                                            const ClassifierConfig& base,
                                            const TriggerConfig& trigger_cfg,
                                            PipelineOptions opts = {}) {
  return fit_pipeline(train, cost, make_trainer(base), classifier_name(base), trigger_cfg,
                      std::move(opts));
}

inline PredictionOutcome predict_early(const EarlyClassifierPipeline& p,
                                       std::span<const double> series) {
  return predict_early(p.collection, p.trigger, series);
}

/// Runs predict_early on every test series (concurrently; order preserved)
/// and fills the metric part of a report.
template <TriggerPolicy P>
EvaluationReport score(const ClassifiersCollection& coll, const P& policy,
                       const CostMatrices& cost, const TimeSeriesDataset& test,
                       std::size_t jobs = 1) {
  if (test.size() == 0) throw EmptyInput("empty test set");
  if (test.length() != cost.max_t())
    throw LengthMismatch("test length " + std::to_string(test.length()) + " vs max_T " +
                         std::to_string(cost.max_t()));
  std::vector<PredictionOutcome> outcomes(test.size());
  parallel_for(test.size(), jobs,
               [&](std::size_t i) { outcomes[i] = predict_early(coll, policy, test.values.row(i)); });
  const auto metrics = compute_metrics(outcomes, test.labels, cost);

  EvaluationReport r;
  r.dataset = test.name;
  r.classifier = coll.base_name;
  r.avg_cost = metrics.avg_cost;
  r.accuracy = metrics.accuracy;
  r.earliness = metrics.earliness;
  r.n_test = test.size();
  r.outcomes.emplace();
  for (std::size_t i = 0; i < test.size(); ++i)
    r.outcomes->push_back({outcomes[i].predicted_class, test.labels[i],
                           outcomes[i].decision_time, outcomes[i].forced});
  return r;
}

inline EvaluationReport score(const EarlyClassifierPipeline& p, const TimeSeriesDataset& test,
                              std::size_t jobs = 1) {
  auto r = score(p.collection, p.trigger, p.cost, test, jobs);
  r.trigger = p.trigger.name();
  return r;
}

// Blob layout: "EDMP1", prefit flag, cost spec JSON, embedded "EDMC1"
// collection, trigger JSON.
inline constexpr std::string_view kPipelineMagic = "EDMP1";

inline std::string serialize_pipeline(const EarlyClassifierPipeline& p) {
  BinaryWriter w;
  w.magic(kPipelineMagic);
  w.u64(p.prefit ? 1 : 0);
  w.str(cost_spec_to_json(p.cost.spec()).dump());
  save_collection(w, p.collection);
  w.str(trigger_to_json(p.trigger).dump());
  return std::move(w).take();
}

inline EarlyClassifierPipeline deserialize_pipeline(std::string_view bytes) {
  BinaryReader r(bytes);
  r.expect_magic(kPipelineMagic);
  const bool prefit = r.u64() != 0;
  nlohmann::json cost_json;
  try {
    cost_json = nlohmann::json::parse(r.str());
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("pipeline cost spec: ") + e.what());
  }
  auto cost = build_cost_matrices(cost_spec_from_json(cost_json));
  auto coll = load_collection(r);
  nlohmann::json trig;
  try {
    trig = nlohmann::json::parse(r.str());
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("pipeline trigger: ") + e.what());
  }
  auto trigger = trigger_from_json(trig);
  if (!r.at_end()) throw FormatError("trailing bytes after pipeline");
  return {std::move(coll), std::move(trigger), std::move(cost), prefit};
}

}  // namespace edm
