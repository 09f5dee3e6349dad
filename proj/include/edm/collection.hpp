#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "edm/classifier.hpp"
#include "edm/data_io.hpp"
#include "edm/knn.hpp"
#include "edm/logistic.hpp"
#include "edm/parallel.hpp"

namespace edm {

using ClassifierConfig = std::variant<KnnConfig, LogisticConfig>;

inline ClassifierTrainer make_trainer(const ClassifierConfig& cfg) {
  return std::visit(
      [](const auto& c) -> ClassifierTrainer {
        if constexpr (std::is_same_v<std::decay_t<decltype(c)>, KnnConfig>)
          return KnnClassifier::trainer(c);
        else
          return LogisticClassifier::trainer(c);
      },
      cfg);
}

inline std::string classifier_name(const ClassifierConfig& cfg) {
  return std::holds_alternative<KnnConfig>(cfg) ? KnnClassifier::kTag
                                                : LogisticClassifier::kTag;
}

/// One fitted classifier per monitored timestamp; member k only ever saw
/// prefixes of length timestamps[k]. Immutable and cheap to copy (members
/// are shared).
struct ClassifiersCollection {
  std::vector<std::size_t> timestamps;
  std::vector<ClassifierPtr> members;
  std::size_t n_classes = 0;
  std::string base_name;

  std::size_t size() const noexcept { return members.size(); }
};

namespace detail {

inline void check_timestamps(std::span<const std::size_t> ts, std::size_t length) {
  if (ts.empty()) throw InvalidParam("timestamps empty");
  for (std::size_t k = 0; k < ts.size(); ++k) {
    if (ts[k] < 1 || ts[k] > length)
      throw InvalidParam("timestamp " + std::to_string(ts[k]) +
                         " outside [1, " + std::to_string(length) + "]");
    if (k > 0 && ts[k] <= ts[k - 1])
      throw InvalidParam("timestamps not strictly increasing");
  }
}

template <class F>
decltype(auto) annotate_timestamp(std::size_t t, F&& f) {
  try {
    return f();
  } catch (Error& e) {
    e.add_context("timestamp " + std::to_string(t));
    throw;
  }
}

}  // namespace detail

/// Trains member k on ds.values truncated to timestamps[k] columns. Members
/// are independent and may be trained concurrently; the result does not
/// depend on `jobs`.
inline ClassifiersCollection fit_collection(const TimeSeriesDataset& ds,
                                            std::span<const std::size_t> timestamps,
                                            const ClassifierTrainer& trainer,
                                            std::string base_name = "custom",
                                            std::size_t jobs = 1) {
  detail::check_timestamps(timestamps, ds.length());
  ClassifiersCollection coll;
  coll.timestamps.assign(timestamps.begin(), timestamps.end());
  coll.n_classes = ds.n_classes();
  coll.base_name = std::move(base_name);
  coll.members.resize(timestamps.size());
  parallel_for(timestamps.size(), jobs, [&](std::size_t k) {
    const auto t = timestamps[k];
    coll.members[k] = detail::annotate_timestamp(t, [&] {
      return trainer(ds.values.truncated(t), ds.labels, coll.n_classes);
    });
  });
  return coll;
}

inline ClassifiersCollection fit_collection(const TimeSeriesDataset& ds,
                                            std::span<const std::size_t> timestamps,
                                            const ClassifierConfig& cfg,
                                            std::size_t jobs = 1) {
  return fit_collection(ds, timestamps, make_trainer(cfg), classifier_name(cfg), jobs);
}

/// Member-k posteriors for every row. Columns beyond timestamps[k] are
/// ignored.
inline Matrix predict_proba_at(const ClassifiersCollection& coll,
                               const Matrix& prefixes, std::size_t k) {
  if (k >= coll.size())
    throw IndexOutOfRange("timestamp index " + std::to_string(k));
  const auto t = coll.timestamps[k];
  if (prefixes.cols() < t)
    throw PrefixTooShort("prefix length " + std::to_string(prefixes.cols()) +
                         " < timestamp " + std::to_string(t));
  Matrix out(prefixes.rows(), coll.n_classes);
  for (std::size_t i = 0; i < prefixes.rows(); ++i) {
    const auto p = coll.members[k]->posterior(prefixes.row(i).first(t));
    std::copy(p.begin(), p.end(), out.row(i).begin());
  }
  return out;
}

/// Accuracy of member k's argmax on the test set.
inline double score_at(const ClassifiersCollection& coll,
                       const TimeSeriesDataset& test, std::size_t k) {
  const auto proba = predict_proba_at(coll, test.values, k);
  if (test.size() == 0) throw EmptyInput("empty test set");
  std::size_t correct = 0;
  for (std::size_t i = 0; i < test.size(); ++i)
    if (argmax(proba.row(i)) == test.labels[i]) ++correct;
  return static_cast<double>(correct) / static_cast<double>(test.size());
}

/// Read-only view over the posteriors of one series at timestamp indices
/// 0..size()-1. The last entry is the current timestamp.
class PosteriorHistory {
 public:
  PosteriorHistory(const double* data, std::size_t steps, std::size_t n_classes)
      : data_(data), steps_(steps), n_classes_(n_classes) {}

  std::size_t size() const noexcept { return steps_; }
  std::size_t n_classes() const noexcept { return n_classes_; }
  std::span<const double> operator[](std::size_t j) const noexcept {
    return {data_ + j * n_classes_, n_classes_};
  }
  std::span<const double> back() const noexcept { return (*this)[steps_ - 1]; }
  /// Index of the current timestamp.
  std::size_t current() const noexcept { return steps_ - 1; }

 private:
  const double* data_;
  std::size_t steps_;
  std::size_t n_classes_;
};

enum class Provenance { out_of_fold, resubstitution };

/// Calibration posteriors, n series x m timestamps x C classes.
struct ProbabilityCube {
  std::size_t n = 0, m = 0, n_classes = 0;
  std::vector<double> values;
  std::vector<std::size_t> labels;
  Provenance provenance = Provenance::out_of_fold;

  ProbabilityCube() = default;
  ProbabilityCube(std::size_t n_, std::size_t m_, std::size_t c_)
      : n(n_), m(m_), n_classes(c_), values(n_ * m_ * c_, 0.0), labels(n_, 0) {}

  std::span<double> at(std::size_t i, std::size_t k) noexcept {
    return {values.data() + (i * m + k) * n_classes, n_classes};
  }
  std::span<const double> at(std::size_t i, std::size_t k) const noexcept {
    return {values.data() + (i * m + k) * n_classes, n_classes};
  }
  /// Posteriors of series i at timestamp indices 0..k.
  PosteriorHistory history(std::size_t i, std::size_t k) const noexcept {
    return {values.data() + i * m * n_classes, k + 1, n_classes};
  }

  friend bool operator==(const ProbabilityCube&, const ProbabilityCube&) = default;
};

/// Posteriors of a fitted collection on the series it was trained on.
inline ProbabilityCube resubstitution_cube(const ClassifiersCollection& coll,
                                           const TimeSeriesDataset& ds,
                                           std::size_t jobs = 1) {
  ProbabilityCube cube(ds.size(), coll.size(), coll.n_classes);
  cube.labels = ds.labels;
  cube.provenance = Provenance::resubstitution;
  parallel_for(coll.size(), jobs, [&](std::size_t k) {
    const auto proba = predict_proba_at(coll, ds.values, k);
    for (std::size_t i = 0; i < ds.size(); ++i)
      std::copy(proba.row(i).begin(), proba.row(i).end(), cube.at(i, k).begin());
  });
  return cube;
}

/// Stratified k-fold calibration cube: every posterior comes from a member
/// trained on the other folds only. (fold, timestamp) fits run concurrently.
inline ProbabilityCube out_of_fold_cube(const TimeSeriesDataset& ds,
                                        std::span<const std::size_t> timestamps,
                                        const ClassifierTrainer& trainer,
                                        std::size_t folds, std::uint64_t seed,
                                        std::size_t jobs = 1) {
  detail::check_timestamps(timestamps, ds.length());
  const auto fold_sets = stratified_kfold(ds.labels, folds, seed);
  const std::size_t m = timestamps.size();
  ProbabilityCube cube(ds.size(), m, ds.n_classes());
  cube.labels = ds.labels;
  cube.provenance = Provenance::out_of_fold;

  std::vector<TimeSeriesDataset> train_parts(folds);
  std::vector<std::size_t> fold_of(ds.size());
  for (std::size_t f = 0; f < folds; ++f) {
    for (auto i : fold_sets[f]) fold_of[i] = f;
  }
  for (std::size_t f = 0; f < folds; ++f) {
    std::vector<std::size_t> complement;
    for (std::size_t i = 0; i < ds.size(); ++i)
      if (fold_of[i] != f) complement.push_back(i);
    train_parts[f] = ds.subset(complement);
  }

  parallel_for(folds * m, jobs, [&](std::size_t task) {
    const std::size_t f = task / m, k = task % m;
    const auto t = timestamps[k];
    const auto& part = train_parts[f];
    const auto model = detail::annotate_timestamp(t, [&] {
      return trainer(part.values.truncated(t), part.labels, ds.n_classes());
    });
    for (auto i : fold_sets[f]) {
      const auto p = model->posterior(ds.values.row(i).first(t));
      std::copy(p.begin(), p.end(), cube.at(i, k).begin());
    }
  });
  return cube;
}

inline ProbabilityCube out_of_fold_cube(const TimeSeriesDataset& ds,
                                        std::span<const std::size_t> timestamps,
                                        const ClassifierConfig& cfg,
                                        std::size_t folds, std::uint64_t seed,
                                        std::size_t jobs = 1) {
  return out_of_fold_cube(ds, timestamps, make_trainer(cfg), folds, seed, jobs);
}

// Blob layout: "EDMC1", n_classes, base_name, timestamps, then one
// (tag, payload) record per member.
inline constexpr std::string_view kCollectionMagic = "EDMC1";

inline void save_collection(BinaryWriter& w, const ClassifiersCollection& coll) {
  w.magic(kCollectionMagic);
  w.u64(coll.n_classes);
  w.str(coll.base_name);
  w.u64s(coll.timestamps);
  for (const auto& member : coll.members) {
    w.str(member->tag());
    member->save(w);
  }
}

inline std::string serialize_collection(const ClassifiersCollection& coll) {
  BinaryWriter w;
  save_collection(w, coll);
  return std::move(w).take();
}

inline ClassifiersCollection load_collection(BinaryReader& r) {
  r.expect_magic(kCollectionMagic);
  ClassifiersCollection coll;
  coll.n_classes = r.u64();
  coll.base_name = r.str();
  coll.timestamps = r.u64s();
  for (std::size_t k = 0; k < coll.timestamps.size(); ++k) {
    const auto tag = r.str();
    if (tag == KnnClassifier::kTag)
      coll.members.push_back(KnnClassifier::load(r));
    else if (tag == LogisticClassifier::kTag)
      coll.members.push_back(LogisticClassifier::load(r));
    else
      throw FormatError("unknown classifier tag \"" + tag + "\"");
  }
  return coll;
}

inline ClassifiersCollection deserialize_collection(std::string_view bytes) {
  BinaryReader r(bytes);
  auto coll = load_collection(r);
  if (!r.at_end()) throw FormatError("trailing bytes after collection");
  return coll;
}

}  // namespace edm
