#include <gtest/gtest.h>

#include <numeric>

#include "support.hpp"

using namespace edm;
using namespace edm::testing;

namespace {

TimeSeriesDataset tiny(std::size_t n_per_class, std::size_t length, std::uint64_t seed) {
  SyntheticParams p;
  p.n_per_class = n_per_class;
  p.length = length;
  p.t_star = length / 2;
  return make_synthetic(p, seed);
}

}  // namespace

TEST(FitCollection, OneMemberPerTimestampOnItsPrefix) {
  const auto ds = tiny(5, 6, 1);
  const std::vector<std::size_t> ts{2, 4, 6};
  const auto coll = fit_collection(ds, ts, KnnConfig{1, KnnWeighting::uniform});
  ASSERT_EQ(coll.size(), 3u);
  EXPECT_EQ(coll.timestamps, ts);
  EXPECT_EQ(coll.base_name, "knn");
  const std::vector<double> s{0, 1, 2, 3, 4, 5};
  EXPECT_NO_THROW(coll.members[0]->posterior(std::span(s).first(2)));
  EXPECT_THROW(coll.members[0]->posterior(std::span(s).first(3)), LengthMismatch);
}

TEST(FitCollection, WorkerCountDoesNotChangePosteriors) {
  const auto ds = tiny(20, 30, 2);
  const auto ts = default_timestamps(30, 10);
  for (const ClassifierConfig& cfg : {ClassifierConfig{KnnConfig{}}, ClassifierConfig{LogisticConfig{}}}) {
    const auto a = fit_collection(ds, ts, cfg, 1);
    const auto b = fit_collection(ds, ts, cfg, 8);
    EXPECT_EQ(serialize_collection(a), serialize_collection(b));
    const auto probe = tiny(1, 30, 99);
    for (std::size_t k = 0; k < ts.size(); ++k)
      EXPECT_EQ(predict_proba_at(a, probe.values, k), predict_proba_at(b, probe.values, k));
  }
}

TEST(FitCollection, SyntheticAccuracyBeforeAndAfterDivergence) {
  const SyntheticParams p;  // 50 per class, L=100, t_star=40, gap 3
  const auto train = make_synthetic(p, 100), test = make_synthetic(p, 200);
  const std::vector<std::size_t> ts{20, 100};
  const auto coll = fit_collection(train, ts, KnnConfig{});
  EXPECT_NEAR(score_at(coll, test, 0), 0.5, 0.15);
  EXPECT_GE(score_at(coll, test, 1), 0.95);
}

TEST(FitCollection, ErrorsCarryTheTimestamp) {
  const auto ds = tiny(2, 6, 1);  // 4 rows
  try {
    fit_collection(ds, std::vector<std::size_t>{3}, KnnConfig{10, KnnWeighting::uniform});
    FAIL();
  } catch (const InvalidParam& e) {
    EXPECT_NE(std::string(e.what()).find("timestamp 3"), std::string::npos);
  }
  EXPECT_THROW(fit_collection(ds, std::vector<std::size_t>{4, 2}, KnnConfig{1}), InvalidParam);
  EXPECT_THROW(fit_collection(ds, std::vector<std::size_t>{7}, KnnConfig{1}), InvalidParam);
}

TEST(PredictProbaAt, PrefixLengthRules) {
  const auto ds = tiny(5, 8, 1);
  const auto coll = fit_collection(ds, std::vector<std::size_t>{4, 8}, KnnConfig{3});
  EXPECT_NO_THROW(predict_proba_at(coll, ds.values.truncated(4), 0));
  EXPECT_THROW(predict_proba_at(coll, ds.values.truncated(3), 0), PrefixTooShort);
  EXPECT_THROW(predict_proba_at(coll, ds.values, 2), IndexOutOfRange);
  const auto proba = predict_proba_at(coll, ds.values, 1);
  for (std::size_t i = 0; i < proba.rows(); ++i) {
    const auto r = proba.row(i);
    EXPECT_NEAR(std::accumulate(r.begin(), r.end(), 0.0), 1.0, 1e-9);
  }
}

TEST(ScoreAt, Fractions) {
  ProbabilityCube cube(4, 1, 2);
  cube.labels = {0, 1, 0, 1};
  for (std::size_t i = 0; i < 4; ++i) cube.at(i, 0)[cube.labels[i]] = 1.0;
  const auto ds = replay_dataset(cube, 3);
  EXPECT_EQ(score_at(replay_collection(cube, {3}), ds, 0), 1.0);
  auto wrong = cube;
  for (std::size_t i = 0; i < 4; ++i) {
    wrong.at(i, 0)[cube.labels[i]] = 0.0;
    wrong.at(i, 0)[1 - cube.labels[i]] = 1.0;
  }
  EXPECT_EQ(score_at(replay_collection(wrong, {3}), ds, 0), 0.0);
  auto three = cube;
  three.at(3, 0)[0] = 1.0;
  three.at(3, 0)[1] = 0.0;
  EXPECT_EQ(score_at(replay_collection(three, {3}), ds, 0), 0.75);
}

TEST(Cubes, ShapeSumsAndProvenance) {
  const auto ds = tiny(10, 12, 5);
  const auto ts = default_timestamps(12, 4);
  const KnnConfig one_nn{1, KnnWeighting::uniform};
  const auto oof = out_of_fold_cube(ds, ts, one_nn, 5, 0);
  EXPECT_EQ(oof.n, ds.size());
  EXPECT_EQ(oof.m, ts.size());
  EXPECT_EQ(oof.n_classes, 2u);
  EXPECT_EQ(oof.provenance, Provenance::out_of_fold);
  for (std::size_t i = 0; i < oof.n; ++i)
    for (std::size_t k = 0; k < oof.m; ++k) {
      const auto p = oof.at(i, k);
      EXPECT_NEAR(std::accumulate(p.begin(), p.end(), 0.0), 1.0, 1e-9);
    }

  const auto resub = resubstitution_cube(fit_collection(ds, ts, one_nn), ds);
  EXPECT_EQ(resub.provenance, Provenance::resubstitution);
  std::size_t resub_correct = 0, oof_correct = 0;
  for (std::size_t i = 0; i < ds.size(); ++i)
    for (std::size_t k = 0; k < ts.size(); ++k) {
      resub_correct += resub.at(i, k)[ds.labels[i]] == 1.0;
      oof_correct += argmax(oof.at(i, k)) == ds.labels[i];
    }
  EXPECT_EQ(resub_correct, ds.size() * ts.size());
  EXPECT_LT(oof_correct, ds.size() * ts.size());
}

TEST(Cubes, OutOfFoldIsWorkerCountIndependent) {
  const auto ds = tiny(12, 20, 6);
  const auto ts = default_timestamps(20, 5);
  EXPECT_EQ(out_of_fold_cube(ds, ts, KnnConfig{}, 4, 3, 1),
            out_of_fold_cube(ds, ts, KnnConfig{}, 4, 3, 8));
}

TEST(CollectionBlob, RoundTrip) {
  const auto ds = tiny(8, 10, 7);
  const auto ts = default_timestamps(10, 3);
  for (const ClassifierConfig& cfg : {ClassifierConfig{KnnConfig{}}, ClassifierConfig{LogisticConfig{}}}) {
    const auto coll = fit_collection(ds, ts, cfg);
    const auto bytes = serialize_collection(coll);
    const auto back = deserialize_collection(bytes);
    EXPECT_EQ(serialize_collection(back), bytes);
    for (std::size_t k = 0; k < ts.size(); ++k)
      EXPECT_EQ(predict_proba_at(back, ds.values, k), predict_proba_at(coll, ds.values, k));
  }
  EXPECT_THROW(deserialize_collection("EDMX1junk"), FormatError);
  const auto bytes = serialize_collection(fit_collection(ds, ts, KnnConfig{}));
  EXPECT_THROW(deserialize_collection(bytes.substr(0, bytes.size() - 3)), FormatError);
}
