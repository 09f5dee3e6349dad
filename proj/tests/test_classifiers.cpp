#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "edm/knn.hpp"
#include "edm/logistic.hpp"
#include "support.hpp"

using namespace edm;

namespace {

double sum(const std::vector<double>& p) { return std::accumulate(p.begin(), p.end(), 0.0); }

Matrix rows(std::initializer_list<std::vector<double>> r) {
  Matrix m(r.size(), r.begin()->size());
  std::size_t i = 0;
  for (const auto& row : r) std::copy(row.begin(), row.end(), m.row(i++).begin());
  return m;
}

}  // namespace

TEST(Knn, UniformVoteFractions) {
  // Nearest three are rows 0, 1 (class 0) and 2 (class 1).
  const auto x = rows({{1, 2, 3, 4}, {1, 2, 3, 4.5}, {1, 2, 4, 4}, {4, 3, 2, 1}, {4, 3, 2, 1}});
  const KnnClassifier knn({3, KnnWeighting::uniform}, x, {0, 0, 1, 1, 1}, 2);
  const auto p = knn.posterior(std::vector<double>{1, 2, 3, 4});
  EXPECT_NEAR(p[0], 2.0 / 3.0, 1e-15);
  EXPECT_NEAR(p[1], 1.0 / 3.0, 1e-15);
}

TEST(Knn, ExactMatchOneNearest) {
  const auto x = rows({{0, 1, 0, 2}, {5, 1, 7, 2}, {3, 3, 1, 0}});
  const KnnClassifier knn({1, KnnWeighting::uniform}, x, {2, 0, 1}, 3);
  EXPECT_EQ(knn.posterior(std::vector<double>{5, 1, 7, 2}), (std::vector<double>{1, 0, 0}));
  EXPECT_EQ(knn.posterior(std::vector<double>{3, 3, 1, 0}), (std::vector<double>{0, 1, 0}));
}

TEST(Knn, InverseDistanceWeights) {
  // Unit-variance zero-mean vectors: q, and a, b at distances 1 and 3 from q.
  const std::vector<double> q{1, 1, -1, -1}, w{1, -1, 1, -1};
  auto mix = [&](double cos_theta) {
    const double sin_theta = std::sqrt(1 - cos_theta * cos_theta);
    std::vector<double> u(4);
    for (int j = 0; j < 4; ++j) u[j] = cos_theta * q[j] + sin_theta * w[j];
    return u;
  };
  // |q - u|^2 = 8 - 8 cos_theta
  const auto a = mix(7.0 / 8.0), b = mix(-1.0 / 8.0);
  Matrix x(2, 4);
  std::copy(a.begin(), a.end(), x.row(0).begin());
  std::copy(b.begin(), b.end(), x.row(1).begin());
  const KnnClassifier knn({2, KnnWeighting::inverse_distance}, x, {0, 1}, 2);
  const auto p = knn.posterior(q);
  EXPECT_NEAR(p[0], 0.75, 1e-9);
  EXPECT_NEAR(p[1], 0.25, 1e-9);
}

TEST(Knn, PrefixNormalizationIsOptIn) {
  // The query is row 1 scaled and shifted: nearest raw, but row 1 after
  // per-prefix normalization.
  const auto x = rows({{10, 20, 30, 40}, {0, 2, 1, 3}});
  const std::vector<double> q{10, 30, 20, 40};
  const KnnClassifier raw({1, KnnWeighting::uniform}, x, {0, 1}, 2);
  EXPECT_EQ(raw.posterior(q), (std::vector<double>{1, 0}));
  const KnnClassifier norm({1, KnnWeighting::uniform, true}, x, {0, 1}, 2);
  EXPECT_EQ(norm.posterior(q), (std::vector<double>{0, 1}));
}

TEST(Knn, DistanceTiesGoToLowerIndex) {
  const auto x = rows({{0, 1, 2}, {0, 1, 2}, {2, 1, 0}});
  const KnnClassifier a({1, KnnWeighting::uniform}, x, {1, 0, 0}, 2);
  EXPECT_EQ(a.posterior(std::vector<double>{0, 1, 2}), (std::vector<double>{0, 1}));
  const KnnClassifier b({1, KnnWeighting::uniform}, x, {0, 1, 0}, 2);
  EXPECT_EQ(b.posterior(std::vector<double>{0, 1, 2}), (std::vector<double>{1, 0}));
}

TEST(Knn, Errors) {
  EXPECT_THROW(KnnClassifier({1, KnnWeighting::uniform}, Matrix(0, 3), {}, 2), EmptyTrainingSet);
  EXPECT_THROW(KnnClassifier({0, KnnWeighting::uniform}, Matrix(2, 3), {0, 1}, 2), InvalidParam);
  EXPECT_THROW(KnnClassifier({3, KnnWeighting::uniform}, Matrix(2, 3), {0, 1}, 2), InvalidParam);
  const KnnClassifier knn({1, KnnWeighting::uniform}, rows({{0, 1, 2}, {2, 1, 0}}), {0, 1}, 2);
  EXPECT_THROW(knn.posterior(std::vector<double>{0, 1}), LengthMismatch);
}

TEST(Knn, PosteriorsSumToOneAndSurviveSerialization) {
  SplitMix64 rng(12);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 3 + rng.below(20), len = 2 + rng.below(10), c = 2 + rng.below(3);
    Matrix x(n, len);
    std::vector<std::size_t> y(n);
    for (std::size_t i = 0; i < n; ++i) {
      y[i] = rng.below(c);
      for (auto& v : x.row(i)) v = rng.normal();
    }
    const KnnConfig cfg{1 + rng.below(n), trial % 2 ? KnnWeighting::uniform
                                                    : KnnWeighting::inverse_distance};
    const KnnClassifier knn(cfg, x, y, c);
    BinaryWriter w;
    knn.save(w);
    BinaryReader r(w.bytes());
    const auto back = KnnClassifier::load(r);
    for (int q = 0; q < 5; ++q) {
      std::vector<double> s(len);
      for (auto& v : s) v = rng.normal();
      const auto p = knn.posterior(s);
      EXPECT_NEAR(sum(p), 1.0, 1e-9);
      EXPECT_EQ(back->posterior(s), p);
    }
  }
}

TEST(Logistic, ZeroIterationsGiveUniformPosteriors) {
  const auto x = rows({{1, 2}, {3, 1}, {0, 0}});
  const auto m = LogisticClassifier::untrained({}, x, std::vector<std::size_t>{0, 1, 2}, 3);
  const auto p = m.posterior(std::vector<double>{5, -2});
  for (double v : p) EXPECT_DOUBLE_EQ(v, 1.0 / 3.0);
}

TEST(Logistic, SeparableToy) {
  Matrix x(20, 1);
  std::vector<std::size_t> y(20);
  for (std::size_t i = 0; i < 20; ++i) {
    x(i, 0) = i % 2 ? 1.0 : -1.0;
    y[i] = i % 2;
  }
  EXPECT_EQ(summary_features(x.row(1)), (std::vector<double>{1, 0, 1, 1, 0, 0}));
  const LogisticClassifier m({}, x, y, 2);
  for (std::size_t i = 0; i < 20; ++i) EXPECT_EQ(argmax(m.posterior(x.row(i))), y[i]);
}

TEST(Logistic, PosteriorsSumToOneAndSurviveSerialization) {
  SplitMix64 rng(31);
  for (int trial = 0; trial < 10; ++trial) {
    const std::size_t n = 10 + rng.below(20), len = 2 + rng.below(8), c = 2 + rng.below(3);
    Matrix x(n, len);
    std::vector<std::size_t> y(n);
    for (std::size_t i = 0; i < n; ++i) {
      y[i] = i % c;
      for (auto& v : x.row(i)) v = rng.normal() + static_cast<double>(y[i]);
    }
    LogisticConfig cfg;
    cfg.features = trial % 2 ? LogisticFeatures::summary : LogisticFeatures::raw_prefix;
    cfg.max_iters = 50;
    cfg.lr_decay = 0.01;
    const LogisticClassifier m(cfg, x, y, c);
    BinaryWriter w;
    m.save(w);
    BinaryReader r(w.bytes());
    const auto back = LogisticClassifier::load(r);
    for (int q = 0; q < 5; ++q) {
      std::vector<double> s(len);
      for (auto& v : s) v = rng.normal() * 100;
      const auto p = m.posterior(s);
      EXPECT_NEAR(sum(p), 1.0, 1e-9);
      EXPECT_EQ(back->posterior(s), p);
    }
  }
}

TEST(Logistic, Errors) {
  const auto x = rows({{1, 2}, {3, 1}});
  EXPECT_THROW(LogisticClassifier({}, x, std::vector<std::size_t>{1, 1}, 2), DegenerateLabels);
  LogisticConfig bad;
  bad.l2 = -1;
  EXPECT_THROW(LogisticClassifier(bad, x, std::vector<std::size_t>{0, 1}, 2), InvalidParam);
  auto nan = x;
  nan(0, 0) = std::nan("");
  EXPECT_THROW(LogisticClassifier({}, nan, std::vector<std::size_t>{0, 1}, 2), InvalidParam);
  EXPECT_THROW(LogisticClassifier({}, Matrix(0, 2), std::vector<std::size_t>{}, 2), EmptyTrainingSet);
  const LogisticClassifier m({}, x, std::vector<std::size_t>{0, 1}, 2);
  EXPECT_THROW(m.posterior(std::vector<double>{1}), LengthMismatch);
}

TEST(ArgmaxTopTwo, TiesAndSingleClass) {
  EXPECT_EQ(argmax(std::vector<double>{0.4, 0.4, 0.2}), 0u);
  EXPECT_EQ(top_two(std::vector<double>{0.2, 0.5, 0.3}), (std::pair<double, double>{0.5, 0.3}));
  EXPECT_EQ(top_two(std::vector<double>{1.0}), (std::pair<double, double>{1.0, 0.0}));
}
