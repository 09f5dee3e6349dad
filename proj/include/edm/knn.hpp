#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "edm/classifier.hpp"
#include "edm/data_io.hpp"

namespace edm {

enum class KnnWeighting { uniform, inverse_distance };

struct KnnConfig {
  std::size_t k = 5;
  KnnWeighting weighting = KnnWeighting::uniform;
  // z-normalize every prefix on its own (training and query) before the
  // distance. Off: distances use the prefix as given, which is a prefix of the
  // series the data layer normalized.
  bool normalize_prefix = false;
  friend bool operator==(const KnnConfig&, const KnnConfig&) = default;
};

/// k-nearest-neighbour posteriors under Euclidean distance between prefixes.
/// With `normalize_prefix` each prefix is z-normalized on its own, so it never
/// carries information from later values.
///
/// Uniform weighting gives vote fractions among the k nearest; inverse
/// distance weights each neighbour by 1 / (d + 1e-9). Distance ties go to the
/// lower training index.
class KnnClassifier final : public ProbabilisticClassifier {
 public:
  static constexpr const char* kTag = "knn";

  KnnClassifier(KnnConfig cfg, Matrix prefixes, std::vector<std::size_t> labels,
                std::size_t n_classes)
      : cfg_(cfg), train_(std::move(prefixes)), labels_(std::move(labels)),
        n_classes_(n_classes) {
    if (train_.rows() == 0) throw EmptyTrainingSet("k-NN needs training rows");
    if (cfg_.k < 1) throw InvalidParam("k-NN k must be >= 1");
    if (cfg_.k > train_.rows())
      throw InvalidParam("k-NN k=" + std::to_string(cfg_.k) +
                         " exceeds training size " +
                         std::to_string(train_.rows()));
    if (cfg_.normalize_prefix)
      for (std::size_t i = 0; i < train_.rows(); ++i) z_normalize_series(train_.row(i));
  }

  static ClassifierTrainer trainer(KnnConfig cfg) {
    return [cfg](const Matrix& x, std::span<const std::size_t> y,
                 std::size_t n_classes) -> ClassifierPtr {
      return std::make_shared<KnnClassifier>(
          cfg, x, std::vector<std::size_t>(y.begin(), y.end()), n_classes);
    };
  }

  std::size_t n_classes() const override { return n_classes_; }
  std::string tag() const override { return kTag; }
  const KnnConfig& config() const noexcept { return cfg_; }

  std::vector<double> posterior(std::span<const double> prefix) const override {
    if (prefix.size() != train_.cols())
      throw LengthMismatch("k-NN query length " + std::to_string(prefix.size()) +
                           " vs training prefix length " +
                           std::to_string(train_.cols()));
    std::vector<double> q(prefix.begin(), prefix.end());
    if (cfg_.normalize_prefix) z_normalize_series(q);

    const std::size_t n = train_.rows();
    std::vector<double> dist(n);
    for (std::size_t i = 0; i < n; ++i) {
      const auto r = train_.row(i);
      double s = 0.0;
      for (std::size_t j = 0; j < q.size(); ++j) s += (r[j] - q[j]) * (r[j] - q[j]);
      dist[i] = std::sqrt(s);
    }
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::partial_sort(order.begin(), order.begin() + cfg_.k, order.end(),
                      [&](std::size_t a, std::size_t b) {
                        return dist[a] < dist[b] || (dist[a] == dist[b] && a < b);
                      });

    std::vector<double> p(n_classes_, 0.0);
    double total = 0.0;
    for (std::size_t r = 0; r < cfg_.k; ++r) {
      const auto i = order[r];
      const double w = cfg_.weighting == KnnWeighting::uniform
                           ? 1.0
                           : 1.0 / (dist[i] + 1e-9);
      p[labels_[i]] += w;
      total += w;
    }
    for (double& v : p) v /= total;
    return p;
  }

  void save(BinaryWriter& w) const override {
    w.u64(cfg_.k);
    w.u64(cfg_.weighting == KnnWeighting::uniform ? 0 : 1);
    w.u64(cfg_.normalize_prefix ? 1 : 0);
    w.u64(n_classes_);
    w.u64(train_.rows());
    w.u64(train_.cols());
    w.f64s(train_.data());
    w.u64s(labels_);
  }

  static ClassifierPtr load(BinaryReader& r) {
    KnnConfig cfg;
    cfg.k = r.u64();
    cfg.weighting = r.u64() == 0 ? KnnWeighting::uniform : KnnWeighting::inverse_distance;
    cfg.normalize_prefix = r.u64() != 0;
    const auto n_classes = r.u64();
    const auto rows = r.u64();
    const auto cols = r.u64();
    auto data = r.f64s();
    if (data.size() != rows * cols) throw FormatError("k-NN matrix size mismatch");
    auto labels = r.u64s();
    // Stored rows are restored verbatim, not renormalized.
    auto model = std::make_shared<KnnClassifier>(
        cfg, Matrix(rows, cols), std::move(labels), n_classes);
    model->train_ = Matrix(rows, cols, std::move(data));
    return model;
  }

 private:
  KnnConfig cfg_;
  Matrix train_;
  std::vector<std::size_t> labels_;
  std::size_t n_classes_;
};

}  // namespace edm
