#pragma once

#include <algorithm>
#include <cmath>
#include <set>
#include <string>
#include <vector>

#include "edm/classifier.hpp"

namespace edm {

enum class LogisticFeatures { raw_prefix, summary };

struct LogisticConfig {
  LogisticFeatures features = LogisticFeatures::summary;
  double l2 = 1e-2;
  std::size_t max_iters = 200;
  double learning_rate = 0.1;
  // Step size at iteration i is learning_rate / (1 + lr_decay * i);
  // 0 keeps it constant.
  double lr_decay = 0.0;
  friend bool operator==(const LogisticConfig&, const LogisticConfig&) = default;
};

/// mean, population std, min, max, least-squares slope, lag-1 autocorrelation.
inline std::vector<double> summary_features(std::span<const double> x) {
  const double n = static_cast<double>(x.size());
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= n;
  double ss = 0.0;
  for (double v : x) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / n);
  const auto [lo, hi] = std::minmax_element(x.begin(), x.end());

  // slope against time 0..n-1
  const double t_mean = (n - 1.0) / 2.0;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dt = static_cast<double>(i) - t_mean;
    sxy += dt * (x[i] - mean);
    sxx += dt * dt;
  }
  const double slope = sxx > 0.0 ? sxy / sxx : 0.0;

  double lag = 0.0;
  for (std::size_t i = 0; i + 1 < x.size(); ++i)
    lag += (x[i] - mean) * (x[i + 1] - mean);
  const double autocorr = ss > 0.0 ? lag / ss : 0.0;

  return {mean, sd, *lo, *hi, slope, autocorr};
}

/// Multinomial logistic regression trained by full-batch gradient descent on
/// the L2-regularized mean cross-entropy. Weights start at zero and the bias
/// column is not penalized. Features are standardized with training-set mean
/// and population std (constant features are only centered).
class LogisticClassifier final : public ProbabilisticClassifier {
 public:
  static constexpr const char* kTag = "logistic";

  LogisticClassifier(const LogisticConfig& cfg, const Matrix& prefixes,
                     std::span<const std::size_t> labels, std::size_t n_classes)
      : cfg_(cfg), n_classes_(n_classes) {
    if (prefixes.rows() == 0) throw EmptyTrainingSet("logistic needs training rows");
    if (!(cfg.l2 >= 0.0)) throw InvalidParam("l2 must be >= 0");
    if (cfg.max_iters < 1) throw InvalidParam("max_iters must be >= 1");
    if (std::set<std::size_t>(labels.begin(), labels.end()).size() < 2)
      throw DegenerateLabels("logistic regression needs at least 2 classes present");
    for (double v : prefixes.data())
      if (!std::isfinite(v)) throw InvalidParam("non-finite feature value");
    fit(prefixes, labels, cfg.max_iters);
  }

  /// Exposes the zero-iteration model for tests of the starting point.
  static LogisticClassifier untrained(const LogisticConfig& cfg,
                                      const Matrix& prefixes,
                                      std::span<const std::size_t> labels,
                                      std::size_t n_classes) {
    LogisticClassifier m(cfg, n_classes);
    m.fit(prefixes, labels, 0);
    return m;
  }

  static ClassifierTrainer trainer(LogisticConfig cfg) {
    return [cfg](const Matrix& x, std::span<const std::size_t> y,
                 std::size_t n_classes) -> ClassifierPtr {
      return std::make_shared<LogisticClassifier>(cfg, x, y, n_classes);
    };
  }

  std::size_t n_classes() const override { return n_classes_; }
  std::string tag() const override { return kTag; }

  std::vector<double> posterior(std::span<const double> prefix) const override {
    if (prefix.size() != prefix_len_)
      throw LengthMismatch("logistic query length " + std::to_string(prefix.size()) +
                           " vs training prefix length " + std::to_string(prefix_len_));
    const auto x = standardized(features(prefix));
    std::vector<double> p(n_classes_);
    softmax_scores(x, p);
    return p;
  }

  void save(BinaryWriter& w) const override {
    w.u64(cfg_.features == LogisticFeatures::raw_prefix ? 0 : 1);
    w.f64(cfg_.l2);
    w.u64(cfg_.max_iters);
    w.f64(cfg_.learning_rate);
    w.f64(cfg_.lr_decay);
    w.u64(n_classes_);
    w.u64(prefix_len_);
    w.f64s(mean_);
    w.f64s(scale_);
    w.f64s(weights_);
  }

  static ClassifierPtr load(BinaryReader& r) {
    LogisticConfig cfg;
    cfg.features = r.u64() == 0 ? LogisticFeatures::raw_prefix : LogisticFeatures::summary;
    cfg.l2 = r.f64();
    cfg.max_iters = r.u64();
    cfg.learning_rate = r.f64();
    cfg.lr_decay = r.f64();
    auto m = std::shared_ptr<LogisticClassifier>(new LogisticClassifier(cfg, r.u64()));
    m->prefix_len_ = r.u64();
    m->mean_ = r.f64s();
    m->scale_ = r.f64s();
    m->weights_ = r.f64s();
    if (m->scale_.size() != m->mean_.size() ||
        m->weights_.size() != m->n_classes_ * (m->mean_.size() + 1))
      throw FormatError("logistic parameter sizes inconsistent");
    return m;
  }

 private:
  LogisticClassifier(const LogisticConfig& cfg, std::size_t n_classes)
      : cfg_(cfg), n_classes_(n_classes) {}

  std::vector<double> features(std::span<const double> prefix) const {
    if (cfg_.features == LogisticFeatures::summary) return summary_features(prefix);
    return {prefix.begin(), prefix.end()};
  }

  std::vector<double> standardized(std::vector<double> f) const {
    for (std::size_t j = 0; j < f.size(); ++j) f[j] = (f[j] - mean_[j]) / scale_[j];
    return f;
  }

  // p = softmax(W [x; 1]), weights_ row-major n_classes x (F + 1).
  void softmax_scores(std::span<const double> x, std::span<double> p) const {
    const std::size_t stride = x.size() + 1;
    for (std::size_t c = 0; c < n_classes_; ++c) {
      const double* w = weights_.data() + c * stride;
      double s = w[x.size()];
      for (std::size_t j = 0; j < x.size(); ++j) s += w[j] * x[j];
      p[c] = s;
    }
    const double top = *std::max_element(p.begin(), p.end());
    double total = 0.0;
    for (double& v : p) {
      v = std::exp(v - top);
      total += v;
    }
    for (double& v : p) v /= total;
  }

  void fit(const Matrix& prefixes, std::span<const std::size_t> labels,
           std::size_t iters) {
    prefix_len_ = prefixes.cols();
    const std::size_t n = prefixes.rows();
    std::vector<std::vector<double>> feats(n);
    for (std::size_t i = 0; i < n; ++i) feats[i] = features(prefixes.row(i));
    const std::size_t dim = feats.front().size();

    mean_.assign(dim, 0.0);
    scale_.assign(dim, 0.0);
    for (const auto& f : feats)
      for (std::size_t j = 0; j < dim; ++j) mean_[j] += f[j];
    for (auto& m : mean_) m /= static_cast<double>(n);
    for (const auto& f : feats)
      for (std::size_t j = 0; j < dim; ++j)
        scale_[j] += (f[j] - mean_[j]) * (f[j] - mean_[j]);
    for (auto& s : scale_) {
      s = std::sqrt(s / static_cast<double>(n));
      if (s < 1e-12) s = 1.0;
    }
    for (auto& f : feats) f = standardized(std::move(f));

    const std::size_t stride = dim + 1;
    weights_.assign(n_classes_ * stride, 0.0);
    std::vector<double> grad(weights_.size());
    std::vector<double> p(n_classes_);
    const double inv_n = 1.0 / static_cast<double>(n);
    for (std::size_t it = 0; it < iters; ++it) {
      std::fill(grad.begin(), grad.end(), 0.0);
      for (std::size_t i = 0; i < n; ++i) {
        softmax_scores(feats[i], p);
        for (std::size_t c = 0; c < n_classes_; ++c) {
          const double err = (p[c] - (labels[i] == c ? 1.0 : 0.0)) * inv_n;
          double* g = grad.data() + c * stride;
          for (std::size_t j = 0; j < dim; ++j) g[j] += err * feats[i][j];
          g[dim] += err;
        }
      }
      const double lr = cfg_.learning_rate / (1.0 + cfg_.lr_decay * static_cast<double>(it));
      for (std::size_t c = 0; c < n_classes_; ++c)
        for (std::size_t j = 0; j < stride; ++j) {
          const std::size_t idx = c * stride + j;
          const double reg = j < dim ? cfg_.l2 * weights_[idx] : 0.0;
          weights_[idx] -= lr * (grad[idx] + reg);
        }
    }
  }

  LogisticConfig cfg_;
  std::size_t n_classes_ = 0;
  std::size_t prefix_len_ = 0;
  std::vector<double> mean_;
  std::vector<double> scale_;
  std::vector<double> weights_;
};

}  // namespace edm
