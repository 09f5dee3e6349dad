#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include <unistd.h>

#include "edm/edm.hpp"

namespace edm::testing {

// Replays fixed posteriors. A series is identified by its first value, so a
// test series i is the constant row (i, i, ..., i).
class ReplayClassifier final : public ProbabilisticClassifier {
 public:
  ReplayClassifier(std::size_t t, std::vector<std::vector<double>> by_series)
      : t_(t), by_series_(std::move(by_series)) {}
  std::size_t n_classes() const override { return by_series_.front().size(); }
  std::string tag() const override { return "replay"; }
  std::vector<double> posterior(std::span<const double> prefix) const override {
    if (prefix.size() != t_) throw LengthMismatch("replay prefix length");
    return by_series_.at(static_cast<std::size_t>(prefix[0]));
  }

 private:
  std::size_t t_;
  std::vector<std::vector<double>> by_series_;
};

/// Collection whose member k returns cube.at(i, k) for series i.
inline ClassifiersCollection replay_collection(const ProbabilityCube& cube,
                                               std::vector<std::size_t> timestamps) {
  ClassifiersCollection coll;
  coll.timestamps = std::move(timestamps);
  coll.n_classes = cube.n_classes;
  coll.base_name = "replay";
  for (std::size_t k = 0; k < cube.m; ++k) {
    std::vector<std::vector<double>> rows;
    for (std::size_t i = 0; i < cube.n; ++i) {
      const auto p = cube.at(i, k);
      rows.emplace_back(p.begin(), p.end());
    }
    coll.members.push_back(std::make_shared<ReplayClassifier>(coll.timestamps[k], rows));
  }
  return coll;
}

/// Series i is the constant row i of length L, labels from the cube.
inline TimeSeriesDataset replay_dataset(const ProbabilityCube& cube, std::size_t length) {
  TimeSeriesDataset ds;
  ds.name = "replay";
  ds.values = Matrix(cube.n, length);
  for (std::size_t i = 0; i < cube.n; ++i)
    for (std::size_t j = 0; j < length; ++j) ds.values(i, j) = static_cast<double>(i);
  ds.labels = cube.labels;
  for (std::size_t c = 0; c < cube.n_classes; ++c) ds.label_map[std::to_string(c)] = c;
  return ds;
}

/// Cube from nested posteriors [series][timestamp][class].
inline ProbabilityCube make_cube(const std::vector<std::vector<std::vector<double>>>& post,
                                 std::vector<std::size_t> labels) {
  ProbabilityCube cube(post.size(), post.front().size(), post.front().front().size());
  for (std::size_t i = 0; i < cube.n; ++i)
    for (std::size_t k = 0; k < cube.m; ++k)
      std::copy(post[i][k].begin(), post[i][k].end(), cube.at(i, k).begin());
  cube.labels = std::move(labels);
  return cube;
}

/// Random cube with Dirichlet-like rows (normalized uniforms), so posteriors
/// are distinct with probability 1.
inline ProbabilityCube random_cube(SplitMix64& rng, std::size_t n, std::size_t m,
                                   std::size_t c) {
  ProbabilityCube cube(n, m, c);
  for (std::size_t i = 0; i < n; ++i) {
    cube.labels[i] = i % c;
    for (std::size_t k = 0; k < m; ++k) {
      auto p = cube.at(i, k);
      double total = 0.0;
      for (auto& v : p) total += (v = 0.01 + rng.uniform());
      for (auto& v : p) v /= total;
    }
  }
  return cube;
}

inline CostMatrices table_cost(std::size_t n_classes, std::vector<std::size_t> ts,
                               std::vector<double> delays, Matrix misclf = {}) {
  auto spec = symmetric_linear_spec(n_classes, std::move(ts), 0.0);
  spec.delay = TableDelay{std::move(delays)};
  if (!misclf.empty()) spec.misclf = std::move(misclf);
  return build_cost_matrices(std::move(spec));
}

inline CostMatrices linear_cost(std::size_t n_classes, std::vector<std::size_t> ts, double alpha) {
  return build_cost_matrices(symmetric_linear_spec(n_classes, std::move(ts), alpha));
}

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static std::uint64_t counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("edm_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

/// Small synthetic pair for fast end-to-end tests.
inline SyntheticParams small_synthetic() {
  SyntheticParams p;
  p.n_per_class = 15;
  p.length = 40;
  p.t_star = 16;
  return p;
}

}  // namespace edm::testing
