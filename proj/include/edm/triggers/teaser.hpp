#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "edm/triggers/policy.hpp"

namespace edm {

/// Per-timestamp acceptance envelope: diagonal Gaussian over the features
/// [posterior vector, p1 - p2], scored by squared standardized distance.
struct TeaserEnvelope {
  std::vector<double> mean;
  std::vector<double> var;  // includes the 1e-9 floor
  double threshold = 0.0;

  double score(std::span<const double> features) const {
    double s = 0.0;
    for (std::size_t j = 0; j < mean.size(); ++j) {
      const double d = features[j] - mean[j];
      s += d * d / var[j];
    }
    return s;
  }

  friend bool operator==(const TeaserEnvelope&, const TeaserEnvelope&) = default;
};

inline std::vector<double> teaser_features(std::span<const double> posterior) {
  std::vector<double> f(posterior.begin(), posterior.end());
  const auto [p1, p2] = top_two(posterior);
  f.push_back(p1 - p2);
  return f;
}

/// Fires once the last `v` timestamps (ending now) were all accepted by their
/// own envelopes. A rejection resets the run.
struct TeaserState {
  std::vector<TeaserEnvelope> envelopes;
  std::size_t v = 1;
  double quantile = 0.95;

  std::size_t n_timestamps() const noexcept { return envelopes.size(); }

  bool accepted(std::size_t k, std::span<const double> posterior) const {
    const auto& e = envelopes[k];
    return e.score(teaser_features(posterior)) <= e.threshold;
  }

  /// Consecutive accepted timestamps ending at the current one.
  std::size_t run_length(const PosteriorHistory& h) const {
    std::size_t run = 0;
    for (std::size_t j = h.size(); j-- > 0;) {
      if (!accepted(j, h[j])) break;
      ++run;
    }
    return run;
  }

  bool should_trigger(const PosteriorHistory& h) const {
    if (h.current() + 1 >= n_timestamps()) return true;
    return run_length(h) >= v;
  }

  friend bool operator==(const TeaserState&, const TeaserState&) = default;
};

/// Linear-interpolation quantile of unsorted values (q = 1 gives the max).
inline double empirical_quantile(std::vector<double> values, double q) {
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  if (lo + 1 >= values.size()) return values.back();
  const double frac = pos - static_cast<double>(lo);
  return values[lo] + frac * (values[lo + 1] - values[lo]);
}

/// Envelope at index k from the calibration series whose argmax is correct
/// there (all series when none is). Threshold = q-quantile of their scores.
inline TeaserEnvelope fit_teaser_envelope(const ProbabilityCube& cube, std::size_t k,
                                          double quantile) {
  std::vector<std::vector<double>> rows;
  for (std::size_t i = 0; i < cube.n; ++i)
    if (argmax(cube.at(i, k)) == cube.labels[i]) rows.push_back(teaser_features(cube.at(i, k)));
  if (rows.empty())
    for (std::size_t i = 0; i < cube.n; ++i) rows.push_back(teaser_features(cube.at(i, k)));

  const std::size_t dim = rows.front().size();
  const double n = static_cast<double>(rows.size());
  TeaserEnvelope e;
  e.mean.assign(dim, 0.0);
  e.var.assign(dim, 0.0);
  for (const auto& r : rows)
    for (std::size_t j = 0; j < dim; ++j) e.mean[j] += r[j];
  for (auto& x : e.mean) x /= n;
  for (const auto& r : rows)
    for (std::size_t j = 0; j < dim; ++j) e.var[j] += (r[j] - e.mean[j]) * (r[j] - e.mean[j]);
  for (auto& x : e.var) x = x / n + 1e-9;

  std::vector<double> scores;
  scores.reserve(rows.size());
  for (const auto& r : rows) scores.push_back(e.score(r));
  e.threshold = empirical_quantile(std::move(scores), quantile);
  return e;
}

/// v in 1..max_v minimizing the simulated cost; ties go to the smaller v.
inline TeaserState fit_teaser(const ProbabilityCube& cube, const CostMatrices& cost,
                              double quantile = 0.95, std::size_t max_v = 5,
                              std::size_t jobs = 1) {
  detail::check_calibration_cube(cube, cost);
  if (!(quantile >= 0.0 && quantile <= 1.0)) throw InvalidParam("TEASER quantile must lie in [0, 1]");
  if (max_v < 1) throw InvalidParam("TEASER max_v must be >= 1");
  TeaserState base;
  base.quantile = quantile;
  for (std::size_t k = 0; k < cube.m; ++k)
    base.envelopes.push_back(fit_teaser_envelope(cube, k, quantile));
  auto make = [&](std::size_t c) {
    TeaserState s = base;
    s.v = c + 1;
    return s;
  };
  return make(grid_search(max_v, make, cube, cost, jobs).best);
}

}  // namespace edm
