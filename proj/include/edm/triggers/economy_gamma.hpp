#pragma once

#include <algorithm>
#include <vector>

#include "edm/triggers/policy.hpp"

namespace edm {

/// Confidence-binned expected-cost forecaster.
///
/// At each timestamp the calibration max-posteriors are cut into up to K
/// equal-frequency bins. Each bin carries the expected misclassification
/// cost of its members, and consecutive timestamps are linked by
/// Laplace-smoothed bin-to-bin transition matrices. A series in bin g at
/// index k forecasts
///   f(tau) = sum_g' (P_k ... P_{tau-1})[g][g'] * E[tau][g'] + D(t_tau)
/// and fires when f(k) <= f(tau) for every later tau.
struct EconomyGammaState {
  std::size_t bins = 5;                             // requested K
  std::vector<std::vector<double>> boundaries;      // per timestamp, ascending
  std::vector<std::vector<double>> expected_cost;   // per timestamp, per bin
  std::vector<Matrix> transitions;                  // k -> k+1, m - 1 of them
  std::vector<double> delays;                       // D(t_k)

  std::size_t n_timestamps() const noexcept { return delays.size(); }

  /// Number of boundaries at or below x.
  std::size_t bin_of(std::size_t k, double max_posterior) const {
    const auto& b = boundaries[k];
    return static_cast<std::size_t>(
        std::upper_bound(b.begin(), b.end(), max_posterior) - b.begin());
  }

  /// f(tau) for tau = k..m-1, starting from bin g at index k.
  std::vector<double> forecast(std::size_t k, std::size_t g) const {
    std::vector<double> f;
    f.reserve(n_timestamps() - k);
    std::vector<double> dist(expected_cost[k].size(), 0.0);
    dist[g] = 1.0;
    for (std::size_t tau = k;; ++tau) {
      double e = 0.0;
      for (std::size_t j = 0; j < dist.size(); ++j) e += dist[j] * expected_cost[tau][j];
      f.push_back(e + delays[tau]);
      if (tau + 1 >= n_timestamps()) break;
      const auto& p = transitions[tau];
      std::vector<double> next(p.cols(), 0.0);
      for (std::size_t a = 0; a < p.rows(); ++a)
        for (std::size_t b = 0; b < p.cols(); ++b) next[b] += dist[a] * p(a, b);
      dist = std::move(next);
    }
    return f;
  }

  bool should_trigger(const PosteriorHistory& h) const {
    const auto k = h.current();
    if (k + 1 >= n_timestamps()) return true;
    const auto p = h.back();
    const auto f = forecast(k, bin_of(k, *std::max_element(p.begin(), p.end())));
    return std::all_of(f.begin() + 1, f.end(), [&](double later) { return f[0] <= later; });
  }

  friend bool operator==(const EconomyGammaState&, const EconomyGammaState&) = default;
};

/// Boundaries between equal-frequency groups of the sorted values: for
/// j = 1..K-1 the cut sits after position floor(j * n / K) - 1, at the
/// midpoint of the two order statistics around it. Cuts that fall inside a
/// run of equal values separate nothing and are dropped, which collapses
/// bins when there are fewer than K distinct values.
inline std::vector<double> equal_frequency_boundaries(std::vector<double> values,
                                                      std::size_t bins) {
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  std::vector<double> b;
  for (std::size_t j = 1; j < bins; ++j) {
    const std::size_t cut = j * n / bins;
    if (cut == 0 || cut >= n) continue;
    if (values[cut - 1] == values[cut]) continue;
    const double mid = (values[cut - 1] + values[cut]) / 2.0;
    if (b.empty() || b.back() < mid) b.push_back(mid);
  }
  return b;
}

inline EconomyGammaState fit_economy_gamma(const ProbabilityCube& cube,
                                           const CostMatrices& cost,
                                           std::size_t bins = 5) {
  detail::check_calibration_cube(cube, cost);
  if (bins < 1) throw InvalidParam("ECONOMY-gamma needs K >= 1");
  const std::size_t n = cube.n, m = cube.m;

  EconomyGammaState s;
  s.bins = bins;
  s.delays.resize(m);
  for (std::size_t k = 0; k < m; ++k) s.delays[k] = cost.delay(k);

  std::vector<std::vector<std::size_t>> member_bin(m, std::vector<std::size_t>(n));
  for (std::size_t k = 0; k < m; ++k) {
    std::vector<double> top(n);
    for (std::size_t i = 0; i < n; ++i) {
      const auto p = cube.at(i, k);
      top[i] = *std::max_element(p.begin(), p.end());
    }
    s.boundaries.push_back(equal_frequency_boundaries(top, bins));
    const std::size_t n_bins = s.boundaries[k].size() + 1;

    std::vector<double> sum(n_bins, 0.0);
    std::vector<std::size_t> count(n_bins, 0);
    double global = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const auto g = s.bin_of(k, top[i]);
      member_bin[k][i] = g;
      const double c = cost.misclf(cube.labels[i], argmax(cube.at(i, k)));
      sum[g] += c;
      ++count[g];
      global += c;
    }
    global /= static_cast<double>(n);
    std::vector<double> expected(n_bins);
    for (std::size_t g = 0; g < n_bins; ++g)
      expected[g] = count[g] > 0 ? sum[g] / static_cast<double>(count[g]) : global;
    s.expected_cost.push_back(std::move(expected));
  }

  for (std::size_t k = 0; k + 1 < m; ++k) {
    const std::size_t from = s.boundaries[k].size() + 1;
    const std::size_t to = s.boundaries[k + 1].size() + 1;
    Matrix counts(from, to, 0.0);
    std::vector<double> row_total(from, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      counts(member_bin[k][i], member_bin[k + 1][i]) += 1.0;
      row_total[member_bin[k][i]] += 1.0;
    }
    Matrix p(from, to);
    for (std::size_t a = 0; a < from; ++a)
      for (std::size_t b = 0; b < to; ++b)
        p(a, b) = (counts(a, b) + 1.0) / (row_total[a] + static_cast<double>(to));
    s.transitions.push_back(std::move(p));
  }
  return s;
}

}  // namespace edm
