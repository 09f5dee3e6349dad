#pragma once

#include <concepts>
#include <cstddef>
#include <limits>
#include <vector>

#include "edm/collection.hpp"
#include "edm/cost_model.hpp"
#include "edm/parallel.hpp"

namespace edm {

/// A halting policy. `should_trigger` sees the posteriors for timestamp
/// indices 0..h.current() and must return true at the final index.
template <class P>
concept TriggerPolicy = requires(const P& p, const PosteriorHistory& h) {
  { p.should_trigger(h) } -> std::convertible_to<bool>;
};

namespace detail {

inline void check_cube(const ProbabilityCube& cube, const CostMatrices& cost) {
  if (cube.n == 0 || cube.m == 0) throw EmptyCube("calibration cube has no series");
  if (cube.m != cost.n_timestamps())
    throw TimestampMismatch("cube has " + std::to_string(cube.m) +
                            " timestamps, cost setting has " +
                            std::to_string(cost.n_timestamps()));
  if (cube.n_classes != cost.n_classes())
    throw TimestampMismatch("cube has " + std::to_string(cube.n_classes) +
                            " classes, cost setting has " +
                            std::to_string(cost.n_classes()));
}

inline void check_calibration_cube(const ProbabilityCube& cube,
                                   const CostMatrices& cost) {
  check_cube(cube, cost);
  if (cube.provenance != Provenance::out_of_fold)
    throw InvalidParam("trigger models calibrate on out-of-fold posteriors only");
}

}  // namespace detail

/// Timestamp index at which the policy stops on series i: the first index
/// where it fires, or the final one.
template <TriggerPolicy P>
std::size_t stop_index(const P& policy, const ProbabilityCube& cube, std::size_t i) {
  for (std::size_t k = 0; k + 1 < cube.m; ++k)
    if (policy.should_trigger(cube.history(i, k))) return k;
  return cube.m - 1;
}

/// Mean decision cost of running the policy over every calibration series.
/// This is the objective all grid-searched trigger models minimize.
template <TriggerPolicy P>
double simulate_policy(const P& policy, const ProbabilityCube& cube,
                       const CostMatrices& cost) {
  detail::check_cube(cube, cost);
  double total = 0.0;
  for (std::size_t i = 0; i < cube.n; ++i) {
    const auto k = stop_index(policy, cube, i);
    total += cost.table(k)(cube.labels[i], argmax(cube.at(i, k)));
  }
  return total / static_cast<double>(cube.n);
}

/// Mean cost of always deciding at timestamp index k.
inline double fixed_time_cost(const ProbabilityCube& cube, const CostMatrices& cost,
                              std::size_t k) {
  detail::check_cube(cube, cost);
  double total = 0.0;
  for (std::size_t i = 0; i < cube.n; ++i)
    total += cost.table(k)(cube.labels[i], argmax(cube.at(i, k)));
  return total / static_cast<double>(cube.n);
}

struct GridResult {
  std::size_t best = 0;
  double best_cost = 0.0;
  std::vector<double> costs;  // one per candidate, in candidate order
};

/// Evaluates make(c) for c in [0, n_candidates) concurrently and picks the
/// lowest simulated cost; ties go to the lowest candidate index, so callers
/// order candidates by their tie-break key.
template <class Make>
GridResult grid_search(std::size_t n_candidates, Make&& make, const ProbabilityCube& cube,
                       const CostMatrices& cost, std::size_t jobs) {
  GridResult r;
  r.costs.assign(n_candidates, std::numeric_limits<double>::infinity());
  parallel_for(n_candidates, jobs, [&](std::size_t c) {
    r.costs[c] = simulate_policy(make(c), cube, cost);
  });
  for (std::size_t c = 1; c < n_candidates; ++c)
    if (r.costs[c] < r.costs[r.best]) r.best = c;
  r.best_cost = r.costs.empty() ? 0.0 : r.costs[r.best];
  return r;
}

/// t_k / max_T for every timestamp index.
inline std::vector<double> time_fractions(const CostMatrices& cost) {
  std::vector<double> f(cost.n_timestamps());
  for (std::size_t k = 0; k < f.size(); ++k) f[k] = cost.time_fraction(k);
  return f;
}

/// {0, 1/steps, ..., 1}, each value computed as i / steps.
inline std::vector<double> unit_grid(std::size_t steps = 100) {
  std::vector<double> g(steps + 1);
  for (std::size_t i = 0; i <= steps; ++i)
    g[i] = static_cast<double>(i) / static_cast<double>(steps);
  return g;
}

}  // namespace edm
