#pragma once

#include <algorithm>
#include <vector>

#include "edm/triggers/policy.hpp"

namespace edm {

/// Fire as soon as the top posterior reaches theta.
struct ThresholdState {
  double theta = 0.5;
  std::size_t n_timestamps = 0;

  bool should_trigger(const PosteriorHistory& h) const {
    if (h.current() + 1 >= n_timestamps) return true;
    const auto p = h.back();
    return *std::max_element(p.begin(), p.end()) >= theta;
  }

  friend bool operator==(const ThresholdState&, const ThresholdState&) = default;
};

/// theta from `grid` (default 0.00, 0.01, ..., 1.00) minimizing the simulated
/// calibration cost; ties go to the earliest grid entry.
inline ThresholdState fit_threshold(const ProbabilityCube& cube, const CostMatrices& cost,
                                    const std::vector<double>& grid = unit_grid(),
                                    std::size_t jobs = 1) {
  detail::check_calibration_cube(cube, cost);
  if (grid.empty()) throw InvalidParam("threshold grid empty");
  auto make = [&](std::size_t c) { return ThresholdState{grid[c], cube.m}; };
  const auto r = grid_search(grid.size(), make, cube, cost, jobs);
  return make(r.best);
}

}  // namespace edm
