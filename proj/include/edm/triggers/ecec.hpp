#pragma once

#include <vector>

#include "edm/triggers/policy.hpp"

namespace edm {

/// Fused-confidence trigger. r_k(c) is the smoothed precision of predicting c
/// at index k; the confidence in the current prediction c fuses every index
/// so far that also predicted c:
///   conf = 1 - prod_{j <= k, argmax_j = c} (1 - r_j(c)).
struct EcecState {
  Matrix reliability;  // m x n_classes
  double theta = 0.5;

  std::size_t n_timestamps() const noexcept { return reliability.rows(); }

  double confidence(const PosteriorHistory& h) const {
    const auto c = argmax(h.back());
    double keep = 1.0;
    for (std::size_t j = 0; j < h.size(); ++j)
      if (argmax(h[j]) == c) keep *= 1.0 - reliability(j, c);
    return 1.0 - keep;
  }

  bool should_trigger(const PosteriorHistory& h) const {
    if (h.current() + 1 >= n_timestamps()) return true;
    return confidence(h) >= theta;
  }

  friend bool operator==(const EcecState&, const EcecState&) = default;
};

/// r_k(c) = (#correct predictions of c at k + 1) / (#predictions of c at k + 2).
inline Matrix ecec_reliability(const ProbabilityCube& cube) {
  Matrix hits(cube.m, cube.n_classes, 0.0), total(cube.m, cube.n_classes, 0.0);
  for (std::size_t i = 0; i < cube.n; ++i)
    for (std::size_t k = 0; k < cube.m; ++k) {
      const auto c = argmax(cube.at(i, k));
      total(k, c) += 1.0;
      if (c == cube.labels[i]) hits(k, c) += 1.0;
    }
  Matrix r(cube.m, cube.n_classes);
  for (std::size_t k = 0; k < cube.m; ++k)
    for (std::size_t c = 0; c < cube.n_classes; ++c)
      r(k, c) = (hits(k, c) + 1.0) / (total(k, c) + 2.0);
  return r;
}

inline EcecState fit_ecec(const ProbabilityCube& cube, const CostMatrices& cost,
                          const std::vector<double>& grid = unit_grid(),
                          std::size_t jobs = 1) {
  detail::check_calibration_cube(cube, cost);
  if (grid.empty()) throw InvalidParam("ECEC grid empty");
  const auto r = ecec_reliability(cube);
  auto make = [&](std::size_t c) { return EcecState{r, grid[c]}; };
  return make(grid_search(grid.size(), make, cube, cost, jobs).best);
}

}  // namespace edm
