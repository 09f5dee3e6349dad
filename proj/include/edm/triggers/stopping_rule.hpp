#pragma once

#include <array>
#include <vector>

#include "edm/triggers/policy.hpp"

namespace edm {

/// Linear stopping rule
///   SR = g1 * p1 + g2 * (p1 - p2) + g3 * t_k / max_T,
/// firing when SR >= 0 (p1, p2 are the two largest posteriors).
struct StoppingRuleState {
  std::array<double, 3> gamma{0.0, 0.0, 0.0};
  std::vector<double> time_fractions;  // t_k / max_T per timestamp index

  double rule(const PosteriorHistory& h) const {
    const auto [p1, p2] = top_two(h.back());
    return gamma[0] * p1 + gamma[1] * (p1 - p2) + gamma[2] * time_fractions[h.current()];
  }

  bool should_trigger(const PosteriorHistory& h) const {
    if (h.current() + 1 >= time_fractions.size()) return true;
    return rule(h) >= 0.0;
  }

  friend bool operator==(const StoppingRuleState&, const StoppingRuleState&) = default;
};

/// {-1, -0.9, ..., 1}, entry i computed as (i - 10) / 10.
inline std::vector<double> stopping_rule_axis() {
  std::vector<double> g(21);
  for (int i = 0; i <= 20; ++i) g[i] = static_cast<double>(i - 10) / 10.0;
  return g;
}

/// Exhaustive search over the 21^3 coefficient grid; candidates are visited
/// in lexicographic order so ties resolve to the smallest triple.
inline StoppingRuleState fit_stopping_rule(const ProbabilityCube& cube,
                                           const CostMatrices& cost,
                                           std::size_t jobs = 1) {
  detail::check_calibration_cube(cube, cost);
  const auto axis = stopping_rule_axis();
  const auto fractions = time_fractions(cost);
  const std::size_t a = axis.size();
  auto make = [&](std::size_t c) {
    return StoppingRuleState{{axis[c / (a * a)], axis[(c / a) % a], axis[c % a]}, fractions};
  };
  const auto r = grid_search(a * a * a, make, cube, cost, jobs);
  return make(r.best);
}

}  // namespace edm
