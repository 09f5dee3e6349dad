#pragma once

#include <cmath>
#include <concepts>
#include <type_traits>
#include <utility>
#include <vector>

#include "edm/triggers/policy.hpp"

namespace edm {

/// Linear model with an unpenalized intercept.
struct RidgeRegressor {
  std::vector<double> weights;
  double intercept = 0.0;

  double predict(std::span<const double> x) const {
    double s = intercept;
    for (std::size_t j = 0; j < weights.size(); ++j) s += weights[j] * x[j];
    return s;
  }

  friend bool operator==(const RidgeRegressor&, const RidgeRegressor&) = default;
};

/// Solves (Xc^T Xc + lambda I) w = Xc^T yc on centered data by Cholesky;
/// intercept = mean(y) - mean(x) . w.
inline RidgeRegressor fit_ridge(const Matrix& x, std::span<const double> y, double lambda) {
  if (!(lambda > 0.0)) throw InvalidParam("ridge penalty must be > 0");
  const std::size_t n = x.rows(), d = x.cols();
  if (n == 0) throw EmptyTrainingSet("ridge needs rows");

  std::vector<double> xm(d, 0.0);
  double ym = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < d; ++j) xm[j] += x(i, j);
    ym += y[i];
  }
  for (auto& v : xm) v /= static_cast<double>(n);
  ym /= static_cast<double>(n);

  Matrix a(d, d, 0.0);
  std::vector<double> b(d, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < d; ++j) {
      const double xj = x(i, j) - xm[j];
      b[j] += xj * (y[i] - ym);
      for (std::size_t l = 0; l <= j; ++l) a(j, l) += xj * (x(i, l) - xm[l]);
    }
  for (std::size_t j = 0; j < d; ++j) a(j, j) += lambda;

  // In-place lower Cholesky factor, then forward and back substitution.
  for (std::size_t j = 0; j < d; ++j) {
    double diag = a(j, j);
    for (std::size_t l = 0; l < j; ++l) diag -= a(j, l) * a(j, l);
    diag = std::sqrt(diag);
    a(j, j) = diag;
    for (std::size_t r = j + 1; r < d; ++r) {
      double s = a(r, j);
      for (std::size_t l = 0; l < j; ++l) s -= a(r, l) * a(j, l);
      a(r, j) = s / diag;
    }
  }
  std::vector<double> z(d);
  for (std::size_t j = 0; j < d; ++j) {
    double s = b[j];
    for (std::size_t l = 0; l < j; ++l) s -= a(j, l) * z[l];
    z[j] = s / a(j, j);
  }
  RidgeRegressor r;
  r.weights.assign(d, 0.0);
  for (std::size_t j = d; j-- > 0;) {
    double s = z[j];
    for (std::size_t l = j + 1; l < d; ++l) s -= a(l, j) * r.weights[l];
    r.weights[j] = s / a(j, j);
  }
  r.intercept = ym;
  for (std::size_t j = 0; j < d; ++j) r.intercept -= xm[j] * r.weights[j];
  return r;
}

/// [posterior vector, p1 - p2, t_k / max_T]
inline std::vector<double> calimera_features(std::span<const double> posterior,
                                             double time_fraction) {
  std::vector<double> f(posterior.begin(), posterior.end());
  const auto [p1, p2] = top_two(posterior);
  f.push_back(p1 - p2);
  f.push_back(time_fraction);
  return f;
}

/// One regressor per non-final index predicting (best reachable future cost -
/// cost of deciding now); the policy halts when that prediction is >= 0.
template <class Regressor>
struct CalimeraPolicy {
  std::vector<Regressor> regressors;    // m - 1
  std::vector<double> time_fractions;   // m

  std::size_t n_timestamps() const noexcept { return time_fractions.size(); }

  double predicted_gain_of_waiting(const PosteriorHistory& h) const {
    const auto k = h.current();
    return regressors[k].predict(calimera_features(h.back(), time_fractions[k]));
  }

  bool should_trigger(const PosteriorHistory& h) const {
    if (h.current() + 1 >= n_timestamps()) return true;
    return predicted_gain_of_waiting(h) >= 0.0;
  }

  friend bool operator==(const CalimeraPolicy&, const CalimeraPolicy&) = default;
};

using CalimeraState = CalimeraPolicy<RidgeRegressor>;

/// Backward recursion over the calibration series. With
/// now(k, i) = misclf[y_i][argmax_k] + D(t_k) and best(m-1, i) = now(m-1, i),
/// regressor k is fit on targets best(k+1, i) - now(k, i), then
/// best(k, i) = now(k, i) if its prediction is >= 0, else best(k+1, i).
///
/// `fit(features, targets)` returns any type with predict(span) -> double.
template <class Fit>
  requires std::invocable<Fit&, const Matrix&, std::span<const double>>
auto fit_calimera(const ProbabilityCube& cube, const CostMatrices& cost, Fit&& fit) {
  detail::check_calibration_cube(cube, cost);
  using Regressor = std::decay_t<std::invoke_result_t<Fit&, const Matrix&, std::span<const double>>>;
  const std::size_t n = cube.n, m = cube.m;

  CalimeraPolicy<Regressor> policy;
  policy.time_fractions = time_fractions(cost);

  auto now_cost = [&](std::size_t i, std::size_t k) {
    return cost.table(k)(cube.labels[i], argmax(cube.at(i, k)));
  };
  std::vector<double> best(n);
  for (std::size_t i = 0; i < n; ++i) best[i] = now_cost(i, m - 1);

  std::vector<Regressor> backwards;
  for (std::size_t k = m - 1; k-- > 0;) {
    const std::size_t dim = cube.n_classes + 2;
    Matrix features(n, dim);
    std::vector<double> targets(n), now(n);
    for (std::size_t i = 0; i < n; ++i) {
      const auto f = calimera_features(cube.at(i, k), policy.time_fractions[k]);
      std::copy(f.begin(), f.end(), features.row(i).begin());
      now[i] = now_cost(i, k);
      targets[i] = best[i] - now[i];
    }
    Regressor reg = fit(std::as_const(features), std::span<const double>(targets));
    for (std::size_t i = 0; i < n; ++i)
      if (reg.predict(features.row(i)) >= 0.0) best[i] = now[i];
    backwards.push_back(std::move(reg));
  }
  policy.regressors.assign(std::make_move_iterator(backwards.rbegin()),
                           std::make_move_iterator(backwards.rend()));
  return policy;
}

inline CalimeraState fit_calimera(const ProbabilityCube& cube, const CostMatrices& cost,
                                  double lambda = 1.0) {
  if (!(lambda > 0.0)) throw InvalidParam("CALIMERA ridge penalty must be > 0");
  return fit_calimera(cube, cost, [lambda](const Matrix& x, std::span<const double> y) {
    return fit_ridge(x, y, lambda);
  });
}

}  // namespace edm
