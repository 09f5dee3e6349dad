#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "edm/binary_io.hpp"
#include "edm/error.hpp"
#include "edm/matrix.hpp"

namespace edm {

/// Plug-in point for base classifiers: anything that maps a prefix to a
/// probability vector over n_classes (non-negative, summing to 1).
class ProbabilisticClassifier {
 public:
  virtual ~ProbabilisticClassifier() = default;

  virtual std::size_t n_classes() const = 0;
  virtual std::vector<double> posterior(std::span<const double> prefix) const = 0;

  /// Short identifier, also the tag used in serialized collections.
  virtual std::string tag() const = 0;

  /// Only built-in models can be saved; the default refuses.
  virtual void save(BinaryWriter&) const {
    throw FormatError("classifier \"" + tag() + "\" is not serializable");
  }
};

using ClassifierPtr = std::shared_ptr<const ProbabilisticClassifier>;

/// Trains one member on an (n x t) prefix matrix.
using ClassifierTrainer = std::function<ClassifierPtr(
    const Matrix& prefixes, std::span<const std::size_t> labels,
    std::size_t n_classes)>;

/// Index of the largest entry; ties go to the lowest index.
inline std::size_t argmax(std::span<const double> p) noexcept {
  std::size_t best = 0;
  for (std::size_t c = 1; c < p.size(); ++c)
    if (p[c] > p[best]) best = c;
  return best;
}

/// Largest and second-largest entries (second is 0 for a single class).
inline std::pair<double, double> top_two(std::span<const double> p) noexcept {
  const auto best = argmax(p);
  double second = 0.0;
  bool seen = false;
  for (std::size_t c = 0; c < p.size(); ++c) {
    if (c == best) continue;
    if (!seen || p[c] > second) second = p[c];
    seen = true;
  }
  return {p[best], second};
}

}  // namespace edm
