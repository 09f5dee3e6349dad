#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <vector>

namespace edm {

/// SplitMix64, a 64-bit counter-based generator.
///
/// The whole stream is a function of (seed, draw index):
///   state_i = seed + i * 0x9E3779B97F4A7C15   (i = 1, 2, ...)
///   out_i   = mix64(state_i)
/// so any port that reproduces `mix64` reproduces folds and synthetic data
/// bit for bit. Derived streams use `split(id)`, see below.
class SplitMix64 {
 public:
  static constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

  explicit constexpr SplitMix64(std::uint64_t seed) noexcept : state_(seed) {}

  static constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  constexpr std::uint64_t next() noexcept {
    state_ += kGolden;
    return mix64(state_);
  }

  /// Independent child stream: seed' = mix64(state ^ mix64(id + golden)).
  /// Does not advance the parent.
  constexpr SplitMix64 split(std::uint64_t id) const noexcept {
    return SplitMix64(mix64(state_ ^ mix64(id + kGolden)));
  }

  /// Uniform in [0, 1) with 53 random bits.
  double uniform() noexcept {
    return static_cast<double>(next() >> 11) * 0x1.0p-53;
  }

  /// Uniform integer in [0, n) by 128-bit multiply-high (no modulo).
  std::uint64_t below(std::uint64_t n) noexcept {
    __extension__ using u128 = unsigned __int128;
    return static_cast<std::uint64_t>((static_cast<u128>(next()) * n) >> 64);
  }

  /// Standard normal by Box-Muller (cosine branch only, two draws per call).
  double normal() noexcept {
    const double u1 = 1.0 - uniform();  // (0, 1]
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * std::numbers::pi * u2);
  }

  /// Fisher-Yates, walking from the back.
  template <class T>
  void shuffle(std::vector<T>& v) noexcept {
    for (std::size_t i = v.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(below(i));
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  std::uint64_t state_;
};

}  // namespace edm
