#pragma once

#include <cstdint>
#include <random>

#include "oac/numerics.hpp"

namespace oac {

/// A single random substream. Each Monte Carlo trial owns one; nothing
/// here is shared between trials.
///
/// All Gaussian draws go through one std::normal_distribution instance so
/// two code paths that request the same sequence of draws from equally
/// seeded streams see identical values.
class RandomStream {
 public:
  using Engine = std::mt19937_64;

  explicit RandomStream(std::uint64_t seed) : engine_(seed) {}

  /// N(0, 1).
  double normal() { return normal_(engine_); }

  /// N(0, variance). Consumes one standard draw even when variance is zero.
  double normal(double variance) { return std::sqrt(variance) * normal(); }

  /// U[0, 1).
  double uniform() { return uniform_(engine_); }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Circularly symmetric CN(0, 1): independent N(0, 1/2) parts.
  Complex complex_normal() {
    const double re = normal();
    const double im = normal();
    return Complex(re, im) * (1.0 / std::numbers::sqrt2);
  }

  Engine& engine() { return engine_; }

 private:
  Engine engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

}  // namespace oac
