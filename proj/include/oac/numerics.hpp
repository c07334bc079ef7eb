#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>

namespace oac {

using Complex = std::complex<double>;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Invalid configuration or violated precondition.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Iterative numerical routine that failed to reach its tolerance.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Reduces an angle to [0, 2pi).
inline double wrap_to_two_pi(double angle) {
  double r = std::fmod(angle, kTwoPi);
  if (r < 0.0) r += kTwoPi;
  // fmod of a tiny negative value can round back up to 2pi
  if (r >= kTwoPi) r = 0.0;
  return r;
}

/// Reduces an angle to (-pi, pi].
inline double wrap_to_pi(double angle) {
  double r = wrap_to_two_pi(angle);
  return r > kPi ? r - kTwoPi : r;
}

/// Length of the shorter arc between two angles, in [0, pi].
inline double circular_distance(double a, double b) {
  return std::abs(wrap_to_pi(a - b));
}

/// Standard normal density.
inline double std_normal_pdf(double x) {
  return std::exp(-0.5 * x * x) / std::sqrt(kTwoPi);
}

/// Upper tail Q(x) = P(Z > x). Uses erfc, so the tail keeps full relative
/// precision out to |x| ~ 37 instead of cancelling against 1.
inline double std_normal_upper_tail(double x) {
  return 0.5 * std::erfc(x / std::numbers::sqrt2);
}

inline double std_normal_cdf(double x) { return std_normal_upper_tail(-x); }

/// P(lo < Z < hi) for a standard normal Z, evaluated on whichever side of
/// zero avoids subtracting two numbers close to one.
inline double std_normal_interval(double lo, double hi) {
  if (lo >= 0.0) return std_normal_upper_tail(lo) - std_normal_upper_tail(hi);
  if (hi <= 0.0) return std_normal_cdf(hi) - std_normal_cdf(lo);
  return 1.0 - std_normal_upper_tail(hi) - std_normal_cdf(lo);
}

/// Neumaier-compensated running sum. Addition order is the caller's, so a
/// fixed order gives a bit-stable result.
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      compensation_ += (sum_ - t) + x;
    } else {
      compensation_ += (x - t) + sum_;
    }
    sum_ = t;
  }

  void merge(const CompensatedSum& other) {
    add(other.sum_);
    add(other.compensation_);
  }

  double value() const { return sum_ + compensation_; }

 private:
  double sum_ = 0.0;
  double compensation_ = 0.0;
};

/// Sample mean and standard error of the mean.
struct MeanEstimate {
  double mean = 0.0;
  double standard_error = 0.0;
};

/// Streaming first and second moments with compensated sums; merging
/// partial accumulators in a fixed order keeps the result deterministic.
class MomentAccumulator {
 public:
  void add(double x) {
    sum_.add(x);
    sum_sq_.add(x * x);
    ++count_;
  }

  void merge(const MomentAccumulator& other) {
    sum_.merge(other.sum_);
    sum_sq_.merge(other.sum_sq_);
    count_ += other.count_;
  }

  std::size_t count() const { return count_; }

  MeanEstimate estimate() const {
    if (count_ == 0) throw ConfigError("MomentAccumulator: no samples");
    const double n = static_cast<double>(count_);
    const double mean = sum_.value() / n;
    if (count_ == 1) return {mean, 0.0};
    double var = (sum_sq_.value() - n * mean * mean) / (n - 1.0);
    if (var < 0.0) var = 0.0;
    return {mean, std::sqrt(var / n)};
  }

 private:
  CompensatedSum sum_;
  CompensatedSum sum_sq_;
  std::size_t count_ = 0;
};

}  // namespace oac
