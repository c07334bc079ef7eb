#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <boost/math/distributions/normal.hpp>

#include "oac/numerics.hpp"

namespace oac {

enum class QuantizerFamily { Uniform, LloydMax };

/// Immutable set of 2^N scalar quantization levels, sorted ascending.
///
/// Uniform codebooks hold angles on [0, 2pi) and are used with
/// quantize_circular. Lloyd-Max codebooks are optimal for a zero-mean
/// Gaussian of the recorded training variance and are used with
/// quantize_linear on the real line.
class QuantizerCodebook {
 public:
  const std::vector<double>& levels() const { return levels_; }
  unsigned bits() const { return bits_; }
  QuantizerFamily family() const { return family_; }
  std::size_t size() const { return levels_.size(); }

  /// Present only for Lloyd-Max codebooks.
  std::optional<double> training_variance() const { return training_variance_; }

 private:
  QuantizerCodebook(std::vector<double> levels, unsigned bits, QuantizerFamily family,
                    std::optional<double> training_variance)
      : levels_(std::move(levels)),
        bits_(bits),
        family_(family),
        training_variance_(training_variance) {}

  friend QuantizerCodebook uniform_codebook(unsigned bits);
  friend QuantizerCodebook make_lloyd_max_codebook(std::vector<double> levels, unsigned bits,
                                                   double variance);

  std::vector<double> levels_;
  unsigned bits_;
  QuantizerFamily family_;
  std::optional<double> training_variance_;
};

inline constexpr unsigned kMaxQuantizerBits = 20;

/// Levels i*pi/2^(N-1), i = 0 .. 2^N-1, evenly spread on the circle from 0.
inline QuantizerCodebook uniform_codebook(unsigned bits) {
  if (bits == 0) throw ConfigError("uniform_codebook: bits must be >= 1");
  if (bits > kMaxQuantizerBits) throw ConfigError("uniform_codebook: bits too large");
  const std::size_t count = std::size_t{1} << bits;
  const double step = kPi / std::ldexp(1.0, static_cast<int>(bits) - 1);
  std::vector<double> levels(count);
  for (std::size_t i = 0; i < count; ++i) levels[i] = static_cast<double>(i) * step;
  return QuantizerCodebook(std::move(levels), bits, QuantizerFamily::Uniform, std::nullopt);
}

inline QuantizerCodebook make_lloyd_max_codebook(std::vector<double> levels, unsigned bits,
                                                 double variance) {
  return QuantizerCodebook(std::move(levels), bits, QuantizerFamily::LloydMax, variance);
}

/// Lloyd iteration did not settle. Carries the last iterate for diagnosis.
class LloydMaxConvergenceError : public NumericalError {
 public:
  LloydMaxConvergenceError(std::vector<double> last_levels, double residual, std::size_t iterations)
      : NumericalError(describe(residual, iterations)),
        last_levels_(std::move(last_levels)),
        residual_(residual) {}

  const std::vector<double>& last_levels() const { return last_levels_; }
  double residual() const { return residual_; }

 private:
  static std::string describe(double residual, std::size_t iterations) {
    std::ostringstream os;
    os << "lloyd_max_codebook: no convergence after " << iterations
       << " iterations (max level change " << residual << ")";
    return os.str();
  }

  std::vector<double> last_levels_;
  double residual_;
};

struct LloydMaxOptions {
  double tolerance = 1e-10;
  std::size_t max_iterations = 10000;
};

namespace detail {

/// E[Z | lo < Z < hi] for standard normal Z; infinite bounds allowed.
inline double std_normal_conditional_mean(double lo, double hi) {
  const double mass = std_normal_interval(lo, hi);
  const double pdf_lo = std::isinf(lo) ? 0.0 : std_normal_pdf(lo);
  const double pdf_hi = std::isinf(hi) ? 0.0 : std_normal_pdf(hi);
  if (mass <= 0.0) {
    // Cell lies beyond double-precision reach of the density; its centroid
    // is indistinguishable from its midpoint.
    if (std::isinf(lo)) return hi;
    if (std::isinf(hi)) return lo;
    return 0.5 * (lo + hi);
  }
  return (pdf_lo - pdf_hi) / mass;
}

/// Decision boundaries of a sorted level set: -inf, midpoints, +inf.
inline std::vector<double> midpoint_boundaries(const std::vector<double>& levels) {
  std::vector<double> bounds(levels.size() + 1);
  bounds.front() = -HUGE_VAL;
  bounds.back() = HUGE_VAL;
  for (std::size_t i = 1; i < levels.size(); ++i) bounds[i] = 0.5 * (levels[i - 1] + levels[i]);
  return bounds;
}

inline double max_change(const std::vector<double>& a, const std::vector<double>& b) {
  double change = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) change = std::max(change, std::abs(a[i] - b[i]));
  return change;
}

/// One Lloyd update in standardized units: midpoint boundaries, then
/// centroids. Returns the largest level change.
inline double lloyd_step(std::vector<double>& levels) {
  const auto bounds = midpoint_boundaries(levels);
  std::vector<double> updated(levels.size());
  for (std::size_t i = 0; i < levels.size(); ++i) {
    updated[i] = std_normal_conditional_mean(bounds[i], bounds[i + 1]);
  }
  const double change = max_change(updated, levels);
  levels = std::move(updated);
  return change;
}

/// One Newton step on the fixed-point equation centroid(q) - q = 0.
///
/// Cell i's centroid m depends on its two boundaries a, b with
///   dm/da = pdf(a) (m - a) / P,   dm/db = pdf(b) (b - m) / P,
/// and each boundary is the midpoint of its two neighbouring levels, so
/// the Jacobian is tridiagonal. Returns nullopt if the step would break
/// the level ordering; the caller then takes a Lloyd step instead.
inline std::optional<double> newton_step(std::vector<double>& levels) {
  const std::size_t n = levels.size();
  const auto bounds = midpoint_boundaries(levels);
  std::vector<double> residual(n);
  std::vector<double> lower(n, 0.0);
  std::vector<double> diag(n);
  std::vector<double> upper(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double a = bounds[i];
    const double b = bounds[i + 1];
    const double mass = std_normal_interval(a, b);
    if (!(mass > 0.0)) return std::nullopt;
    const double m = std_normal_conditional_mean(a, b);
    const double dm_da = std::isinf(a) ? 0.0 : std_normal_pdf(a) * (m - a) / mass;
    const double dm_db = std::isinf(b) ? 0.0 : std_normal_pdf(b) * (b - m) / mass;
    residual[i] = m - levels[i];
    if (i > 0) lower[i] = 0.5 * dm_da;
    diag[i] = 0.5 * (dm_da + dm_db) - 1.0;
    if (i + 1 < n) upper[i] = 0.5 * dm_db;
  }
  // Thomas algorithm for J * step = -residual.
  std::vector<double> c(n);
  std::vector<double> d(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double denom = diag[i] - (i > 0 ? lower[i] * c[i - 1] : 0.0);
    if (denom == 0.0 || !std::isfinite(denom)) return std::nullopt;
    c[i] = upper[i] / denom;
    d[i] = (-residual[i] - (i > 0 ? lower[i] * d[i - 1] : 0.0)) / denom;
  }
  std::vector<double> updated(levels);
  double next = 0.0;
  for (std::size_t i = n; i-- > 0;) {
    next = d[i] - (i + 1 < n ? c[i] * next : 0.0);
    updated[i] += next;
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(updated[i]) || (i > 0 && !(updated[i - 1] < updated[i]))) {
      return std::nullopt;
    }
  }
  const double change = max_change(updated, levels);
  levels = std::move(updated);
  return change;
}

/// Below this level change (standardized units) Lloyd iteration hands
/// over to Newton steps.
inline constexpr double kNewtonHandover = 1e-3;

}  // namespace detail

/// Gaussian-optimal scalar quantizer for N(0, variance).
///
/// Starts from the centroids of the 2^N equiprobable cells and iterates
/// until the largest level change (in the units of the data) drops below
/// options.tolerance. Plain Lloyd iteration converges only linearly for
/// many levels (contraction ~0.998 at N = 6), so once it is close it is
/// finished with Newton steps on the same fixed-point equation. Centroids
/// use the closed-form truncated normal mean; no sampling is involved.
inline QuantizerCodebook lloyd_max_codebook(unsigned bits, double variance,
                                            const LloydMaxOptions& options = {}) {
  if (bits == 0) throw ConfigError("lloyd_max_codebook: bits must be >= 1");
  if (bits > kMaxQuantizerBits) throw ConfigError("lloyd_max_codebook: bits too large");
  if (!(variance > 0.0) || !std::isfinite(variance)) {
    throw ConfigError("lloyd_max_codebook: variance must be positive and finite");
  }
  if (!(options.tolerance > 0.0) || options.max_iterations == 0) {
    throw ConfigError("lloyd_max_codebook: tolerance and max_iterations must be positive");
  }

  const std::size_t count = std::size_t{1} << bits;
  const double sigma = std::sqrt(variance);

  const boost::math::normal_distribution<double> unit;
  std::vector<double> levels(count);
  double lo = -HUGE_VAL;
  for (std::size_t i = 0; i < count; ++i) {
    const double hi = (i + 1 < count)
                          ? boost::math::quantile(unit, static_cast<double>(i + 1) /
                                                            static_cast<double>(count))
                          : HUGE_VAL;
    levels[i] = detail::std_normal_conditional_mean(lo, hi);
    lo = hi;
  }

  // Iterate in standardized units; the tolerance is in data units.
  const double standardized_tolerance = options.tolerance / sigma;
  double change = HUGE_VAL;
  std::size_t iteration = 0;
  while (iteration < options.max_iterations) {
    std::optional<double> newton;
    if (change < detail::kNewtonHandover) newton = detail::newton_step(levels);
    change = newton ? *newton : detail::lloyd_step(levels);
    ++iteration;
    if (change < standardized_tolerance) break;
  }
  for (double& level : levels) level *= sigma;
  if (!(change < standardized_tolerance)) {
    throw LloydMaxConvergenceError(std::move(levels), change * sigma, iteration);
  }
  return make_lloyd_max_codebook(std::move(levels), bits, variance);
}

/// Nearest level on the circle. The angle may be any finite real.
/// An exact tie goes to the smaller level value.
inline double quantize_circular(const QuantizerCodebook& codebook, double angle) {
  if (codebook.family() != QuantizerFamily::Uniform) {
    throw ConfigError("quantize_circular: requires a uniform codebook");
  }
  if (!std::isfinite(angle)) throw ConfigError("quantize_circular: angle must be finite");
  const auto& levels = codebook.levels();
  const double x = wrap_to_two_pi(angle);
  const auto above = std::upper_bound(levels.begin(), levels.end(), x);
  const double upper = (above == levels.end()) ? levels.front() : *above;
  const double lower = (above == levels.begin()) ? levels.back() : *(above - 1);
  const double d_lower = circular_distance(x, lower);
  const double d_upper = circular_distance(x, upper);
  if (d_lower < d_upper) return lower;
  if (d_upper < d_lower) return upper;
  return std::min(lower, upper);
}

/// Nearest level on the real line; an exact tie goes to the smaller level.
inline double quantize_linear(const QuantizerCodebook& codebook, double value) {
  if (codebook.family() != QuantizerFamily::LloydMax) {
    throw ConfigError("quantize_linear: requires a Lloyd-Max codebook");
  }
  if (!std::isfinite(value)) throw ConfigError("quantize_linear: value must be finite");
  const auto& levels = codebook.levels();
  const auto above = std::upper_bound(levels.begin(), levels.end(), value);
  if (above == levels.begin()) return levels.front();
  if (above == levels.end()) return levels.back();
  const double lower = *(above - 1);
  const double upper = *above;
  return (upper - value < value - lower) ? upper : lower;
}

/// Human-readable family name used by the CLI.
inline const char* to_string(QuantizerFamily family) {
  return family == QuantizerFamily::Uniform ? "uniform" : "lloyd-max";
}

}  // namespace oac
