#pragma once

#include <cmath>
#include <complex>
#include <span>
#include <vector>

#include "oac/numerics.hpp"

namespace oac {

struct RoundOutcome {
  Complex true_sum;
  Complex estimate;
  double squared_error = 0.0;
};

/// One over-the-air aggregation with channel inversion a_k = e^{-j phi_hat}/|g_k|
/// and b = 1. Amplitudes cancel exactly, so the AP receives
/// sum_k v_k e^{j delta_k} + n.
inline RoundOutcome oac_round(std::span<const Complex> values,
                              std::span<const double> phase_errors, Complex noise) {
  if (values.empty()) throw ConfigError("oac_round: need at least one device");
  if (values.size() != phase_errors.size()) {
    throw ConfigError("oac_round: values and phase errors differ in length");
  }
  Complex sum{0.0, 0.0};
  Complex received{0.0, 0.0};
  for (std::size_t k = 0; k < values.size(); ++k) {
    sum += values[k];
    received += values[k] * std::polar(1.0, phase_errors[k]);
  }
  RoundOutcome outcome;
  outcome.true_sum = sum;
  outcome.estimate = received + noise;
  outcome.squared_error = std::norm(outcome.estimate - outcome.true_sum);
  return outcome;
}

/// Closed-form Variant A MSE with uniform N-bit phase feedback,
/// unit-variance values, channels and noise:
///   2K (1 - (2^N / pi) sin(pi / 2^N)) + 1.
inline double lemma1_mse(unsigned device_count, unsigned bits) {
  if (device_count == 0) throw ConfigError("lemma1_mse: K must be >= 1");
  if (bits == 0) throw ConfigError("lemma1_mse: N must be >= 1 (use no_feedback_mse)");
  const double levels = std::ldexp(1.0, static_cast<int>(bits));
  const double mean_phasor = levels / kPi * std::sin(kPi / levels);
  return 2.0 * device_count * (1.0 - mean_phasor) + 1.0;
}

/// Variant A without feedback: the residual phase is uniform on the whole
/// circle, its mean phasor vanishes, and the MSE is 2K + 1.
inline double no_feedback_mse(unsigned device_count) {
  if (device_count == 0) throw ConfigError("no_feedback_mse: K must be >= 1");
  return 2.0 * device_count + 1.0;
}

/// Mean and standard error of per-trial squared errors. Two passes, each a
/// compensated sum in index order.
inline MeanEstimate empirical_mse(std::span<const double> squared_errors) {
  if (squared_errors.empty()) throw ConfigError("empirical_mse: empty sample");
  const double n = static_cast<double>(squared_errors.size());
  CompensatedSum sum;
  for (double x : squared_errors) sum.add(x);
  const double mean = sum.value() / n;
  if (squared_errors.size() == 1) return {mean, 0.0};
  CompensatedSum deviations;
  for (double x : squared_errors) deviations.add((x - mean) * (x - mean));
  const double variance = deviations.value() / (n - 1.0);
  return {mean, std::sqrt(variance / n)};
}

}  // namespace oac
