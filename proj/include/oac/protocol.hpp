#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "oac/channel_model.hpp"
#include "oac/numerics.hpp"
#include "oac/quantizer.hpp"
#include "oac/random.hpp"

namespace oac {

/// Per-device signed phase error phi_k - phi_hat_k entering the OAC round.
using PhaseErrorVector = std::vector<double>;

/// What the AP sends back on the error-free feedback link.
///
///   None      no feedback round at all (N = 0)
///   Exact     unquantized feedback, the N -> infinity idealization
///   Codebook  a uniform codebook (circular metric) or a Lloyd-Max
///             codebook (linear metric), chosen by the codebook family
class PhaseFeedback {
 public:
  enum class Mode { None, Exact, Codebook };

  static PhaseFeedback none() { return PhaseFeedback(Mode::None, std::nullopt); }
  static PhaseFeedback exact() { return PhaseFeedback(Mode::Exact, std::nullopt); }
  static PhaseFeedback quantized(QuantizerCodebook codebook) {
    return PhaseFeedback(Mode::Codebook, std::move(codebook));
  }

  Mode mode() const { return mode_; }
  bool active() const { return mode_ != Mode::None; }
  const std::optional<QuantizerCodebook>& codebook() const { return codebook_; }

  /// Feedback value for an AP-side measurement. Identity in Exact mode.
  double quantize(double x) const {
    switch (mode_) {
      case Mode::Exact:
        return x;
      case Mode::Codebook:
        return codebook_->family() == QuantizerFamily::Uniform ? quantize_circular(*codebook_, x)
                                                               : quantize_linear(*codebook_, x);
      case Mode::None:
        break;
    }
    throw ConfigError("PhaseFeedback: quantize called without feedback");
  }

 private:
  PhaseFeedback(Mode mode, std::optional<QuantizerCodebook> codebook)
      : mode_(mode), codebook_(std::move(codebook)) {}

  Mode mode_;
  std::optional<QuantizerCodebook> codebook_;
};

// ---------------------------------------------------------------------------
// Variant A: amplitude from reciprocity, phase from quantized feedback only.
// ---------------------------------------------------------------------------

namespace detail {

inline void check_variant_a_feedback(const PhaseFeedback& feedback) {
  if (feedback.mode() == PhaseFeedback::Mode::Codebook &&
      feedback.codebook()->family() != QuantizerFamily::Uniform) {
    throw ConfigError("Variant A feeds back with a uniform codebook");
  }
}

}  // namespace detail

/// Variant A phase errors for given channel phases. Devices start from the
/// amplitude-only estimate |g_k| (phase 0); the AP measures phi_k on the
/// precoded uplink pilot and feeds back Q(phi_k). Errors are wrapped to
/// (-pi, pi], which for N >= 1 means [-pi/2^N, pi/2^N]. Without feedback
/// the error is the phase itself.
inline PhaseErrorVector variant_a_phase_errors(std::span<const double> channel_phases,
                                               const PhaseFeedback& feedback) {
  detail::check_variant_a_feedback(feedback);
  PhaseErrorVector errors(channel_phases.size());
  for (std::size_t k = 0; k < errors.size(); ++k) {
    const double phase = channel_phases[k];
    errors[k] = feedback.active() ? wrap_to_pi(phase - feedback.quantize(phase)) : phase;
  }
  return errors;
}

/// One Variant A estimation round with channel phases uniform on [0, 2pi).
/// Stateless: amplitude calibration is done once and never drifts.
inline PhaseErrorVector variant_a_round(std::size_t device_count, const PhaseFeedback& feedback,
                                        RandomStream& rng) {
  if (device_count == 0) throw ConfigError("variant_a_round: device_count must be >= 1");
  detail::check_variant_a_feedback(feedback);
  PhaseErrorVector phases(device_count);
  for (auto& phase : phases) phase = rng.uniform(0.0, kTwoPi);
  return variant_a_phase_errors(phases, feedback);
}

// ---------------------------------------------------------------------------
// Variant B: amplitude and phase from calibrated reciprocity, with a
// Lloyd-Max quantized correction of each round's oscillator increment.
// ---------------------------------------------------------------------------

/// Everything that persists between Variant B rounds for one trial.
struct DeviceEstimationState {
  std::vector<CalibrationCoefficient> calibration;
  /// E_k: running sum of un-fed-back quantization residuals. Known to the
  /// AP, not to the devices. Zero right after calibration.
  std::vector<double> cumulative_residual;
  /// Sum of all feedback values each device has applied since calibration.
  std::vector<double> feedback_correction;
  std::size_t rounds_since_calibration = 0;
  std::size_t recalibration_period = 1;

  std::size_t device_count() const { return calibration.size(); }
  bool needs_recalibration() const { return rounds_since_calibration >= recalibration_period; }
};

/// Full joint-reciprocity calibration at t = 0.
inline DeviceEstimationState variant_b_init(std::size_t device_count,
                                            std::size_t recalibration_period,
                                            const HardwareProfile& hardware) {
  if (device_count == 0) throw ConfigError("variant_b_init: device_count must be >= 1");
  if (recalibration_period == 0) throw ConfigError("variant_b_init: period must be >= 1");
  if (hardware.device_count() != device_count) {
    throw ConfigError("variant_b_init: hardware profile has the wrong device count");
  }
  DeviceEstimationState state;
  state.calibration.reserve(device_count);
  for (std::size_t k = 0; k < device_count; ++k) state.calibration.push_back(calibrate(hardware, k));
  state.cumulative_residual.assign(device_count, 0.0);
  state.feedback_correction.assign(device_count, 0.0);
  state.rounds_since_calibration = 0;
  state.recalibration_period = recalibration_period;
  return state;
}

namespace detail {

inline void check_round_preconditions(const DeviceEstimationState& state,
                                      const PhaseFeedback& feedback, double drift_variance,
                                      const char* who) {
  if (state.needs_recalibration()) {
    throw ConfigError(std::string(who) + ": recalibration period elapsed, re-init first");
  }
  if (!(drift_variance >= 0.0)) throw ConfigError(std::string(who) + ": variance must be >= 0");
  if (feedback.mode() == PhaseFeedback::Mode::Codebook &&
      feedback.codebook()->family() != QuantizerFamily::LloydMax) {
    throw ConfigError(std::string(who) + ": Variant B feeds back with a Lloyd-Max codebook");
  }
}

}  // namespace detail

/// One Variant B round on the phase-only abstraction.
///
/// Oscillator increments are drawn one standard normal per device, in
/// device order, so a stream shared with apply_phase_drift produces the
/// same increments. The AP strips its stored residual from the uplink
/// observation, leaving the pure increment e_k. Being a measured phase it
/// is known modulo 2pi; the AP quantizes its principal value.
///
/// Returns delta_k = -E_k after this round's feedback and advances t.
inline PhaseErrorVector variant_b_round(DeviceEstimationState& state,
                                        const PhaseFeedback& feedback, double drift_variance,
                                        RandomStream& rng) {
  detail::check_round_preconditions(state, feedback, drift_variance, "variant_b_round");
  const std::size_t count = state.device_count();
  PhaseErrorVector errors(count);
  for (std::size_t k = 0; k < count; ++k) {
    // The device estimate rotates by -eps when its oscillator drifts by eps.
    const double increment = -rng.normal(drift_variance);
    double& residual = state.cumulative_residual[k];
    if (feedback.active()) {
      const double observed = wrap_to_pi(increment);
      const double fed_back = feedback.quantize(observed);
      residual += observed - fed_back;
      state.feedback_correction[k] += fed_back;
    } else {
      residual += increment;
    }
    errors[k] = -residual;
  }
  ++state.rounds_since_calibration;
  return errors;
}

/// The same round carried out on explicit hardware and channels.
///
/// Drifts the hardware, forms each device's reciprocity estimate from the
/// downlink, lets the AP compare it against the true uplink, and applies
/// the quantized correction. Consumes the random stream exactly like
/// variant_b_round; the channel realization comes from the caller.
inline PhaseErrorVector variant_b_full_fidelity_round(DeviceEstimationState& state,
                                                      HardwareProfile& hardware,
                                                      const ChannelRealization& realization,
                                                      const PhaseFeedback& feedback,
                                                      double drift_variance, RandomStream& rng) {
  detail::check_round_preconditions(state, feedback, drift_variance,
                                    "variant_b_full_fidelity_round");
  const std::size_t count = state.device_count();
  if (hardware.device_count() != count || realization.device_count() != count) {
    throw ConfigError("variant_b_full_fidelity_round: device count mismatch");
  }

  hardware = apply_phase_drift(hardware, drift_variance, rng);

  PhaseErrorVector errors(count);
  for (std::size_t k = 0; k < count; ++k) {
    const Complex downlink = downlink_channel(realization, hardware, k);
    const Complex uplink = uplink_channel(realization, hardware, k);
    // Intermediate estimate: reciprocity plus all earlier feedback.
    Complex estimate = reciprocity_estimate(state.calibration[k], downlink) *
                       std::polar(1.0, -state.feedback_correction[k]);

    // Precoded uplink pilot: the AP sees phi - phi_tilde = -e - E.
    const double observed = std::arg(uplink * std::conj(estimate));
    double& residual = state.cumulative_residual[k];
    const double increment = wrap_to_pi(-observed - residual);
    if (feedback.active()) {
      const double fed_back = feedback.quantize(increment);
      residual += increment - fed_back;
      state.feedback_correction[k] += fed_back;
      estimate *= std::polar(1.0, -fed_back);
    } else {
      residual += increment;
    }
    errors[k] = std::arg(uplink * std::conj(estimate));
  }
  ++state.rounds_since_calibration;
  return errors;
}

}  // namespace oac
