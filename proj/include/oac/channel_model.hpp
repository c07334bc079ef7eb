#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <vector>

#include "oac/numerics.hpp"
#include "oac/random.hpp"

namespace oac {

/// Multiplicative transmit/receive hardware coefficients.
///
/// Uplink k -> AP is tx[k] * h_k * ap_rx, downlink AP -> k is
/// ap_tx * h_k * rx[k]. The product is non-reciprocal whenever
/// tx[k] / rx[k] != ap_tx / ap_rx.
struct HardwareProfile {
  std::vector<Complex> device_tx;
  std::vector<Complex> device_rx;
  Complex ap_tx{1.0, 0.0};
  Complex ap_rx{1.0, 0.0};

  std::size_t device_count() const { return device_tx.size(); }

  /// Ideal reciprocal hardware: every coefficient equals one.
  static HardwareProfile identity(std::size_t device_count) {
    HardwareProfile hw;
    hw.device_tx.assign(device_count, Complex(1.0, 0.0));
    hw.device_rx.assign(device_count, Complex(1.0, 0.0));
    return hw;
  }
};

/// Random hardware for tests and fixtures: log-uniform amplitude on
/// [0.5, 2] and uniform phase for every coefficient, AP included.
inline HardwareProfile sample_hardware(std::size_t device_count, RandomStream& rng) {
  auto draw = [&rng] {
    const double amplitude = std::exp(rng.uniform(std::log(0.5), std::log(2.0)));
    return std::polar(amplitude, rng.uniform(0.0, kTwoPi));
  };
  HardwareProfile hw;
  hw.device_tx.resize(device_count);
  hw.device_rx.resize(device_count);
  for (std::size_t k = 0; k < device_count; ++k) {
    hw.device_tx[k] = draw();
    hw.device_rx[k] = draw();
  }
  hw.ap_tx = draw();
  hw.ap_rx = draw();
  return hw;
}

/// One block-fading instance: reciprocal antenna channels and AP noise.
struct ChannelRealization {
  std::vector<Complex> reciprocal;
  Complex noise{0.0, 0.0};

  std::size_t device_count() const { return reciprocal.size(); }
};

/// h_k and n i.i.d. CN(0, 1).
inline ChannelRealization sample_channel(std::size_t device_count, RandomStream& rng) {
  if (device_count == 0) throw ConfigError("sample_channel: device_count must be >= 1");
  ChannelRealization realization;
  realization.reciprocal.resize(device_count);
  for (auto& h : realization.reciprocal) h = rng.complex_normal();
  realization.noise = rng.complex_normal();
  return realization;
}

inline void check_device(std::size_t device, std::size_t count, const char* who) {
  if (device >= count) throw ConfigError(std::string(who) + ": device index out of range");
}

/// g_{k->AP} = t_k h_k r_AP.
inline Complex uplink_channel(const ChannelRealization& realization,
                              const HardwareProfile& hardware, std::size_t device) {
  check_device(device, realization.device_count(), "uplink_channel");
  check_device(device, hardware.device_count(), "uplink_channel");
  return hardware.device_tx[device] * realization.reciprocal[device] * hardware.ap_rx;
}

/// g_{AP->k} = t_AP h_k r_k.
inline Complex downlink_channel(const ChannelRealization& realization,
                                const HardwareProfile& hardware, std::size_t device) {
  check_device(device, realization.device_count(), "downlink_channel");
  check_device(device, hardware.device_count(), "downlink_channel");
  return hardware.ap_tx * realization.reciprocal[device] * hardware.device_rx[device];
}

enum class CalibrationKind { Full, AmplitudeOnly };

/// c_k, or only |c_k| when the phase is left uncalibrated.
class CalibrationCoefficient {
 public:
  static CalibrationCoefficient full(Complex value) { return {CalibrationKind::Full, value}; }
  static CalibrationCoefficient amplitude_only(double magnitude) {
    return {CalibrationKind::AmplitudeOnly, Complex(magnitude, 0.0)};
  }

  CalibrationKind kind() const { return kind_; }
  double amplitude() const { return std::abs(value_); }

  /// The complex coefficient; only meaningful for Full calibration.
  Complex value() const {
    if (kind_ != CalibrationKind::Full) {
      throw ConfigError("CalibrationCoefficient: phase is not calibrated");
    }
    return value_;
  }

 private:
  CalibrationCoefficient(CalibrationKind kind, Complex value) : kind_(kind), value_(value) {}

  CalibrationKind kind_;
  Complex value_;
};

/// Noiseless over-the-air calibration. The device learns
/// y_k = g_{AP->k} / g_{k->AP} = 1 / c_k, so c_k = (t_k / r_k)(r_AP / t_AP).
inline CalibrationCoefficient calibrate(const HardwareProfile& hardware, std::size_t device,
                                        CalibrationKind kind = CalibrationKind::Full) {
  check_device(device, hardware.device_count(), "calibrate");
  const Complex t = hardware.device_tx[device];
  const Complex r = hardware.device_rx[device];
  if (t == 0.0 || r == 0.0 || hardware.ap_tx == 0.0 || hardware.ap_rx == 0.0) {
    throw ConfigError("calibrate: hardware coefficients must be nonzero");
  }
  const Complex c = (t / r) * (hardware.ap_rx / hardware.ap_tx);
  return kind == CalibrationKind::Full ? CalibrationCoefficient::full(c)
                                       : CalibrationCoefficient::amplitude_only(std::abs(c));
}

/// Uplink estimate c_k * g'_{AP->k} from a downlink measurement.
inline Complex reciprocity_estimate(const CalibrationCoefficient& calibration, Complex downlink) {
  return calibration.value() * downlink;
}

/// One Wiener phase-noise step. Each device draws eps_k ~ N(0, variance)
/// and its shared oscillator moves the transmit chain by +eps_k/2 and the
/// receive chain by -eps_k/2. Amplitudes and the AP are untouched.
///
/// With these rules a stale calibration yields estimate = true * exp(-j eps);
/// the opposite sign is an equally valid convention since eps is symmetric.
inline HardwareProfile apply_phase_drift(const HardwareProfile& hardware, double variance,
                                         RandomStream& rng) {
  if (!(variance >= 0.0)) throw ConfigError("apply_phase_drift: variance must be >= 0");
  HardwareProfile drifted = hardware;
  for (std::size_t k = 0; k < drifted.device_count(); ++k) {
    const double eps = rng.normal(variance);
    drifted.device_tx[k] *= std::polar(1.0, 0.5 * eps);
    drifted.device_rx[k] *= std::polar(1.0, -0.5 * eps);
  }
  return drifted;
}

}  // namespace oac
