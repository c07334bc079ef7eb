#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <locale>
#include <map>
#include <mutex>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "oac/channel_model.hpp"
#include "oac/numerics.hpp"
#include "oac/oac_core.hpp"
#include "oac/protocol.hpp"
#include "oac/quantizer.hpp"
#include "oac/random.hpp"

namespace oac {

// ---------------------------------------------------------------------------
// Seeding
// ---------------------------------------------------------------------------

inline constexpr unsigned kTrialIndexBits = 40;
inline constexpr std::uint64_t kMaxTrialsPerPoint = std::uint64_t{1} << kTrialIndexBits;
inline constexpr std::uint64_t kMaxGridPoints = std::uint64_t{1} << (64 - kTrialIndexBits);

/// splitmix64 finalizer; a bijection on 64-bit words.
inline constexpr std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Seed of one trial. (point, trial) is packed injectively into a word,
/// xored with a hashed master seed and mixed again; every step is a
/// bijection, so distinct tuples under one master seed never collide.
inline std::uint64_t derive_trial_seed(std::uint64_t master_seed, std::uint64_t grid_point,
                                       std::uint64_t trial) {
  if (grid_point >= kMaxGridPoints || trial >= kMaxTrialsPerPoint) {
    throw ConfigError("derive_trial_seed: grid point or trial index out of range");
  }
  const std::uint64_t packed = (grid_point << kTrialIndexBits) | trial;
  return mix64(mix64(master_seed) ^ packed);
}

// ---------------------------------------------------------------------------
// Single trials
// ---------------------------------------------------------------------------

/// Draws v_k, n ~ CN(0, 1) and runs the aggregation for given phase errors.
inline RoundOutcome transmit_round(std::span<const double> phase_errors, RandomStream& rng) {
  std::vector<Complex> values(phase_errors.size());
  for (auto& v : values) v = rng.complex_normal();
  const Complex noise = rng.complex_normal();
  return oac_round(values, phase_errors, noise);
}

/// One Variant A trial: estimation round followed by one OAC round.
inline RoundOutcome run_variant_a_trial(std::size_t device_count, const PhaseFeedback& feedback,
                                        RandomStream& rng) {
  const PhaseErrorVector errors = variant_a_round(device_count, feedback, rng);
  return transmit_round(errors, rng);
}

/// One Variant B calibration cycle: calibrate, then `period` rounds of
/// estimation + OAC. on_round(t, outcome) sees t = 0 .. period-1, the
/// number of completed rounds since calibration when the round starts.
template <typename OnRound>
void run_variant_b_cycle(std::size_t device_count, std::size_t period,
                         const PhaseFeedback& feedback, double drift_variance,
                         RandomStream& rng, OnRound&& on_round) {
  // Calibration is noiseless and the abstraction only tracks phase errors,
  // so the hardware values themselves do not matter here.
  DeviceEstimationState state =
      variant_b_init(device_count, period, HardwareProfile::identity(device_count));
  for (std::size_t t = 0; t < period; ++t) {
    const PhaseErrorVector errors = variant_b_round(state, feedback, drift_variance, rng);
    on_round(t, transmit_round(errors, rng));
  }
}

// ---------------------------------------------------------------------------
// Parallel execution
// ---------------------------------------------------------------------------

/// Trials per aggregation block. Fixed so that the summation tree does not
/// depend on the worker count.
inline constexpr std::size_t kTrialBlock = 1024;

/// Runs trial(index, slots) for index in [0, trials) on `workers` threads.
/// Each trial adds samples to `slot_count` accumulators; blocks are merged
/// in block order, so the result is identical for any worker count.
template <typename Trial>
std::vector<MomentAccumulator> run_trials(std::size_t trials, std::size_t slot_count,
                                          unsigned workers, Trial&& trial) {
  const std::size_t blocks = (trials + kTrialBlock - 1) / kTrialBlock;
  std::vector<std::vector<MomentAccumulator>> partial(
      blocks, std::vector<MomentAccumulator>(slot_count));
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;

  auto work = [&] {
    try {
      for (std::size_t b = next++; b < blocks; b = next++) {
        const std::size_t end = std::min(trials, (b + 1) * kTrialBlock);
        for (std::size_t i = b * kTrialBlock; i < end; ++i) trial(i, partial[b]);
      }
    } catch (...) {
      std::lock_guard lock(failure_mutex);
      if (!failure) failure = std::current_exception();
      next = blocks;
    }
  };

  const unsigned thread_count =
      static_cast<unsigned>(std::clamp<std::size_t>(workers, 1, std::max<std::size_t>(blocks, 1)));
  if (thread_count == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(thread_count);
    for (unsigned w = 0; w < thread_count; ++w) pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }
  if (failure) std::rethrow_exception(failure);

  std::vector<MomentAccumulator> total(slot_count);
  for (const auto& block : partial) {
    for (std::size_t s = 0; s < slot_count; ++s) total[s].merge(block[s]);
  }
  return total;
}

// ---------------------------------------------------------------------------
// Sweeps
// ---------------------------------------------------------------------------

enum class VariantSelection { A, B, Both };

struct SweepConfig {
  VariantSelection variant = VariantSelection::Both;
  unsigned device_count = 10;
  std::vector<unsigned> bits{0, 1, 2, 3, 4, 5, 6};
  std::vector<double> drift_variances{0.001, 0.01, 0.1, 0.5};
  std::vector<std::size_t> periods{1, 2, 4, 8, 16, 32};
  std::size_t trials = 100000;
  std::uint64_t master_seed = 1;
  /// Nominal per-device power. Recorded only; channel inversion is never
  /// truncated so it does not enter the simulation.
  double nominal_power = 1.0;
  /// Execution detail; never changes the output.
  unsigned workers = 1;
  LloydMaxOptions lloyd_max{};
};

struct SweepRow {
  char variant = 'A';
  unsigned device_count = 0;
  unsigned bits = 0;
  std::optional<double> drift_variance;
  std::optional<std::size_t> period;
  std::optional<std::size_t> round;
  std::size_t trials = 0;
  double mse = 0.0;
  double standard_error = 0.0;
  std::uint64_t seed = 0;
};

struct SweepResult {
  std::vector<SweepRow> rows;
};

inline constexpr unsigned kMaxSweepBits = 16;

inline void validate(const SweepConfig& config, bool needs_b_grids) {
  if (config.device_count == 0) throw ConfigError("device count must be >= 1");
  if (config.trials == 0) throw ConfigError("trials must be >= 1");
  if (config.trials > kMaxTrialsPerPoint) throw ConfigError("too many trials per point");
  if (config.bits.empty()) throw ConfigError("bits grid is empty");
  for (unsigned n : config.bits) {
    if (n > kMaxSweepBits) throw ConfigError("bits must be <= 16");
  }
  if (needs_b_grids) {
    if (config.drift_variances.empty()) throw ConfigError("alpha grid is empty");
    if (config.periods.empty()) throw ConfigError("period grid is empty");
    for (double a : config.drift_variances) {
      if (!(a >= 0.0) || !std::isfinite(a)) throw ConfigError("alpha must be finite and >= 0");
    }
    for (std::size_t p : config.periods) {
      if (p == 0) throw ConfigError("period must be >= 1");
    }
  }
}

/// Feedback for Variant B at (bits, alpha). A zero-variance increment is a
/// point mass at zero, which any optimal quantizer reproduces exactly.
inline PhaseFeedback variant_b_feedback(unsigned bits, double drift_variance,
                                        const LloydMaxOptions& options) {
  if (bits == 0) return PhaseFeedback::none();
  if (drift_variance == 0.0) return PhaseFeedback::exact();
  return PhaseFeedback::quantized(lloyd_max_codebook(bits, drift_variance, options));
}

inline PhaseFeedback variant_a_feedback(unsigned bits) {
  return bits == 0 ? PhaseFeedback::none() : PhaseFeedback::quantized(uniform_codebook(bits));
}

/// MSE against the number of feedback bits.
///
/// Variant A: one trial is one estimation + OAC round. Variant B: one
/// trial is a full calibration cycle of T rounds and its sample is the
/// mean squared error over those rounds, so the reported MSE averages
/// uniformly over every round of the cycle.
inline SweepResult sweep_bits(const SweepConfig& config) {
  const bool run_a = config.variant != VariantSelection::B;
  const bool run_b = config.variant != VariantSelection::A;
  validate(config, run_b);

  SweepResult result;
  std::uint64_t point = 0;
  const std::size_t k = config.device_count;

  if (run_a) {
    for (unsigned bits : config.bits) {
      const PhaseFeedback feedback = variant_a_feedback(bits);
      const std::uint64_t this_point = point++;
      const auto acc = run_trials(config.trials, 1, config.workers,
                                  [&](std::size_t trial, std::vector<MomentAccumulator>& slots) {
                                    RandomStream rng(
                                        derive_trial_seed(config.master_seed, this_point, trial));
                                    slots[0].add(run_variant_a_trial(k, feedback, rng).squared_error);
                                  });
      const MeanEstimate est = acc[0].estimate();
      SweepRow row;
      row.variant = 'A';
      row.device_count = config.device_count;
      row.bits = bits;
      row.trials = config.trials;
      row.mse = est.mean;
      row.standard_error = est.standard_error;
      row.seed = derive_trial_seed(config.master_seed, this_point, 0);
      result.rows.push_back(row);
    }
  }

  if (run_b) {
    for (double alpha : config.drift_variances) {
      std::map<unsigned, PhaseFeedback> feedback_by_bits;
      for (unsigned bits : config.bits) {
        feedback_by_bits.emplace(bits, variant_b_feedback(bits, alpha, config.lloyd_max));
      }
      for (std::size_t period : config.periods) {
        for (unsigned bits : config.bits) {
          const PhaseFeedback& feedback = feedback_by_bits.at(bits);
          const std::uint64_t this_point = point++;
          const auto acc = run_trials(
              config.trials, 1, config.workers,
              [&](std::size_t trial, std::vector<MomentAccumulator>& slots) {
                RandomStream rng(derive_trial_seed(config.master_seed, this_point, trial));
                CompensatedSum cycle;
                run_variant_b_cycle(k, period, feedback, alpha, rng,
                                    [&](std::size_t, const RoundOutcome& outcome) {
                                      cycle.add(outcome.squared_error);
                                    });
                slots[0].add(cycle.value() / static_cast<double>(period));
              });
          const MeanEstimate est = acc[0].estimate();
          SweepRow row;
          row.variant = 'B';
          row.device_count = config.device_count;
          row.bits = bits;
          row.drift_variance = alpha;
          row.period = period;
          row.trials = config.trials;
          row.mse = est.mean;
          row.standard_error = est.standard_error;
          row.seed = derive_trial_seed(config.master_seed, this_point, 0);
          result.rows.push_back(row);
        }
      }
    }
  }
  return result;
}

/// Variant B MSE against the recalibration period. For each (alpha, N, T)
/// it emits one row per round index t = 0 .. T-1; the row at t = T-1 is the
/// last and worst round before recalibration.
inline SweepResult sweep_period(const SweepConfig& config) {
  if (config.variant == VariantSelection::A) {
    throw ConfigError("sweep-period applies to Variant B only");
  }
  validate(config, true);

  SweepResult result;
  std::uint64_t point = 0;
  const std::size_t k = config.device_count;
  for (double alpha : config.drift_variances) {
    for (unsigned bits : config.bits) {
      const PhaseFeedback feedback = variant_b_feedback(bits, alpha, config.lloyd_max);
      for (std::size_t period : config.periods) {
        const std::uint64_t this_point = point++;
        const auto acc = run_trials(
            config.trials, period, config.workers,
            [&](std::size_t trial, std::vector<MomentAccumulator>& slots) {
              RandomStream rng(derive_trial_seed(config.master_seed, this_point, trial));
              run_variant_b_cycle(k, period, feedback, alpha, rng,
                                  [&](std::size_t t, const RoundOutcome& outcome) {
                                    slots[t].add(outcome.squared_error);
                                  });
            });
        for (std::size_t t = 0; t < period; ++t) {
          const MeanEstimate est = acc[t].estimate();
          SweepRow row;
          row.variant = 'B';
          row.device_count = config.device_count;
          row.bits = bits;
          row.drift_variance = alpha;
          row.period = period;
          row.round = t;
          row.trials = config.trials;
          row.mse = est.mean;
          row.standard_error = est.standard_error;
          row.seed = derive_trial_seed(config.master_seed, this_point, 0);
          result.rows.push_back(row);
        }
      }
    }
  }
  return result;
}

// ---------------------------------------------------------------------------
// CSV
// ---------------------------------------------------------------------------

inline constexpr const char* kCsvHeader = "variant,K,N,alpha,T,t,trials,mse,stderr,seed";

/// %.17g: enough digits to round-trip any double.
inline std::string format_double(double x) {
  std::ostringstream os;
  os.imbue(std::locale::classic());
  os.precision(17);
  os << x;
  return os.str();
}

inline void write_csv(std::ostream& os, const SweepResult& result) {
  os << kCsvHeader << '\n';
  for (const SweepRow& row : result.rows) {
    os << row.variant << ',' << row.device_count << ',' << row.bits << ',';
    if (row.drift_variance) os << format_double(*row.drift_variance);
    os << ',';
    if (row.period) os << *row.period;
    os << ',';
    if (row.round) os << *row.round;
    os << ',' << row.trials << ',' << format_double(row.mse) << ','
       << format_double(row.standard_error) << ',' << row.seed << '\n';
  }
}

inline std::string to_csv(const SweepResult& result) {
  std::ostringstream os;
  write_csv(os, result);
  return os.str();
}

}  // namespace oac
