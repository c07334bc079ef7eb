// Acceptance suite: one PASS/FAIL line per exit criterion, nonzero exit if
// any criterion fails. Tolerances are fixed here and never tuned at runtime.

#include <cmath>
#include <cstdio>
#include <numbers>
#include <string>
#include <vector>

#include "oac/oac.hpp"
#include "test_support.hpp"

using namespace oac;

namespace {

constexpr unsigned kDevices = 10;
constexpr std::size_t kFigureTrials = 100000;
constexpr std::uint64_t kSeed = 20240917;
// The low-drift curve rises by ~0.01 over 32 rounds while each round's
// estimate carries ~1/sqrt(trials) noise from the receiver noise term, so
// the linearity check needs more trials than the figure sweeps to resolve
// the trend at all.
constexpr std::size_t kLinearityTrials = 2000000;

int failures = 0;

void report(bool pass, const std::string& name, const std::string& detail) {
  std::printf("[%s] %s: %s\n", pass ? "PASS" : "FAIL", name.c_str(), detail.c_str());
  std::fflush(stdout);
  if (!pass) ++failures;
}

std::string fmt(const char* pattern, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, pattern, args...);
  return buf;
}

void lemma1_reproduction() {
  SweepConfig c;
  c.variant = VariantSelection::A;
  c.device_count = kDevices;
  c.bits = {1, 2, 3, 4, 5, 6};
  c.trials = kFigureTrials;
  c.master_seed = kSeed;
  std::string detail;
  bool pass = true;
  for (const auto& row : sweep_bits(c).rows) {
    const double expected = lemma1_mse(kDevices, row.bits);
    const double rel = std::abs(row.mse - expected) / expected;
    pass = pass && rel <= 0.02;
    detail += fmt("N=%u mse=%.4f closed=%.4f rel=%.4f; ", row.bits, row.mse, expected, rel);
  }
  report(pass, "Lemma 1 reproduction (K=10, N=1..6, 1e5 trials, 2%)", detail);
}

void no_feedback_baseline() {
  SweepConfig c;
  c.variant = VariantSelection::A;
  c.device_count = kDevices;
  c.bits = {0};
  c.trials = kFigureTrials;
  c.master_seed = kSeed + 1;
  const double mse = sweep_bits(c).rows.at(0).mse;
  const double rel = std::abs(mse - 21.0) / 21.0;
  report(rel <= 0.02, "No-feedback baseline (K=10, N=0, 21 +/- 2%)",
         fmt("mse=%.4f rel=%.4f", mse, rel));
}

void lloyd_max_correctness() {
  bool pass = true;
  std::string detail;

  const auto one = lloyd_max_codebook(1, 1.0);
  const double half_normal = std::sqrt(2.0 / std::numbers::pi);
  const double err1 = std::max(std::abs(one.levels()[0] + half_normal),
                               std::abs(one.levels()[1] - half_normal));
  pass = pass && err1 <= 1e-6;
  detail += fmt("N=1 err=%.2e; ", err1);

  // Independent oracle: minimize quadrature distortion over {-b,-a,a,b}.
  double a = 0.5;
  double b = 1.5;
  for (int sweep = 0; sweep < 30; ++sweep) {
    a = oac::testing::golden_minimize(
        [&](double x) { return oac::testing::quadrature_distortion({-b, -x, x, b}); }, 0.01,
        b - 1e-6, 1e-8);
    b = oac::testing::golden_minimize(
        [&](double x) { return oac::testing::quadrature_distortion({-x, -a, a, x}); }, a + 1e-6,
        5.0, 1e-8);
  }
  const auto two = lloyd_max_codebook(2, 1.0);
  const std::vector<double> oracle{-b, -a, a, b};
  const std::vector<double> reference{-1.5104, -0.4528, 0.4528, 1.5104};
  double err2 = 0.0;
  for (std::size_t i = 0; i < 4; ++i) {
    err2 = std::max({err2, std::abs(two.levels()[i] - oracle[i]),
                     std::abs(two.levels()[i] - reference[i])});
  }
  pass = pass && err2 <= 1e-3;
  detail += fmt("N=2 oracle=(%.5f, %.5f) err=%.2e; ", a, b, err2);

  double err_scale = 0.0;
  for (unsigned bits : {1u, 2u, 3u}) {
    const auto unit = lloyd_max_codebook(bits, 1.0);
    for (double alpha : {0.01, 0.25, 4.0}) {
      const auto scaled = lloyd_max_codebook(bits, alpha);
      for (std::size_t i = 0; i < unit.size(); ++i) {
        err_scale = std::max(err_scale,
                             std::abs(scaled.levels()[i] - std::sqrt(alpha) * unit.levels()[i]));
      }
    }
  }
  pass = pass && err_scale <= 1e-9;
  detail += fmt("scaling err=%.2e", err_scale);
  report(pass, "LMQ correctness (1e-6 / 1e-3 / 1e-9)", detail);
}

void reciprocity_identity() {
  RandomStream rng(kSeed + 2);
  double worst = 0.0;
  for (int draw = 0; draw < 10000; ++draw) {
    const auto hw = sample_hardware(1, rng);
    const auto fresh = sample_channel(1, rng);
    const Complex truth = uplink_channel(fresh, hw, 0);
    const Complex est = reciprocity_estimate(calibrate(hw, 0), downlink_channel(fresh, hw, 0));
    worst = std::max(worst, std::abs(est - truth) / std::abs(truth));
  }
  report(worst <= 1e-12, "Reciprocity identity (1e4 draws, 1e-12 rel)",
         fmt("max rel err=%.2e", worst));
}

void drift_law() {
  constexpr int kSteps = 16;
  constexpr double kAlpha = 0.01;
  RandomStream rng(kSeed + 3);
  std::vector<double> errors(100000);
  for (double& e : errors) {
    HardwareProfile hw = sample_hardware(1, rng);
    const auto cal = calibrate(hw, 0);
    for (int s = 0; s < kSteps; ++s) hw = apply_phase_drift(hw, kAlpha, rng);
    const auto fresh = sample_channel(1, rng);
    e = std::arg(reciprocity_estimate(cal, downlink_channel(fresh, hw, 0)) /
                 uplink_channel(fresh, hw, 0));
  }
  const double var = oac::testing::sample_variance(errors);
  const double expected = kSteps * kAlpha;
  const double rel = std::abs(var - expected) / expected;
  report(rel <= 0.05, "Drift law (T=16, alpha=0.01, 1e5 trials, 5%)",
         fmt("var=%.5f expected=%.5f rel=%.4f", var, expected, rel));
}

void abstraction_oracle() {
  constexpr std::size_t kK = kDevices;
  constexpr int kTrialsPerCell = 1250;  // 8 cells -> 1e4 trials
  double worst = 0.0;
  std::size_t compared = 0;
  std::uint64_t cell = 0;
  for (unsigned bits : {1u, 3u}) {
    for (double alpha : {0.01, 0.5}) {
      const auto fb = PhaseFeedback::quantized(lloyd_max_codebook(bits, alpha));
      for (std::size_t period : {std::size_t{1}, std::size_t{8}}) {
        for (int trial = 0; trial < kTrialsPerCell; ++trial) {
          const std::uint64_t seed = derive_trial_seed(kSeed + 4, cell, trial);
          RandomStream setup(seed ^ 0x5bd1e995ULL);
          HardwareProfile hw = sample_hardware(kK, setup);
          auto abstract_state = variant_b_init(kK, period, hw);
          auto full_state = abstract_state;
          RandomStream abstract_rng(seed);
          RandomStream full_rng(seed);
          for (std::size_t t = 0; t < period; ++t) {
            const auto realization = sample_channel(kK, setup);
            const auto x = variant_b_round(abstract_state, fb, alpha, abstract_rng);
            const auto y =
                variant_b_full_fidelity_round(full_state, hw, realization, fb, alpha, full_rng);
            for (std::size_t d = 0; d < kK; ++d) {
              worst = std::max(worst, std::abs(wrap_to_pi(x[d] - y[d])));
              ++compared;
            }
          }
        }
        ++cell;
      }
    }
  }
  report(worst <= 1e-9, "Variant B abstraction oracle (1e4 trials, 1e-9)",
         fmt("max |delta diff|=%.2e over %zu device-rounds", worst, compared));
}

void figure2_claims() {
  SweepConfig c;
  c.variant = VariantSelection::Both;
  c.device_count = kDevices;
  c.bits = {1, 2, 6};
  c.drift_variances = {0.001};
  c.periods = {8};
  c.trials = kFigureTrials;
  c.master_seed = kSeed + 5;
  const auto rows = sweep_bits(c).rows;
  // rows: A(1), A(2), A(6), B(1), B(2), B(6)
  bool pass = true;
  std::string detail;
  for (std::size_t i = 0; i < 3; ++i) {
    const auto& ra = rows.at(i);
    const auto& rb = rows.at(i + 3);
    const double se = std::hypot(ra.standard_error, rb.standard_error);
    const double gap = ra.mse - rb.mse;
    bool ok;
    if (ra.bits <= 2) {
      ok = gap > 3.0 * se;
    } else {
      ok = std::abs(gap) <= se;
    }
    pass = pass && ok;
    detail += fmt("N=%u A=%.5f B=%.5f gap=%.5f se=%.5f%s; ", ra.bits, ra.mse, rb.mse, gap, se,
                  ok ? "" : " (x)");
  }
  report(pass, "Figure 2 claims (alpha=0.001, T=8: B<A by 3se at N=1,2; |A-B|<=se at N=6)",
         detail);
}

void figure3_claims() {
  // Low drift: per-round MSE over a 32-round cycle is close to linear in t.
  {
    SweepConfig c;
    c.variant = VariantSelection::B;
    c.device_count = kDevices;
    c.bits = {3};
    c.drift_variances = {0.001};
    c.periods = {32};
    c.trials = kLinearityTrials;
    c.master_seed = kSeed + 6;
    const auto rows = sweep_period(c).rows;
    std::vector<double> t;
    std::vector<double> m;
    for (const auto& row : rows) {
      t.push_back(static_cast<double>(*row.round + 1));
      m.push_back(row.mse);
    }
    const double tm = oac::testing::sample_mean(t);
    const double mm = oac::testing::sample_mean(m);
    double sxy = 0.0;
    double sxx = 0.0;
    double syy = 0.0;
    for (std::size_t i = 0; i < t.size(); ++i) {
      sxy += (t[i] - tm) * (m[i] - mm);
      sxx += (t[i] - tm) * (t[i] - tm);
      syy += (m[i] - mm) * (m[i] - mm);
    }
    const double r2 = sxy * sxy / (sxx * syy);
    report(r2 >= 0.9, "Figure 3 linear growth (alpha=0.001, N=3, T=32, 2e6 trials, R^2>=0.9)",
           fmt("R^2=%.4f slope=%.3e first=%.5f last=%.5f", r2, sxy / sxx, m.front(), m.back()));
  }

  // High drift, 1 bit: the increments m_{t+1} - m_t over t = 1..16 should
  // grow. Measured by the least-squares slope of the increments, a linear
  // functional of the per-round MSEs, evaluated per trial so its standard
  // error accounts for correlation between rounds of one cycle.
  {
    constexpr std::size_t kRounds = 16;
    constexpr double kAlpha = 0.5;
    const auto fb = PhaseFeedback::quantized(lloyd_max_codebook(1, kAlpha));
    // increments d_j = m_{j+1} - m_j, j = 0..14, slope weights over j.
    constexpr std::size_t kIncrements = kRounds - 1;
    const double jm = (kIncrements - 1) / 2.0;
    double sjj = 0.0;
    for (std::size_t j = 0; j < kIncrements; ++j) sjj += (j - jm) * (j - jm);
    std::vector<double> weight(kRounds, 0.0);
    for (std::size_t j = 0; j < kIncrements; ++j) {
      const double w = (j - jm) / sjj;
      weight[j + 1] += w;
      weight[j] -= w;
    }
    const auto acc = run_trials(
        kFigureTrials, kRounds + 1, 1, [&](std::size_t trial, std::vector<MomentAccumulator>& s) {
          RandomStream rng(derive_trial_seed(kSeed + 7, 0, trial));
          double slope = 0.0;
          run_variant_b_cycle(kDevices, kRounds, fb, kAlpha, rng,
                              [&](std::size_t t, const RoundOutcome& o) {
                                s[t].add(o.squared_error);
                                slope += weight[t] * o.squared_error;
                              });
          s[kRounds].add(slope);
        });
    const MeanEstimate slope = acc[kRounds].estimate();
    std::string curve;
    for (std::size_t t = 0; t < kRounds; t += 3) {
      curve += fmt("m%zu=%.3f ", t + 1, acc[t].estimate().mean);
    }
    report(slope.mean > 3.0 * slope.standard_error,
           "Figure 3 non-linear growth (alpha=0.5, N=1: increments increasing over t=1..16)",
           fmt("increment slope=%.4f se=%.4f; %s", slope.mean, slope.standard_error,
               curve.c_str()));
  }
}

void determinism() {
  SweepConfig c;
  c.device_count = kDevices;
  c.bits = {0, 1, 4};
  c.drift_variances = {0.01, 0.5};
  c.periods = {1, 4};
  c.trials = 5000;
  c.master_seed = kSeed + 8;
  c.workers = 1;
  const std::string bits_1 = to_csv(sweep_bits(c));
  const std::string period_1 = to_csv(sweep_period(c));
  const std::string bits_again = to_csv(sweep_bits(c));
  c.workers = 4;
  const std::string bits_4 = to_csv(sweep_bits(c));
  const std::string period_4 = to_csv(sweep_period(c));
  const bool pass = bits_1 == bits_again && bits_1 == bits_4 && period_1 == period_4;
  report(pass, "Determinism (byte-identical CSV, 1 vs 4 workers)",
         fmt("sweep-bits %zu bytes, sweep-period %zu bytes", bits_1.size(), period_1.size()));
}

}  // namespace

int main() {
  lemma1_reproduction();
  no_feedback_baseline();
  lloyd_max_correctness();
  reciprocity_identity();
  drift_law();
  abstraction_oracle();
  figure2_claims();
  figure3_claims();
  determinism();
  std::printf("%d criterion(s) failed\n", failures);
  return failures == 0 ? 0 : 1;
}
