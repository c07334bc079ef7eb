// oacsim: Monte Carlo sweeps and reference values for over-the-air
// computation with hybrid reciprocity/feedback phase estimation.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "oac/oac.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

struct SweepOptions {
  std::string variant = "both";
  unsigned devices = 10;
  std::vector<unsigned> bits{0, 1, 2, 3, 4, 5, 6};
  std::vector<double> alpha{0.001, 0.01, 0.1, 0.5};
  std::vector<std::size_t> period{1, 2, 4, 8, 16, 32};
  std::size_t trials = 100000;
  std::uint64_t seed = 1;
  double power = 1.0;
  std::string out;
  std::string format = "csv";
  unsigned workers = 0;
};

void add_sweep_options(CLI::App& cmd, SweepOptions& o, bool variant_flag) {
  if (variant_flag) {
    cmd.add_option("--variant", o.variant, "Estimation variant")
        ->check(CLI::IsMember({"a", "b", "both"}))
        ->capture_default_str();
  }
  cmd.add_option("--devices", o.devices, "Number of devices K")->capture_default_str();
  cmd.add_option("--bits", o.bits, "Feedback bits N (comma separated, 0 = no feedback)")
      ->delimiter(',');
  cmd.add_option("--alpha", o.alpha, "Phase-noise variances per round (Variant B)")
      ->delimiter(',');
  cmd.add_option("--period", o.period, "Recalibration periods T (Variant B)")->delimiter(',');
  cmd.add_option("--trials", o.trials, "Trials per grid point")->capture_default_str();
  cmd.add_option("--seed", o.seed, "Master seed")->capture_default_str();
  cmd.add_option("--power", o.power, "Nominal device power P (recorded only)");
  cmd.add_option("--out", o.out, "Output CSV path (default: stdout)");
  cmd.add_option("--format", o.format, "Output format")
      ->check(CLI::IsMember({"csv"}))
      ->capture_default_str();
  cmd.add_option("--workers", o.workers, "Worker threads (0 = hardware concurrency)");
}

oac::SweepConfig to_config(const SweepOptions& o) {
  oac::SweepConfig config;
  config.variant = o.variant == "a"   ? oac::VariantSelection::A
                   : o.variant == "b" ? oac::VariantSelection::B
                                      : oac::VariantSelection::Both;
  config.device_count = o.devices;
  config.bits = o.bits;
  config.drift_variances = o.alpha;
  config.periods = o.period;
  config.trials = o.trials;
  config.master_seed = o.seed;
  config.nominal_power = o.power;
  config.workers = o.workers != 0 ? o.workers : std::max(1u, std::thread::hardware_concurrency());
  return config;
}

void emit(const oac::SweepResult& result, const std::string& path) {
  if (path.empty()) {
    oac::write_csv(std::cout, result);
    return;
  }
  std::ofstream file(path, std::ios::binary);
  if (!file) throw oac::ConfigError("cannot open output file: " + path);
  oac::write_csv(file, result);
  if (!file) throw oac::ConfigError("failed writing output file: " + path);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Over-the-air computation phase-estimation simulator"};
  app.require_subcommand(1);

  SweepOptions bits_opts;
  auto* bits_cmd = app.add_subcommand("sweep-bits", "MSE against the number of feedback bits");
  add_sweep_options(*bits_cmd, bits_opts, true);

  SweepOptions period_opts;
  period_opts.variant = "b";
  auto* period_cmd =
      app.add_subcommand("sweep-period", "Variant B MSE against the recalibration period");
  add_sweep_options(*period_cmd, period_opts, true);

  unsigned lemma_devices = 10;
  std::vector<unsigned> lemma_bits{0, 1, 2, 3, 4, 5, 6};
  auto* lemma_cmd = app.add_subcommand("lemma1", "Closed-form Variant A MSE");
  lemma_cmd->add_option("--devices", lemma_devices, "Number of devices K")->capture_default_str();
  lemma_cmd->add_option("--bits", lemma_bits, "Feedback bits N (0 = no feedback)")
      ->delimiter(',');

  std::string family = "lloyd-max";
  unsigned codebook_bits = 1;
  double codebook_alpha = 1.0;
  auto* codebook_cmd = app.add_subcommand("codebook", "Print quantizer levels");
  codebook_cmd->add_option("--family", family, "Quantizer family")
      ->check(CLI::IsMember({"uniform", "lloyd-max"}))
      ->capture_default_str();
  codebook_cmd->add_option("--bits", codebook_bits, "Bits N")->capture_default_str();
  codebook_cmd->add_option("--alpha", codebook_alpha, "Gaussian variance (Lloyd-Max)")
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*bits_cmd) {
      emit(oac::sweep_bits(to_config(bits_opts)), bits_opts.out);
    } else if (*period_cmd) {
      emit(oac::sweep_period(to_config(period_opts)), period_opts.out);
    } else if (*lemma_cmd) {
      std::cout << "K,N,mse\n";
      for (unsigned n : lemma_bits) {
        const double mse =
            n == 0 ? oac::no_feedback_mse(lemma_devices) : oac::lemma1_mse(lemma_devices, n);
        std::cout << lemma_devices << ',' << n << ',' << oac::format_double(mse) << '\n';
      }
    } else if (*codebook_cmd) {
      const oac::QuantizerCodebook codebook = family == "uniform"
                                                  ? oac::uniform_codebook(codebook_bits)
                                                  : oac::lloyd_max_codebook(codebook_bits,
                                                                            codebook_alpha);
      for (double level : codebook.levels()) std::cout << oac::format_double(level) << '\n';
    }
  } catch (const oac::ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const oac::NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  }
  return 0;
}
