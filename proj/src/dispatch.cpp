#include "dpolymer/dispatch.hpp"

#include <exception>
#include <ostream>

#include "dpolymer/csv.hpp"
#include "dpolymer/errors.hpp"

namespace dpolymer {

std::vector<SummaryRecord> run_subcommand(std::string_view subcommand,
                                          const ExperimentConfig& cfg) {
  if (subcommand == "validate-sampler") return run_sampler_validation(cfg);
  if (subcommand == "annealed") return run_annealed_check(cfg);
  if (subcommand == "martingale") return run_martingale_check(cfg);
  if (subcommand == "free-energy") return run_free_energy_scan(cfg);
  if (subcommand == "concentration") return run_concentration_check(cfg);
  if (subcommand == "second-moment") return run_second_moment_check(cfg);
  if (subcommand == "regime") return run_regime_experiment(cfg);
  if (subcommand == "fractional") return run_fractional_moment_check(cfg);
  if (subcommand == "theory") return run_theory(cfg);
  throw ConfigError("unknown subcommand '" + std::string(subcommand) + "'");
}

std::filesystem::path output_path(std::string_view subcommand, const ExperimentConfig& cfg,
                                  const std::filesystem::path& out_dir) {
  if (!cfg.output.empty()) {
    const std::filesystem::path p(cfg.output);
    return p.is_absolute() ? p : out_dir / p;
  }
  return out_dir / (cfg.name + "_" + std::string(subcommand) + ".csv");
}

int dispatch(std::string_view subcommand, const ExperimentConfig& cfg,
             const std::filesystem::path& out_dir, std::ostream& log, bool quiet) {
  std::vector<SummaryRecord> records;
  try {
    records = run_subcommand(subcommand, cfg);
  } catch (const ConfigError& e) {
    log << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    log << "numerical error: " << e.what() << '\n';
    return kExitNumerical;
  }

  const auto path = output_path(subcommand, cfg, out_dir);
  try {
    emit_csv(records, path);
  } catch (const std::exception& e) {
    log << "i/o error: " << e.what() << '\n';
    return kExitNumerical;
  }

  bool failed = false;
  for (const auto& r : records) failed = failed || r.verdict == Verdict::fail;
  if (!quiet) {
    print_summary(log, records);
    log << "wrote " << path.string() << '\n';
  }
  return failed ? kExitVerdictFail : kExitOk;
}

}  // namespace dpolymer
