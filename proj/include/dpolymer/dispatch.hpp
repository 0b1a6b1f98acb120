#pragma once

#include <array>
#include <filesystem>
#include <iosfwd>
#include <string_view>
#include <vector>

#include "dpolymer/experiments.hpp"

namespace dpolymer {

inline constexpr std::array<std::string_view, 9> kSubcommands = {
    "validate-sampler", "annealed", "martingale", "free-energy", "concentration",
    "second-moment",    "regime",   "fractional", "theory"};

enum ExitCode : int {
  kExitOk = 0,
  kExitConfig = 1,
  kExitNumerical = 2,
  kExitVerdictFail = 3,
};

/// Runs the experiment behind one subcommand. Throws ConfigError for an
/// unknown subcommand.
std::vector<SummaryRecord> run_subcommand(std::string_view subcommand,
                                          const ExperimentConfig& cfg);

/// `<out_dir>/<name>_<subcommand>.csv`, or experiment.output when set
/// (relative paths resolve against out_dir).
std::filesystem::path output_path(std::string_view subcommand, const ExperimentConfig& cfg,
                                  const std::filesystem::path& out_dir);

/// Runs, writes the CSV, prints the summary (unless quiet) and maps the
/// outcome to an exit code. Never throws.
int dispatch(std::string_view subcommand, const ExperimentConfig& cfg,
             const std::filesystem::path& out_dir, std::ostream& log, bool quiet);

}  // namespace dpolymer
