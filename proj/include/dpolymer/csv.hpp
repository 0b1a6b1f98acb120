#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "dpolymer/experiments.hpp"

namespace dpolymer {

inline constexpr std::string_view kCsvHeader =
    "experiment,beta,t,estimate,std_error,bound,target,verdict,heuristic,n_envs,n_paths,seed";

/// Stable sort by (experiment, beta, t); NaN beta or t sorts first.
std::vector<SummaryRecord> sorted_records(std::span<const SummaryRecord> records);

/// CSV text of the sorted records. Reals use %.17g; NaN and absent values
/// are empty fields.
std::string render_csv(std::span<const SummaryRecord> records);

/// Writes render_csv(records) to `path`, creating parent directories. Throws
/// std::runtime_error on I/O failure.
void emit_csv(std::span<const SummaryRecord> records, const std::filesystem::path& path);

/// Aligned plain-text table for terminals.
void print_summary(std::ostream& os, std::span<const SummaryRecord> records);

}  // namespace dpolymer
