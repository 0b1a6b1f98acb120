#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "dpolymer/experiments.hpp"

namespace dpolymer {

/// Parses the flat `section.key = value` format. `#` starts a comment.
/// Unknown or repeated keys, malformed values and out-of-range values throw
/// ConfigError with a `line L, column C:` prefix; cross-field checks run last.
ExperimentConfig parse_config(std::string_view text);

ExperimentConfig load_config(const std::filesystem::path& path);

/// Renders every key of `cfg` in canonical order; parse_config of the result
/// reproduces `cfg`.
std::string emit_config(const ExperimentConfig& cfg);

}  // namespace dpolymer
