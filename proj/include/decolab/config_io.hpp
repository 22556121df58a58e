#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "decolab/physical_model.hpp"

namespace decolab {

/// Parses the flat key=value format ('#' starts a comment). Throws
/// ConfigError carrying the line number for syntax problems and the field
/// name for missing keys or failed validation.
ExperimentConfig parse_config(std::string_view text);

ExperimentConfig load_config(const std::filesystem::path& path);

/// Inverse of parse_config; numbers are written with 17 significant digits.
std::string format_config(const ExperimentConfig& cfg);

}  // namespace decolab
