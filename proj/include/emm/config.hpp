#pragma once

// Flat `key = value` run configuration files.

#include <filesystem>
#include <string>
#include <string_view>

#include "emm/engine.hpp"

namespace emm {

/// Parses configuration text. Missing keys keep their defaults; unknown keys
/// and malformed lines raise ConfigError with the line number. The result is
/// validated, so out-of-range values raise ConfigError naming the key.
RunConfig parse_config_text(std::string_view text);
RunConfig parse_config(const std::filesystem::path& path);

/// Emits every key of the effective configuration; parsing the dump yields an
/// identical RunConfig.
std::string dump_config(const RunConfig& config);

}  // namespace emm
