#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "bwmarket/simulator.hpp"

namespace bwm {

/// Flat "key = value" configuration. Keys: N M L dt m D K C_unit C_max
/// lambda S0 topology seed cash_rule. lambda and S0 take one value or a
/// comma-separated list with one entry per router. topology is "default" or
/// an edge-list path resolved against `base_dir`. '#' starts a comment.
/// Missing keys keep their defaults. Throws ConfigError naming the key.
SimulationConfig parse_config(std::string_view text, const std::filesystem::path& base_dir = {});
SimulationConfig load_config_file(const std::filesystem::path& path);

/// Inverse of parse_config for everything except the topology, which is
/// written as its source string.
std::string format_config(const SimulationConfig& config);

const char* to_string(CashRule rule);

}  // namespace bwm
