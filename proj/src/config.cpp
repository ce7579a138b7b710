#include "bwmarket/config.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

namespace bwm {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

double parse_double(const std::string& key, std::string_view text) {
  text = trim(text);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size() || text.empty()) {
    throw ConfigError(key, "expected a number, got '" + std::string(text) + "'");
  }
  return value;
}

long long parse_integer(const std::string& key, std::string_view text) {
  text = trim(text);
  long long value = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size() || text.empty()) {
    throw ConfigError(key, "expected an integer, got '" + std::string(text) + "'");
  }
  return value;
}

int parse_int(const std::string& key, std::string_view text) {
  const long long v = parse_integer(key, text);
  if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max()) {
    throw ConfigError(key, "integer out of range");
  }
  return static_cast<int>(v);
}

std::vector<double> parse_list(const std::string& key, std::string_view text) {
  std::vector<double> out;
  while (true) {
    const auto comma = text.find(',');
    out.push_back(parse_double(key, text.substr(0, comma)));
    if (comma == std::string_view::npos) break;
    text.remove_prefix(comma + 1);
  }
  return out;
}

std::string format_list(const std::vector<double>& values) {
  std::string out;
  char buf[64];
  for (std::size_t i = 0; i < values.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g", values[i]);
    if (i > 0) out += ',';
    out += buf;
  }
  return out;
}

}  // namespace

const char* to_string(CashRule rule) {
  return rule == CashRule::PostImpact ? "post_impact" : "pre_trade";
}

SimulationConfig parse_config(std::string_view text, const std::filesystem::path& base_dir) {
  SimulationConfig config;
  std::istringstream in{std::string(text)};
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line = raw;
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError("line " + std::to_string(line_no), "expected 'key = value'");
    }
    const std::string key(trim(line.substr(0, eq)));
    const std::string_view value = trim(line.substr(eq + 1));

    if (key == "N") config.routers = parse_int(key, value);
    else if (key == "M") config.users = parse_int(key, value);
    else if (key == "L") config.steps = parse_int(key, value);
    else if (key == "dt") config.dt = parse_double(key, value);
    else if (key == "m") config.demands_per_step = parse_int(key, value);
    else if (key == "D") config.max_duration = parse_int(key, value);
    else if (key == "K") config.capacity_exponent = parse_double(key, value);
    else if (key == "C_unit") config.unit_value = parse_double(key, value);
    else if (key == "C_max") config.budget_factor = parse_double(key, value);
    else if (key == "lambda") config.liquidity = parse_list(key, value);
    else if (key == "S0") config.initial_price = parse_list(key, value);
    else if (key == "seed") {
      const long long seed = parse_integer(key, value);
      if (seed < 0) throw ConfigError(key, "seed must be >= 0");
      config.seed = static_cast<std::uint64_t>(seed);
    } else if (key == "cash_rule") {
      if (value == "post_impact") config.cash_rule = CashRule::PostImpact;
      else if (value == "pre_trade") config.cash_rule = CashRule::PreTrade;
      else throw ConfigError(key, "expected post_impact or pre_trade");
    } else if (key == "topology") {
      config.topology_source = std::string(value);
      if (value == "default") {
        config.topology = default_topology();
      } else {
        std::filesystem::path path(value);
        if (path.is_relative() && !base_dir.empty()) path = base_dir / path;
        try {
          config.topology = load_topology_file(path);
        } catch (const std::exception& e) {
          throw ConfigError(key, e.what());
        }
      }
    } else {
      throw ConfigError(key, "unknown key");
    }
  }
  config.validate();
  return config;
}

SimulationConfig load_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("config: cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), path.parent_path());
}

std::string format_config(const SimulationConfig& c) {
  std::ostringstream out;
  char buf[64];
  const auto num = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return std::string(buf);
  };
  out << "N = " << c.routers << '\n'
      << "M = " << c.users << '\n'
      << "L = " << c.steps << '\n'
      << "dt = " << num(c.dt) << '\n'
      << "m = " << c.demands_per_step << '\n'
      << "D = " << c.max_duration << '\n'
      << "K = " << num(c.capacity_exponent) << '\n'
      << "C_unit = " << num(c.unit_value) << '\n'
      << "C_max = " << num(c.budget_factor) << '\n'
      << "lambda = " << format_list(c.liquidity) << '\n'
      << "S0 = " << format_list(c.initial_price) << '\n'
      << "topology = " << c.topology_source << '\n'
      << "seed = " << c.seed << '\n'
      << "cash_rule = " << to_string(c.cash_rule) << '\n';
  return out.str();
}

}  // namespace bwm
