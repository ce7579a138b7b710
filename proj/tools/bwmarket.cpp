#include <algorithm>
#include <cmath>
#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"

#include "bwmarket/config.hpp"
#include "bwmarket/estimate.hpp"
#include "bwmarket/io.hpp"
#include "bwmarket/metrics.hpp"
#include "bwmarket/sde.hpp"
#include "bwmarket/simulator.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kExitValidation = 1;
constexpr int kExitRuntime = 2;

// Input the user can fix: bad flags, bad config, bad lists.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

void make_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create " + dir.string() + ": " + ec.message());
}

std::vector<double> parse_numbers(const std::string& flag, const std::string& text) {
  std::vector<double> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (item.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument(item);
    } catch (const std::logic_error&) {
      throw UsageError(flag + ": not a number: '" + item + "'");
    }
  }
  if (out.empty()) throw UsageError(flag + ": empty list");
  return out;
}

// Accepts "1,2,5" and ranges such as "1-10".
std::vector<std::uint64_t> parse_seeds(const std::string& text) {
  std::vector<std::uint64_t> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    try {
      const auto dash = item.find('-', 1);
      if (dash == std::string::npos) {
        out.push_back(std::stoull(item));
      } else {
        const auto lo = std::stoull(item.substr(0, dash));
        const auto hi = std::stoull(item.substr(dash + 1));
        if (hi < lo) throw std::invalid_argument(item);
        for (auto s = lo; s <= hi; ++s) out.push_back(s);
      }
    } catch (const std::logic_error&) {
      throw UsageError("--seeds: cannot parse '" + item + "'");
    }
  }
  if (out.empty()) throw UsageError("--seeds: empty list");
  return out;
}

bwm::SimulationConfig load_config(const std::string& config_path, const std::string& manifest_path) {
  if (!config_path.empty() && !manifest_path.empty()) {
    throw UsageError("--config and --manifest are mutually exclusive");
  }
  if (!manifest_path.empty()) return bwm::config_from_manifest(slurp(manifest_path));
  if (!config_path.empty()) {
    if (!fs::exists(config_path)) throw UsageError("cannot open " + config_path);
    return bwm::load_config_file(config_path);
  }
  return bwm::SimulationConfig{};
}

struct RunArgs {
  std::string config;
  std::string manifest;
  std::int64_t seed = -1;
  std::string out;
};

int cmd_run(const RunArgs& args) {
  bwm::SimulationConfig config = load_config(args.config, args.manifest);
  if (args.seed >= 0) config.seed = static_cast<std::uint64_t>(args.seed);
  config.validate();

  const auto log = bwm::run(config);
  const fs::path dir(args.out);
  make_dir(dir);
  {
    auto out = open_out(dir / "prices.csv");
    bwm::write_price_csv(out, log);
  }
  {
    auto out = open_out(dir / "demands.jsonl");
    bwm::write_demands_jsonl(out, log);
  }
  {
    auto out = open_out(dir / "manifest.json");
    out << bwm::manifest_json(config, {{"prices", "prices.csv"}, {"demands", "demands.jsonl"}});
  }
  const auto report = bwm::efficiency_report(log);
  std::printf("steps %d, demands %lld, satisfied %lld (%.3f), mean profit per user %.6g\n",
              config.steps, static_cast<long long>(report.demands),
              static_cast<long long>(report.satisfied), report.success_ratio,
              report.profit.mean_per_user);
  return 0;
}

struct SweepArgs {
  std::string config;
  std::string lambdas = "1,10,100";
  std::string cmax = "1,4,16,64";
  std::string seeds = "1-10";
  std::string out = "-";
  unsigned jobs = 0;
};

int cmd_sweep(const SweepArgs& args) {
  const bwm::SimulationConfig base = load_config(args.config, "");
  const auto lambdas = parse_numbers("--lambdas", args.lambdas);
  const auto cmaxes = parse_numbers("--cmax", args.cmax);
  const auto seeds = parse_seeds(args.seeds);

  std::vector<bwm::SimulationConfig> cells;
  for (double lambda : lambdas) {
    for (double cmax : cmaxes) {
      for (auto seed : seeds) {
        bwm::SimulationConfig c = base;
        c.liquidity = {lambda};
        c.budget_factor = cmax;
        c.seed = seed;
        c.validate();
        cells.push_back(std::move(c));
      }
    }
  }

  std::vector<std::string> rows(cells.size());
  std::vector<std::string> errors(cells.size());
  std::atomic<std::size_t> next{0};
  const auto worker = [&] {
    for (std::size_t i = next++; i < cells.size(); i = next++) {
      try {
        rows[i] = bwm::efficiency_csv_row(bwm::efficiency_report(bwm::run(cells[i])));
      } catch (const std::exception& e) {
        errors[i] = e.what();
      }
    }
  };
  unsigned jobs = args.jobs > 0 ? args.jobs : std::max(1u, std::thread::hardware_concurrency());
  jobs = std::min<unsigned>(jobs, static_cast<unsigned>(cells.size()));
  std::vector<std::thread> pool;
  for (unsigned j = 1; j < jobs; ++j) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  std::ofstream file;
  if (args.out != "-") file = open_out(args.out);
  std::ostream& out = args.out == "-" ? std::cout : file;
  out << bwm::efficiency_csv_header() << ",status\n";
  std::size_t failed = 0;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (errors[i].empty()) {
      out << rows[i] << ",ok\n";
      continue;
    }
    ++failed;
    char key[96];
    std::snprintf(key, sizeof key, "%.17g,%.17g,%llu", cells[i].liquidity.front(),
                  cells[i].budget_factor, static_cast<unsigned long long>(cells[i].seed));
    out << key << ",,,,,,,,,failed\n";
    std::cerr << "bwmarket sweep: cell (" << key << ") failed: " << errors[i] << '\n';
  }
  if (failed > 0) {
    std::cerr << "bwmarket sweep: " << failed << " of " << cells.size() << " cells failed\n";
    return kExitRuntime;
  }
  return 0;
}

struct EstimateArgs {
  std::string prices;
  std::string model = "mn";
  std::size_t bins = 15;
  std::size_t k_max = 20;
  std::size_t k_fit = 0;
  double guard = 0.04;
  double dt = 0.0;
  std::string topology;
  std::string out;
};

int router_id(const std::string& label) {
  if (label.size() < 3 || label.rfind("S_", 0) != 0) return -1;
  try {
    std::size_t used = 0;
    const int id = std::stoi(label.substr(2), &used);
    return used + 2 == label.size() ? id : -1;
  } catch (const std::logic_error&) {
    return -1;
  }
}

// Topology for adjacency marks: the flag, else a manifest beside the CSV.
std::optional<bwm::Topology> estimate_topology(const EstimateArgs& args) {
  if (args.topology == "default") return bwm::default_topology();
  if (!args.topology.empty()) return bwm::load_topology_file(args.topology);
  const fs::path manifest = fs::path(args.prices).parent_path() / "manifest.json";
  if (!fs::exists(manifest)) return std::nullopt;
  try {
    return bwm::config_from_manifest(slurp(manifest)).topology;
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

int cmd_estimate(const EstimateArgs& args) {
  bwm::EstimateOptions options;
  if (args.model == "ou") options.model = bwm::NoiseKind::Additive;
  else if (args.model == "mn") options.model = bwm::NoiseKind::Multiplicative;
  else throw UsageError("--model: expected ou or mn");
  if (!(args.guard >= 0.0)) throw UsageError("--guard: must be >= 0");
  if (args.dt < 0.0) throw UsageError("--dt: must be > 0");
  options.bins = args.bins;
  options.decay.k_max = args.k_max;
  options.decay.guard = args.guard;
  options.k_fit = args.k_fit;

  std::vector<bwm::PriceSeries> columns;
  {
    std::ifstream in(args.prices);
    if (!in) throw UsageError("cannot open " + args.prices);
    try {
      columns = bwm::read_price_csv(in, args.dt);
    } catch (const std::runtime_error& e) {
      throw UsageError(args.prices + ": " + e.what());
    }
  }
  const auto topology = estimate_topology(args);
  const fs::path dir(args.out);
  make_dir(dir);

  std::vector<std::string> labels;
  std::vector<std::vector<double>> residuals;
  std::vector<int> ids;
  for (const auto& column : columns) {
    try {
      bwm::EstimationReport report = bwm::estimate_report(column, options);
      report.label = column.label;
      {
        auto out = open_out(dir / ("report_" + column.label + ".json"));
        out << bwm::report_json(report);
      }
      {
        auto out = open_out(dir / ("decay_" + column.label + ".csv"));
        bwm::write_decay_csv(out, report.decay);
      }
      {
        auto out = open_out(dir / ("density_" + column.label + ".csv"));
        bwm::write_density_csv(out, report.density_fit);
      }
      {
        auto out = open_out(dir / ("residuals_" + column.label + ".csv"));
        bwm::write_residual_histogram_csv(out, report.residual_histogram, report.residual_normality);
      }
      const auto& p = report.fit.params;
      std::printf("%s: alpha %.6g mu %.6g sigma %.6g, residual KS %.4f\n", column.label.c_str(),
                  p.alpha, p.mu, p.sigma, report.residual_normality.ks_distance);
      labels.push_back(column.label);
      ids.push_back(router_id(column.label));
      residuals.push_back(std::move(report.fit.residuals));
    } catch (const std::exception& e) {
      std::cerr << "bwmarket estimate: column " << column.label << " failed: " << e.what() << '\n';
    }
  }
  if (labels.empty()) {
    std::cerr << "bwmarket estimate: every column failed\n";
    return kExitRuntime;
  }
  if (labels.size() >= 2) {
    try {
      const auto rho = bwm::correlation_matrix(residuals);
      auto out = open_out(dir / "correlation.csv");
      bwm::write_matrix_csv(out, labels, rho, topology ? &*topology : nullptr, &ids);
    } catch (const std::exception& e) {
      std::cerr << "bwmarket estimate: correlation matrix failed: " << e.what() << '\n';
    }
  }
  if (labels.size() < columns.size()) {
    std::cerr << "bwmarket estimate: " << columns.size() - labels.size() << " of " << columns.size()
              << " columns failed\n";
  }
  return 0;
}

struct SimulateArgs {
  std::string model = "ou";
  double alpha = 5.0;
  double mu = 10.0;
  double sigma = 1.0;
  std::size_t steps = 100000;
  double dt = 0.01;
  double s0 = std::numeric_limits<double>::quiet_NaN();
  std::uint64_t seed = 1;
  std::string out = "-";
};

int cmd_simulate(const SimulateArgs& args) {
  bwm::SdeParams p;
  if (args.model == "ou") p.kind = bwm::NoiseKind::Additive;
  else if (args.model == "mn") p.kind = bwm::NoiseKind::Multiplicative;
  else throw UsageError("--model: expected ou or mn");
  p.alpha = args.alpha;
  p.mu = args.mu;
  p.sigma = args.sigma;
  try {
    p.validate(/*allow_zero_sigma=*/true);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  const double s0 = std::isnan(args.s0) ? p.mu : args.s0;
  auto path = bwm::simulate_path(p, args.steps, args.dt, s0, args.seed);
  path.series.label = "value";
  std::ofstream file;
  if (args.out != "-") file = open_out(args.out);
  bwm::write_series_csv(args.out == "-" ? std::cout : file, path.series);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bandwidth market simulator and SDE calibration toolkit", "bwmarket"};
  app.set_version_flag("--version", std::string(bwm::kToolVersion));
  app.require_subcommand(1);

  RunArgs run_args;
  auto* run = app.add_subcommand("run", "Simulate one market run and write its artifacts");
  run->add_option("--config", run_args.config, "Key-value config file (defaults if omitted)");
  run->add_option("--manifest", run_args.manifest, "Rerun from a manifest.json");
  run->add_option("--seed", run_args.seed, "Override the configured seed")->check(CLI::NonNegativeNumber);
  run->add_option("--out", run_args.out, "Output directory")->required();

  SweepArgs sweep_args;
  auto* sweep = app.add_subcommand("sweep", "Run a liquidity x budget x seed grid");
  sweep->add_option("--config", sweep_args.config, "Base config file");
  sweep->add_option("--lambdas", sweep_args.lambdas, "Comma-separated liquidities")->capture_default_str();
  sweep->add_option("--cmax", sweep_args.cmax, "Comma-separated budget factors")->capture_default_str();
  sweep->add_option("--seeds", sweep_args.seeds, "Seeds, e.g. 1-10 or 1,4,9")->capture_default_str();
  sweep->add_option("--out", sweep_args.out, "Output CSV ('-' for stdout)")->capture_default_str();
  sweep->add_option("--jobs", sweep_args.jobs, "Worker threads (0 = all cores)");

  EstimateArgs est_args;
  auto* estimate = app.add_subcommand("estimate", "Calibrate an SDE to each column of a price CSV");
  estimate->add_option("--prices", est_args.prices, "Price CSV (t column then one column per series)")
      ->required();
  estimate->add_option("--model", est_args.model, "ou or mn")->capture_default_str();
  estimate->add_option("--bins", est_args.bins, "Histogram bins")->capture_default_str()->check(CLI::Range(2, 100000));
  estimate->add_option("--kmax", est_args.k_max, "Largest decay lag")->capture_default_str()->check(CLI::PositiveNumber);
  estimate->add_option("--k-fit", est_args.k_fit, "Decay lags used for alpha (0 = automatic)");
  estimate->add_option("--guard", est_args.guard, "Guard band around the mean, in standard deviations")
      ->capture_default_str();
  estimate->add_option("--dt", est_args.dt, "Sampling interval (0 = infer from the t column)");
  estimate->add_option("--topology", est_args.topology, "Edge-list file or 'default' for adjacency marks");
  estimate->add_option("--out", est_args.out, "Output directory")->required();

  SimulateArgs sim_args;
  auto* simulate = app.add_subcommand("simulate", "Write a synthetic SDE path as a series CSV");
  simulate->add_option("--model", sim_args.model, "ou or mn")->capture_default_str();
  simulate->add_option("--alpha", sim_args.alpha)->capture_default_str();
  simulate->add_option("--mu", sim_args.mu)->capture_default_str();
  simulate->add_option("--sigma", sim_args.sigma)->capture_default_str();
  simulate->add_option("--steps", sim_args.steps)->capture_default_str();
  simulate->add_option("--dt", sim_args.dt)->capture_default_str()->check(CLI::PositiveNumber);
  simulate->add_option("--s0", sim_args.s0, "Start value (defaults to mu)");
  simulate->add_option("--seed", sim_args.seed)->capture_default_str();
  simulate->add_option("--out", sim_args.out, "Output CSV ('-' for stdout)")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitValidation;
  }

  try {
    if (*run) return cmd_run(run_args);
    if (*sweep) return cmd_sweep(sweep_args);
    if (*estimate) return cmd_estimate(est_args);
    if (*simulate) return cmd_simulate(sim_args);
  } catch (const bwm::ConfigError& e) {
    std::cerr << "bwmarket: invalid configuration: " << e.what() << '\n';
    return kExitValidation;
  } catch (const UsageError& e) {
    std::cerr << "bwmarket: " << e.what() << '\n';
    return kExitValidation;
  } catch (const bwm::TopologyError& e) {
    std::cerr << "bwmarket: topology: " << e.what() << '\n';
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "bwmarket: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitRuntime;
}
