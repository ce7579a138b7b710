#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"
#include "json.hpp"

#include "bwmarket/config.hpp"
#include "bwmarket/io.hpp"

using bwm::SimulationConfig;

namespace {

std::string price_csv(const SimulationConfig& c) {
  std::ostringstream out;
  bwm::write_price_csv(out, bwm::run(c));
  return out.str();
}

std::string config_error_field(const std::string& text) {
  try {
    bwm::parse_config(text);
  } catch (const bwm::ConfigError& e) {
    return e.field();
  }
  return "";
}

}  // namespace

TEST_CASE("config: defaults and overrides") {
  const auto defaults = bwm::parse_config("# nothing set\n");
  CHECK(defaults.routers == 10);
  CHECK(defaults.steps == 1000);
  CHECK(defaults.liquidity == std::vector<double>{10.0});

  const auto c = bwm::parse_config(
      "N = 10\nL = 25  # short\nlambda = 1, 2, 3, 4, 5, 6, 7, 8, 9, 10\nC_max = 4\nseed = 42\n"
      "cash_rule = pre_trade\n");
  CHECK(c.steps == 25);
  CHECK(c.liquidity.size() == 10);
  CHECK(c.liquidity_of(9) == 10.0);
  CHECK(c.budget_factor == 4.0);
  CHECK(c.seed == 42);
  CHECK(c.cash_rule == bwm::CashRule::PreTrade);

  const auto round = bwm::parse_config(bwm::format_config(c));
  CHECK(round.liquidity == c.liquidity);
  CHECK(round.seed == c.seed);
  CHECK(round.cash_rule == c.cash_rule);
}

TEST_CASE("config: errors name the field") {
  CHECK(config_error_field("lambda = 0\n") == "lambda");
  CHECK(config_error_field("lambda = -3\n") == "lambda");
  CHECK(config_error_field("lambda = abc\n") == "lambda");
  CHECK(config_error_field("L = 1.5\n") == "L");
  CHECK(config_error_field("bogus = 1\n") == "bogus");
  CHECK(config_error_field("cash_rule = sometimes\n") == "cash_rule");
  CHECK(config_error_field("topology = /nonexistent/graph.txt\n") == "topology");
  CHECK(config_error_field("N = 4\n") == "topology");
  try {
    bwm::parse_config("lambda = 0\n");
  } catch (const bwm::ConfigError& e) {
    CHECK(std::string(e.what()).find("liquidity") != std::string::npos);
  }
}

TEST_CASE("config: topology file relative to the config") {
  const auto dir = std::filesystem::temp_directory_path() / "bwmarket_io_test";
  std::filesystem::create_directories(dir);
  std::ofstream(dir / "ring.txt") << "4\n0 1\n1 2\n2 3\n3 0\n";
  std::ofstream(dir / "ring.cfg") << "N = 4\ntopology = ring.txt\nL = 20\n";
  const auto c = bwm::load_config_file(dir / "ring.cfg");
  CHECK(c.topology.edges().size() == 4);
  CHECK(c.topology_source == "ring.txt");
  CHECK(bwm::run(c).records.size() == 20);
  std::filesystem::remove_all(dir);
}

TEST_CASE("price csv: shape and determinism") {
  SimulationConfig c;
  const std::string a = price_csv(c);
  CHECK(a == price_csv(c));
  std::istringstream in(a);
  std::string line;
  std::getline(in, line);
  CHECK(line == "t,S_0,S_1,S_2,S_3,S_4,S_5,S_6,S_7,S_8,S_9");
  int rows = 0;
  while (std::getline(in, line)) {
    ++rows;
    CHECK(std::count(line.begin(), line.end(), ',') == 10);
  }
  CHECK(rows == 1000);
  c.seed = 2;
  CHECK(a != price_csv(c));
}

TEST_CASE("price csv: reading back is exact") {
  SimulationConfig c;
  c.steps = 200;
  const auto log = bwm::run(c);
  std::ostringstream out;
  bwm::write_price_csv(out, log);
  std::istringstream in(out.str());
  const auto series = bwm::read_price_csv(in);
  REQUIRE(series.size() == 10);
  CHECK(series[3].label == "S_3");
  CHECK(series[0].dt == doctest::Approx(0.01).epsilon(1e-12));
  for (std::size_t t = 0; t < 200; ++t)
    for (std::size_t j = 0; j < 10; ++j) CHECK(series[j].values[t] == log.records[t].prices[j]);
}

TEST_CASE("price csv: malformed input") {
  std::istringstream ragged("t,a,b\n0.01,1,2\n0.02,1\n");
  CHECK_THROWS_AS(bwm::read_price_csv(ragged), std::runtime_error);
  std::istringstream words("t,a\n0.01,x\n0.02,1\n");
  CHECK_THROWS_AS(bwm::read_price_csv(words), std::runtime_error);
  std::istringstream comments("# exported\nt,a\n0.5,1\n1.0,2\n1.5,3\n");
  const auto s = bwm::read_price_csv(comments);
  CHECK(s[0].dt == 0.5);
  CHECK(s[0].values == std::vector<double>{1, 2, 3});
  std::istringstream single("t,a\n0.5,1\n");
  CHECK(bwm::read_price_csv(single, 0.25)[0].dt == 0.25);
}

TEST_CASE("demand records are one JSON object per line") {
  SimulationConfig c;
  c.steps = 5;
  const auto log = bwm::run(c);
  std::ostringstream out;
  bwm::write_demands_jsonl(out, log);
  std::istringstream in(out.str());
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    const auto j = nlohmann::json::parse(line);
    CHECK(j.at("id").get<std::size_t>() == n);
    CHECK(j.at("cap").get<int>() >= 1);
    const std::string outcome = j.at("outcome");
    CHECK((outcome == "satisfied" || outcome == "rejected"));
    ++n;
  }
  CHECK(n == 50);
}

TEST_CASE("manifest regenerates the run") {
  SimulationConfig c;
  c.steps = 150;
  c.seed = 99;
  c.liquidity = {3, 4, 5, 6, 7, 8, 9, 10, 11, 12};
  c.budget_factor = 2.5;
  const std::string manifest = bwm::manifest_json(c, {{"prices", "prices.csv"}});
  const auto j = nlohmann::json::parse(manifest);
  CHECK(j.at("seed") == 99);
  CHECK(j.at("version") == std::string(bwm::kToolVersion));
  CHECK(j.at("artifacts").at("prices") == "prices.csv");
  const auto back = bwm::config_from_manifest(manifest);
  CHECK(back.topology.edges() == c.topology.edges());
  CHECK(price_csv(back) == price_csv(c));
  CHECK_THROWS_AS(bwm::config_from_manifest("{}"), bwm::ConfigError);
  CHECK_THROWS_AS(bwm::config_from_manifest("not json"), bwm::ConfigError);
}

TEST_CASE("estimation artifacts") {
  const auto path = bwm::simulate_path({bwm::NoiseKind::Multiplicative, 5, 10, 0.3}, 5000, 0.01, 10, 1);
  auto report = bwm::estimate_report(path.series);
  report.label = "S_0";
  const auto j = nlohmann::json::parse(bwm::report_json(report));
  CHECK(j.at("label") == "S_0");
  CHECK(j.at("model") == "multiplicative");
  CHECK(j.at("params").at("alpha").get<double>() == report.fit.params.alpha);

  std::ostringstream decay, density, hist;
  bwm::write_decay_csv(decay, report.decay);
  bwm::write_density_csv(density, report.density_fit);
  bwm::write_residual_histogram_csv(hist, report.residual_histogram, report.residual_normality);
  const std::string decay_text = decay.str();
  CHECK(decay_text.rfind("k,", 0) == 0);
  CHECK(std::count(decay_text.begin(), decay_text.end(), '\n') == 22);
  CHECK(!density.str().empty());
  CHECK(!hist.str().empty());
}

TEST_CASE("correlation matrix csv marks adjacent routers") {
  bwm::CorrelationMatrix rho(3);
  rho.set(0, 1, 0.25);
  const auto topo = bwm::Topology::from_edges(3, {{0, 1}, {1, 2}});
  const std::vector<int> ids{0, 1, 2};
  std::ostringstream out;
  bwm::write_matrix_csv(out, {"S_0", "S_1", "S_2"}, rho, &topo, &ids);
  const std::string text = out.str();
  CHECK(text.find("0.2500*") != std::string::npos);
  CHECK(text.find("0.0000*") != std::string::npos);
  CHECK(std::count(text.begin(), text.end(), '\n') == 4);
}
