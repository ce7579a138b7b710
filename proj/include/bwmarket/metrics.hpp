#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "bwmarket/simulator.hpp"

namespace bwm {

/// Satisfied demands over generated demands. A satisfied demand counts even
/// if its realized cost exceeded its reward. Throws std::domain_error for a
/// log without demands.
double success_ratio(const SimulationLog& log);

struct ProfitSummary {
  std::vector<double> per_user;  // final cash; users start with none
  double mean_per_user = 0.0;
  double mean_per_demand = 0.0;  // total profit / generated demands (0 if none)
};

ProfitSummary net_profit(const SimulationLog& log);

/// lambda_j * log(S_j(t) / S_j(0)) for t = 0..L, where row 0 uses the
/// initial prices and row t the price logged after step t - 1.
std::vector<std::vector<double>> load_series(const SimulationLog& log);

/// Largest |implied load - bookkept outstanding units| over all logged
/// steps and markets.
double max_load_discrepancy(const SimulationLog& log);

struct MessageSummary {
  std::int64_t trades = 0;
  std::int64_t bids = 0;
  std::int64_t quote_updates = 0;
  double bids_per_trade = 0.0;           // <= 1
  double quote_updates_per_trade = 0.0;  // < M
};

MessageSummary message_summary(const SimulationLog& log);

struct EfficiencyReport {
  double liquidity = 0.0;     // first market's lambda, the sweep key
  double budget_factor = 0.0; // C_max
  std::uint64_t seed = 0;
  std::int64_t demands = 0;
  std::int64_t satisfied = 0;
  double success_ratio = 0.0;
  ProfitSummary profit;
  MessageSummary messages;
};

EfficiencyReport efficiency_report(const SimulationLog& log);

std::string efficiency_csv_header();
std::string efficiency_csv_row(const EfficiencyReport& report);

}  // namespace bwm
