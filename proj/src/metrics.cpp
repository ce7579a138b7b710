#include "bwmarket/metrics.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace bwm {

double success_ratio(const SimulationLog& log) {
  if (log.demands.empty()) throw std::domain_error("success_ratio: no demands were generated");
  std::int64_t satisfied = 0;
  for (const auto& d : log.demands) satisfied += d.outcome == DemandOutcome::Satisfied;
  return static_cast<double>(satisfied) / static_cast<double>(log.demands.size());
}

ProfitSummary net_profit(const SimulationLog& log) {
  ProfitSummary out;
  out.per_user = log.final_cash;
  double total = 0.0;
  for (double c : out.per_user) total += c;
  if (!out.per_user.empty()) out.mean_per_user = total / static_cast<double>(out.per_user.size());
  if (!log.demands.empty()) out.mean_per_demand = total / static_cast<double>(log.demands.size());
  return out;
}

std::vector<std::vector<double>> load_series(const SimulationLog& log) {
  const int routers = log.config.routers;
  std::vector<std::vector<double>> out;
  out.reserve(log.records.size() + 1);
  out.emplace_back(routers, 0.0);
  for (const auto& rec : log.records) {
    std::vector<double> row(routers);
    for (int j = 0; j < routers; ++j) {
      row[j] = log.config.liquidity_of(j) * std::log(rec.prices[j] / log.config.initial_price_of(j));
    }
    out.push_back(std::move(row));
  }
  return out;
}

double max_load_discrepancy(const SimulationLog& log) {
  const auto loads = load_series(log);
  double worst = 0.0;
  for (std::size_t t = 0; t < log.records.size(); ++t) {
    for (std::size_t j = 0; j < loads[t + 1].size(); ++j) {
      const double gap =
          std::abs(loads[t + 1][j] - static_cast<double>(log.records[t].outstanding[j]));
      worst = std::max(worst, gap);
    }
  }
  return worst;
}

MessageSummary message_summary(const SimulationLog& log) {
  MessageSummary out;
  for (const auto& rec : log.records) {
    out.trades += rec.trades;
    out.bids += rec.bids;
    out.quote_updates += rec.quote_updates;
  }
  if (out.trades > 0) {
    out.bids_per_trade = static_cast<double>(out.bids) / static_cast<double>(out.trades);
    out.quote_updates_per_trade =
        static_cast<double>(out.quote_updates) / static_cast<double>(out.trades);
  }
  return out;
}

EfficiencyReport efficiency_report(const SimulationLog& log) {
  EfficiencyReport r;
  r.liquidity = log.config.liquidity_of(0);
  r.budget_factor = log.config.budget_factor;
  r.seed = log.config.seed;
  r.demands = static_cast<std::int64_t>(log.demands.size());
  for (const auto& d : log.demands) r.satisfied += d.outcome == DemandOutcome::Satisfied;
  r.success_ratio = r.demands > 0 ? static_cast<double>(r.satisfied) / static_cast<double>(r.demands)
                                  : std::nan("");
  r.profit = net_profit(log);
  r.messages = message_summary(log);
  return r;
}

std::string efficiency_csv_header() {
  return "lambda,C_max,seed,demands,satisfied,success_ratio,mean_profit_per_user,"
         "mean_profit_per_demand,trades,bids,quote_updates";
}

std::string efficiency_csv_row(const EfficiencyReport& r) {
  char buf[512];
  std::snprintf(buf, sizeof buf, "%.17g,%.17g,%llu,%lld,%lld,%.17g,%.17g,%.17g,%lld,%lld,%lld",
                r.liquidity, r.budget_factor, static_cast<unsigned long long>(r.seed),
                static_cast<long long>(r.demands), static_cast<long long>(r.satisfied),
                r.success_ratio, r.profit.mean_per_user, r.profit.mean_per_demand,
                static_cast<long long>(r.messages.trades), static_cast<long long>(r.messages.bids),
                static_cast<long long>(r.messages.quote_updates));
  return buf;
}

}  // namespace bwm
