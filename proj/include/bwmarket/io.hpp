#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "bwmarket/estimate.hpp"
#include "bwmarket/series.hpp"
#include "bwmarket/simulator.hpp"

namespace bwm {

inline constexpr std::string_view kToolVersion = "0.3.0";

/// Price CSV: header "t,S_0,...,S_{N-1}", one row per step with
/// t = (step + 1) * dt. Prices are written with 17 significant digits.
void write_price_csv(std::ostream& out, const SimulationLog& log);

/// Single-series CSV with header "t,value".
void write_series_csv(std::ostream& out, const PriceSeries& series);

/// Reads any CSV whose first column is t and whose other columns are
/// series; labels come from the header. Lines starting with '#' are
/// skipped. dt <= 0 infers the spacing from the t column.
std::vector<PriceSeries> read_price_csv(std::istream& in, double dt = 0.0);

/// One JSON object per line: id, uid, src, dst, cap, dur, max, outcome,
/// est_cost, path, sell_step, realized_cash.
void write_demands_jsonl(std::ostream& out, const SimulationLog& log);

/// Run manifest: tool version, seed, the full config with the topology's
/// edges inline, and artifact paths.
std::string manifest_json(const SimulationConfig& config,
                          const std::map<std::string, std::string>& artifacts);

/// Rebuilds the config recorded by manifest_json(). Throws ConfigError.
SimulationConfig config_from_manifest(std::string_view json);

/// Structured estimation report (params, diagnostics arrays, fit errors).
std::string report_json(const EstimationReport& report);

/// Lag curves: k, ratio, ratio_stderr, alpha, autocov.
void write_decay_csv(std::ostream& out, const DecayCurve& curve);

/// Histogram and fitted density at each bin center: center, observed, fitted.
void write_density_csv(std::ostream& out, const DensityFit& fit);

/// Residual histogram with the matching normal density.
void write_residual_histogram_csv(std::ostream& out, const Histogram& histogram,
                                  const NormalitySummary& normality);

/// Matrix CSV; entries for adjacent routers get a trailing '*' when an
/// adjacency test is supplied.
void write_matrix_csv(std::ostream& out, const std::vector<std::string>& labels,
                      const CorrelationMatrix& rho, const Topology* topology = nullptr,
                      const std::vector<int>* router_ids = nullptr);

}  // namespace bwm
