#pragma once

#include <cstddef>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "bwmarket/sde.hpp"
#include "bwmarket/series.hpp"

namespace bwm {

/// The input cannot identify the requested quantity (constant series,
/// zero-variance residuals, decay curve without a positive window, ...).
class DegenerateInputError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// (1 / dt) * mean of squared increments.
double increment_variance_rate(const PriceSeries& series);
/// (1 / dt) * mean of squared log increments. Values must be positive.
double log_increment_variance_rate(const PriceSeries& series);

/// Backs the Wiener increments out of the observations under `p`:
///   dW(k) = (S(k+1) - S(k) - alpha (mu - S(k)) dt) / b(S(k))
/// The result has variance ~dt when the model fits.
std::vector<double> residual_increments(const PriceSeries& series, const SdeParams& p);

struct ModelFit {
  SdeParams params;
  std::vector<double> residuals;  // L - 1 entries
  std::size_t k_fit = 0;          // decay window used for alpha (multiplicative only)
};

/// Moment fit of the additive model: mu from the sample mean, sigma^2 from
/// squared increments, alpha = sigma^2 / (2 V) with V the unbiased sample
/// variance. Throws DegenerateInputError for a constant series.
ModelFit estimate_ou(const PriceSeries& series);

struct DecayOptions {
  std::size_t k_max = 20;
  /// Terms with |S(i) - mu| < guard * sd(S) are dropped from the ratio
  /// average; their denominators amplify noise without bound.
  double guard = 0.04;
};

/// Lag curves indexed by k = 0..k_max (entry 0 is the trivial lag).
struct DecayCurve {
  std::vector<double> ratio;         // mean of (S(i+k) - mu) / (S(i) - mu), ~exp(-alpha k dt)
  std::vector<double> ratio_stderr;  // standard error of that mean
  std::vector<double> autocov;       // (1 / (L - k)) sum (S(i+k) - mu)(S(i) - mu)
  std::vector<double> alpha;         // -log(ratio) / (k dt), NaN where ratio <= 0
  std::vector<std::size_t> terms;    // ratio terms kept at each lag
  std::size_t guarded = 0;           // observations dropped by the guard
};

DecayCurve decay_diagnostics(const PriceSeries& series, double mu_hat,
                             const DecayOptions& options = {});

struct MnOptions {
  DecayOptions decay;
  /// Lags 1..k_fit enter the alpha regression. 0 picks the longest prefix
  /// whose ratios exceed three standard errors, capped at 20 and never
  /// shorter than one lag.
  std::size_t k_fit = 0;
};

/// Fit of the multiplicative model: mu from the sample mean, sigma^2 from
/// squared log increments, alpha by least squares through the origin of
/// -log ratio(k) against k dt. Throws DegenerateInputError when no lag in
/// the window has a positive ratio.
ModelFit estimate_mn(const PriceSeries& series, const MnOptions& options = {});

/// Sample Pearson correlation of residual streams. Throws
/// DegenerateInputError for a zero-variance stream.
CorrelationMatrix correlation_matrix(std::span<const std::vector<double>> streams);

/// Compatibility form: (1 / (L - 1)) sum dW_i dW_j / dt^2, uncentered and
/// without the variance normalization. Not bounded by 1.
std::vector<std::vector<double>> correlation_matrix_literal_normalization(
    std::span<const std::vector<double>> streams, double dt);

/// Equal-width histogram normalized to unit area.
struct Histogram {
  double lo = 0.0;
  double width = 0.0;
  std::vector<double> density;
  std::size_t count = 0;

  double center(std::size_t bin) const { return lo + (static_cast<double>(bin) + 0.5) * width; }
};

/// Bins span [min, max] of the sample. Throws std::invalid_argument for
/// fewer samples than bins and DegenerateInputError for a constant sample.
Histogram make_histogram(std::span<const double> samples, std::size_t bins = 15);

enum class DensityFamily { Normal, Multiplicative };

const char* to_string(DensityFamily family);

/// Least-squares fit of a density to histogram heights at the bin centers.
struct DensityFit {
  DensityFamily family = DensityFamily::Normal;
  double mu = 0.0;
  /// Normal family: sigma / sqrt(2 alpha). Only this ratio is identified.
  double stddev = std::numeric_limits<double>::quiet_NaN();
  /// Multiplicative family: fitted alpha with sigma held at its moment value.
  double alpha = std::numeric_limits<double>::quiet_NaN();
  double sigma = std::numeric_limits<double>::quiet_NaN();
  double sse = 0.0;  // sum of squared bin errors
  Histogram histogram;

  double density(double s) const;
};

DensityFit fit_normal_density(const Histogram& histogram);
DensityFit fit_multiplicative_density(const Histogram& histogram, double mu, double sigma);
/// Builds the histogram, then fits. The multiplicative family takes mu and
/// sigma from the moment estimators.
DensityFit fit_density(const PriceSeries& series, DensityFamily family, std::size_t bins = 15);

struct NormalitySummary {
  double mean = 0.0;
  double variance = 0.0;
  double skewness = 0.0;
  double excess_kurtosis = 0.0;
  double ks_distance = 0.0;  // sup |F_n - Phi| against N(mean, variance)
};

NormalitySummary normality_summary(std::span<const double> samples);

struct EstimateOptions {
  NoiseKind model = NoiseKind::Multiplicative;
  DecayOptions decay;
  std::size_t k_fit = 0;
  std::size_t bins = 15;
};

struct EstimationReport {
  std::string label;
  NoiseKind model = NoiseKind::Multiplicative;
  ModelFit fit;
  DecayCurve decay;
  DensityFit density_fit;
  Histogram residual_histogram;
  NormalitySummary residual_normality;
};

EstimationReport estimate_report(const PriceSeries& series, const EstimateOptions& options = {});

}  // namespace bwm
