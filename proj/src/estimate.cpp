#include "bwmarket/estimate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>

#include <boost/math/tools/minima.hpp>

namespace bwm {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double normal_pdf(double x, double mean, double sd) {
  const double z = (x - mean) / sd;
  return std::exp(-0.5 * z * z) / (sd * std::sqrt(2.0 * std::numbers::pi));
}

double normal_cdf(double x, double mean, double sd) {
  return 0.5 * std::erfc(-(x - mean) / (sd * std::numbers::sqrt2));
}

double histogram_sse(const Histogram& h, auto&& density) {
  double sse = 0.0;
  for (std::size_t b = 0; b < h.density.size(); ++b) {
    const double e = h.density[b] - density(h.center(b));
    sse += e * e;
  }
  return sse;
}

template <class F>
double minimize(F&& f, double lo, double hi) {
  constexpr int kBits = 40;
  std::uintmax_t iterations = 200;
  return boost::math::tools::brent_find_minima(f, lo, hi, kBits, iterations).first;
}

}  // namespace

double increment_variance_rate(const PriceSeries& series) {
  series.validate(2);
  double ss = 0.0;
  for (std::size_t i = 0; i + 1 < series.size(); ++i) {
    const double d = series.values[i + 1] - series.values[i];
    ss += d * d;
  }
  return ss / (static_cast<double>(series.size() - 1) * series.dt);
}

double log_increment_variance_rate(const PriceSeries& series) {
  series.validate(2, /*positive=*/true);
  double ss = 0.0;
  for (std::size_t i = 0; i + 1 < series.size(); ++i) {
    const double d = std::log(series.values[i + 1] / series.values[i]);
    ss += d * d;
  }
  return ss / (static_cast<double>(series.size() - 1) * series.dt);
}

std::vector<double> residual_increments(const PriceSeries& series, const SdeParams& p) {
  std::vector<double> out;
  out.reserve(series.size() > 0 ? series.size() - 1 : 0);
  for (std::size_t k = 0; k + 1 < series.size(); ++k) {
    const double s = series.values[k];
    out.push_back((series.values[k + 1] - s - drift(p, s) * series.dt) / diffusion(p, s));
  }
  return out;
}

ModelFit estimate_ou(const PriceSeries& series) {
  series.validate(3);
  ModelFit fit;
  fit.params.kind = NoiseKind::Additive;
  fit.params.mu = mean(series.values);
  const double sigma2 = increment_variance_rate(series);
  const double variance = sample_variance(series.values);
  if (!(variance > 0.0) || !(sigma2 > 0.0)) {
    throw DegenerateInputError("estimate_ou: constant series, alpha is undefined");
  }
  fit.params.sigma = std::sqrt(sigma2);
  fit.params.alpha = sigma2 / (2.0 * variance);
  fit.residuals = residual_increments(series, fit.params);
  return fit;
}

DecayCurve decay_diagnostics(const PriceSeries& series, double mu_hat,
                             const DecayOptions& options) {
  series.validate(2);
  const std::size_t n = series.size();
  if (options.k_max >= n) throw std::invalid_argument("decay_diagnostics: k_max must be < L");
  const auto& s = series.values;

  const double sd = std::sqrt(sample_variance(s));
  const double floor = options.guard * sd;
  std::vector<bool> usable(n);
  DecayCurve curve;
  for (std::size_t i = 0; i < n; ++i) {
    usable[i] = std::abs(s[i] - mu_hat) >= floor && s[i] != mu_hat;
    if (!usable[i]) ++curve.guarded;
  }

  const std::size_t lags = options.k_max + 1;
  curve.ratio.assign(lags, kNaN);
  curve.ratio_stderr.assign(lags, kNaN);
  curve.autocov.assign(lags, 0.0);
  curve.alpha.assign(lags, kNaN);
  curve.terms.assign(lags, 0);

  for (std::size_t k = 0; k < lags; ++k) {
    double cov = 0.0;
    for (std::size_t i = 0; i + k < n; ++i) cov += (s[i + k] - mu_hat) * (s[i] - mu_hat);
    curve.autocov[k] = cov / static_cast<double>(n - k);

    double sum = 0.0, sum_sq = 0.0;
    std::size_t count = 0;
    for (std::size_t i = 0; i + k < n; ++i) {
      if (!usable[i]) continue;
      const double r = (s[i + k] - mu_hat) / (s[i] - mu_hat);
      sum += r;
      sum_sq += r * r;
      ++count;
    }
    curve.terms[k] = count;
    if (count == 0) continue;
    const double m = sum / static_cast<double>(count);
    curve.ratio[k] = m;
    if (count > 1) {
      const double var = std::max(0.0, (sum_sq - count * m * m) / static_cast<double>(count - 1));
      curve.ratio_stderr[k] = std::sqrt(var / static_cast<double>(count));
    }
    if (k > 0 && m > 0.0) curve.alpha[k] = -std::log(m) / (static_cast<double>(k) * series.dt);
  }
  return curve;
}

ModelFit estimate_mn(const PriceSeries& series, const MnOptions& options) {
  series.validate(3, /*positive=*/true);
  ModelFit fit;
  fit.params.kind = NoiseKind::Multiplicative;
  fit.params.mu = mean(series.values);
  const double sigma2 = log_increment_variance_rate(series);
  fit.params.sigma = std::sqrt(sigma2);

  DecayOptions decay = options.decay;
  decay.k_max = std::min(std::max(decay.k_max, options.k_fit), series.size() - 1);
  const DecayCurve curve = decay_diagnostics(series, fit.params.mu, decay);

  std::size_t k_fit = options.k_fit;
  if (k_fit == 0) {
    const std::size_t cap = std::min<std::size_t>(20, decay.k_max);
    while (k_fit < cap) {
      const std::size_t k = k_fit + 1;
      const double r = curve.ratio[k];
      const double se = curve.ratio_stderr[k];
      if (!(r > 0.0) || !(r > 3.0 * se)) break;
      k_fit = k;
    }
    k_fit = std::max<std::size_t>(k_fit, 1);
  }

  double num = 0.0, den = 0.0;
  for (std::size_t k = 1; k <= k_fit; ++k) {
    if (!(curve.ratio[k] > 0.0)) continue;
    const double tau = static_cast<double>(k) * series.dt;
    num += tau * -std::log(curve.ratio[k]);
    den += tau * tau;
  }
  if (!(sigma2 > 0.0) || den == 0.0) {
    throw DegenerateInputError(
        "estimate_mn: decay curve has no positive window, alpha is unidentifiable");
  }
  fit.params.alpha = num / den;
  if (!(fit.params.alpha > 0.0)) {
    throw DegenerateInputError("estimate_mn: decay curve does not decay, alpha is unidentifiable");
  }
  fit.k_fit = k_fit;
  fit.residuals = residual_increments(series, fit.params);
  return fit;
}

CorrelationMatrix correlation_matrix(std::span<const std::vector<double>> streams) {
  const std::size_t n = streams.size();
  if (n == 0) return CorrelationMatrix(0);
  const std::size_t len = streams.front().size();
  if (len < 2) throw std::invalid_argument("correlation_matrix: streams need >= 2 entries");
  std::vector<std::vector<double>> centered(n);
  std::vector<double> norms(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (streams[i].size() != len) throw std::invalid_argument("correlation_matrix: unequal lengths");
    const double m = mean(streams[i]);
    centered[i].reserve(len);
    double ss = 0.0;
    for (double x : streams[i]) {
      centered[i].push_back(x - m);
      ss += (x - m) * (x - m);
    }
    if (!(ss > 0.0)) {
      throw DegenerateInputError("correlation_matrix: stream " + std::to_string(i) +
                                 " has zero variance");
    }
    norms[i] = std::sqrt(ss);
  }
  CorrelationMatrix rho(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      double cross = 0.0;
      for (std::size_t k = 0; k < len; ++k) cross += centered[i][k] * centered[j][k];
      rho.set(i, j, std::clamp(cross / (norms[i] * norms[j]), -1.0, 1.0));
    }
  }
  return rho;
}

std::vector<std::vector<double>> correlation_matrix_literal_normalization(
    std::span<const std::vector<double>> streams, double dt) {
  const std::size_t n = streams.size();
  std::vector<std::vector<double>> out(n, std::vector<double>(n, 0.0));
  if (n == 0) return out;
  const std::size_t len = streams.front().size();
  if (len < 2) throw std::invalid_argument("correlation_matrix: streams need >= 2 entries");
  for (std::size_t i = 0; i < n; ++i) {
    if (streams[i].size() != len) throw std::invalid_argument("correlation_matrix: unequal lengths");
    for (std::size_t j = 0; j <= i; ++j) {
      double cross = 0.0;
      for (std::size_t k = 0; k < len; ++k) cross += streams[i][k] * streams[j][k];
      out[i][j] = out[j][i] = cross / static_cast<double>(len - 1) / (dt * dt);
    }
  }
  return out;
}

Histogram make_histogram(std::span<const double> samples, std::size_t bins) {
  if (bins < 2) throw std::invalid_argument("histogram: need at least 2 bins");
  if (samples.size() < bins) {
    throw std::invalid_argument("histogram: fewer observations (" + std::to_string(samples.size()) +
                                ") than bins (" + std::to_string(bins) + ")");
  }
  const auto [lo_it, hi_it] = std::minmax_element(samples.begin(), samples.end());
  const double lo = *lo_it, hi = *hi_it;
  if (!(hi > lo)) throw DegenerateInputError("histogram: all observations are equal");

  Histogram h;
  h.lo = lo;
  h.width = (hi - lo) / static_cast<double>(bins);
  h.count = samples.size();
  std::vector<std::size_t> counts(bins, 0);
  for (double x : samples) {
    auto b = static_cast<std::size_t>((x - lo) / h.width);
    ++counts[std::min(b, bins - 1)];
  }
  h.density.resize(bins);
  for (std::size_t b = 0; b < bins; ++b) {
    h.density[b] = static_cast<double>(counts[b]) / (static_cast<double>(h.count) * h.width);
  }
  return h;
}

const char* to_string(DensityFamily family) {
  return family == DensityFamily::Normal ? "normal" : "multiplicative";
}

double DensityFit::density(double s) const {
  if (family == DensityFamily::Normal) return normal_pdf(s, mu, stddev);
  return mn_stationary_pdf(s, SdeParams{NoiseKind::Multiplicative, alpha, mu, sigma});
}

DensityFit fit_normal_density(const Histogram& histogram) {
  if (histogram.density.size() < 2) throw std::invalid_argument("fit: histogram too small");
  const double lo = histogram.lo;
  const double hi = histogram.lo + histogram.width * static_cast<double>(histogram.density.size());
  const double span = hi - lo;

  // Profile out the scale for each candidate mean.
  const auto best_log_sd = [&](double mu) {
    return minimize(
        [&](double log_sd) {
          const double sd = std::exp(log_sd);
          return histogram_sse(histogram, [&](double x) { return normal_pdf(x, mu, sd); });
        },
        std::log(histogram.width / 20.0), std::log(4.0 * span));
  };
  const auto profile = [&](double mu) {
    const double sd = std::exp(best_log_sd(mu));
    return histogram_sse(histogram, [&](double x) { return normal_pdf(x, mu, sd); });
  };

  DensityFit fit;
  fit.family = DensityFamily::Normal;
  fit.histogram = histogram;
  fit.mu = minimize(profile, lo, hi);
  fit.stddev = std::exp(best_log_sd(fit.mu));
  fit.sse = histogram_sse(histogram, [&](double x) { return normal_pdf(x, fit.mu, fit.stddev); });
  return fit;
}

DensityFit fit_multiplicative_density(const Histogram& histogram, double mu, double sigma) {
  if (histogram.density.size() < 2) throw std::invalid_argument("fit: histogram too small");
  if (!(mu > 0.0) || !(sigma > 0.0)) {
    throw std::invalid_argument("fit: multiplicative family needs mu > 0 and sigma > 0");
  }
  DensityFit fit;
  fit.family = DensityFamily::Multiplicative;
  fit.histogram = histogram;
  fit.mu = mu;
  fit.sigma = sigma;
  const auto sse_at = [&](double log_gamma) {
    const double alpha = std::exp(log_gamma) * sigma * sigma / 2.0;
    const SdeParams p{NoiseKind::Multiplicative, alpha, mu, sigma};
    return histogram_sse(histogram, [&](double x) { return mn_stationary_pdf(x, p); });
  };
  // The error surface flattens for very peaked densities, so bracket the
  // minimum on a coarse grid before refining.
  constexpr int kGrid = 90;
  const double lo = std::log(1e-2), hi = std::log(1e7);
  const double cell = (hi - lo) / kGrid;
  int best = 0;
  double best_sse = sse_at(lo);
  for (int i = 1; i <= kGrid; ++i) {
    const double v = sse_at(lo + cell * i);
    if (v < best_sse) {
      best_sse = v;
      best = i;
    }
  }
  const double log_gamma =
      minimize(sse_at, lo + cell * std::max(best - 1, 0), lo + cell * std::min(best + 1, kGrid));
  fit.alpha = std::exp(log_gamma) * sigma * sigma / 2.0;
  fit.sse = sse_at(log_gamma);
  return fit;
}

DensityFit fit_density(const PriceSeries& series, DensityFamily family, std::size_t bins) {
  const Histogram h = make_histogram(series.values, bins);
  if (family == DensityFamily::Normal) return fit_normal_density(h);
  const double sigma2 = log_increment_variance_rate(series);
  if (!(sigma2 > 0.0)) throw DegenerateInputError("fit: series has no log increments");
  return fit_multiplicative_density(h, mean(series.values), std::sqrt(sigma2));
}

NormalitySummary normality_summary(std::span<const double> samples) {
  if (samples.size() < 3) throw std::invalid_argument("normality: need at least 3 samples");
  NormalitySummary out;
  const double n = static_cast<double>(samples.size());
  out.mean = mean(samples);
  double m2 = 0.0, m3 = 0.0, m4 = 0.0;
  for (double x : samples) {
    const double d = x - out.mean;
    m2 += d * d;
    m3 += d * d * d;
    m4 += d * d * d * d;
  }
  m2 /= n;
  m3 /= n;
  m4 /= n;
  if (!(m2 > 0.0)) throw DegenerateInputError("normality: sample has zero variance");
  out.variance = m2 * n / (n - 1.0);
  out.skewness = m3 / std::pow(m2, 1.5);
  out.excess_kurtosis = m4 / (m2 * m2) - 3.0;

  std::vector<double> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());
  const double sd = std::sqrt(out.variance);
  double d = 0.0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const double f = normal_cdf(sorted[i], out.mean, sd);
    d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
  }
  out.ks_distance = d;
  return out;
}

EstimationReport estimate_report(const PriceSeries& series, const EstimateOptions& options) {
  EstimationReport report;
  report.label = series.label;
  report.model = options.model;
  if (options.model == NoiseKind::Additive) {
    report.fit = estimate_ou(series);
  } else {
    report.fit = estimate_mn(series, MnOptions{options.decay, options.k_fit});
  }
  DecayOptions decay = options.decay;
  decay.k_max = std::min(decay.k_max, series.size() - 1);
  report.decay = decay_diagnostics(series, report.fit.params.mu, decay);
  if (options.model == NoiseKind::Additive) {
    report.density_fit = fit_normal_density(make_histogram(series.values, options.bins));
  } else {
    report.density_fit = fit_multiplicative_density(make_histogram(series.values, options.bins),
                                                    report.fit.params.mu, report.fit.params.sigma);
  }
  report.residual_histogram = make_histogram(report.fit.residuals, options.bins);
  report.residual_normality = normality_summary(report.fit.residuals);
  return report;
}

}  // namespace bwm
