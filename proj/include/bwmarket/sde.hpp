#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "bwmarket/series.hpp"

namespace bwm {

/// Mean-reverting price models
///   additive:        dS = alpha (mu - S) dt + sigma dW
///   multiplicative:  dS = alpha (mu - S) dt + sigma S dW
enum class NoiseKind { Additive, Multiplicative };

const char* to_string(NoiseKind kind);

struct SdeParams {
  NoiseKind kind = NoiseKind::Additive;
  double alpha = 1.0;  // mean-reversion rate, 1/time
  double mu = 1.0;     // long-run mean
  double sigma = 1.0;  // volatility

  /// 2 alpha / sigma^2, the shape of the multiplicative stationary law.
  double gamma() const noexcept { return 2.0 * alpha / (sigma * sigma); }

  /// Throws std::invalid_argument unless alpha, mu > 0 and sigma > 0
  /// (sigma >= 0 when allow_zero_sigma is set).
  void validate(bool allow_zero_sigma = false) const;
};

class NonNormalizableError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

double drift(const SdeParams& p, double s);
double diffusion(const SdeParams& p, double s);
double diffusion_slope(const SdeParams& p, double s);

/// Normal density N[mu, sigma / sqrt(2 alpha)].
double ou_stationary_pdf(double s, const SdeParams& p);

/// ((g mu)^g mu / Gamma(g)) exp(-g mu / s) s^-(g + 2) with g = 2 alpha / sigma^2;
/// zero for s <= 0. Evaluated in log space.
double mn_stationary_pdf(double s, const SdeParams& p);

/// Dispatches on p.kind.
double stationary_pdf(double s, const SdeParams& p);
/// Analytic d/ds of stationary_pdf.
double stationary_pdf_derivative(double s, const SdeParams& p);

/// Residual of the stationary Fokker-Planck ODE
///   P'(s) - (2 a(s) - 2 b(s) b'(s)) / b(s)^2 * P(s)
/// evaluated on the closed-form density.
double fokker_planck_residual(double s, const SdeParams& p);

/// Interval outside of which the stationary law has at most `tail_mass`
/// probability on each side.
std::pair<double, double> stationary_support(const SdeParams& p, double tail_mass = 1e-12);

struct DensityCurve {
  std::vector<double> s;
  std::vector<double> density;
};

/// Generic stationary density C exp(int 2a/b^2) / b^2 on an even grid of
/// `points` nodes over [lo, hi]. Integrals use 20-point Gauss-Legendre
/// panels on a refinement of that grid with at least 8000 intervals.
/// Throws NonNormalizableError when the density fails to vanish at the range
/// ends or the exponent diverges, and std::invalid_argument when b <= 0 on
/// the grid.
DensityCurve stationary_pdf_numeric(const std::function<double(double)>& drift_fn,
                                    const std::function<double(double)>& diffusion_fn,
                                    double lo, double hi, std::size_t points = 401);

/// E[S(t + tau) | S(t) = s0] = exp(-alpha tau) (s0 - mu) + mu.
double conditional_mean(const SdeParams& p, double s0, double tau);

struct SimulatedPath {
  PriceSeries series;
  std::size_t redraws = 0;  // multiplicative steps redrawn to stay positive
};

/// Euler-Maruyama path of `steps` values, the first equal to s0. A
/// multiplicative step that would reach S <= 0 is redrawn with a fresh
/// normal rather than clamped.
SimulatedPath simulate_path(const SdeParams& p, std::size_t steps, double dt, double s0,
                            std::uint64_t seed);

/// Symmetric matrix with unit diagonal and entries in [-1, 1].
class CorrelationMatrix {
 public:
  explicit CorrelationMatrix(std::size_t n = 0);
  static CorrelationMatrix from_rows(const std::vector<std::vector<double>>& rows);

  std::size_t size() const noexcept { return n_; }
  double operator()(std::size_t i, std::size_t j) const { return values_.at(i * n_ + j); }
  /// Sets rho_ij = rho_ji. Diagonal entries cannot be changed.
  void set(std::size_t i, std::size_t j, double rho);

  /// Lower-triangular factor (row-major, n*n) with L L^T = rho. Zero pivots
  /// are allowed; throws std::invalid_argument if rho is not PSD.
  std::vector<double> cholesky() const;

 private:
  std::size_t n_;
  std::vector<double> values_;
};

/// Euler-Maruyama paths whose Wiener increments have correlation rho.
std::vector<SimulatedPath> simulate_correlated_paths(std::span<const SdeParams> params,
                                                     const CorrelationMatrix& rho,
                                                     std::size_t steps, double dt,
                                                     std::span<const double> s0,
                                                     std::uint64_t seed);

}  // namespace bwm
