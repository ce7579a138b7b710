#include "bwmarket/sde.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/special_functions/erf.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "bwmarket/rng.hpp"

namespace bwm {

namespace {

using boost::math::quadrature::gauss;

bool positive_finite(double x) { return x > 0.0 && std::isfinite(x); }

double log_mn_pdf(double s, const SdeParams& p) {
  const double g = p.gamma();
  return g * std::log(g * p.mu) + std::log(p.mu) - std::lgamma(g) - g * p.mu / s -
         (g + 2.0) * std::log(s);
}

}  // namespace

const char* to_string(NoiseKind kind) {
  return kind == NoiseKind::Additive ? "additive" : "multiplicative";
}

void SdeParams::validate(bool allow_zero_sigma) const {
  if (!positive_finite(alpha)) throw std::invalid_argument("sde: alpha must be positive");
  if (!positive_finite(mu)) throw std::invalid_argument("sde: mu must be positive");
  const bool sigma_ok = allow_zero_sigma ? (sigma >= 0.0 && std::isfinite(sigma))
                                         : positive_finite(sigma);
  if (!sigma_ok) throw std::invalid_argument("sde: sigma must be positive");
}

double drift(const SdeParams& p, double s) { return p.alpha * (p.mu - s); }

double diffusion(const SdeParams& p, double s) {
  return p.kind == NoiseKind::Additive ? p.sigma : p.sigma * s;
}

double diffusion_slope(const SdeParams& p, double) {
  return p.kind == NoiseKind::Additive ? 0.0 : p.sigma;
}

double ou_stationary_pdf(double s, const SdeParams& p) {
  const double c0 = 1.0 / std::sqrt(std::numbers::pi * p.sigma * p.sigma / p.alpha);
  const double z = (s - p.mu) / (p.sigma / std::sqrt(2.0 * p.alpha));
  return c0 * std::exp(-0.5 * z * z);
}

double mn_stationary_pdf(double s, const SdeParams& p) {
  if (!(s > 0.0)) return 0.0;
  return std::exp(log_mn_pdf(s, p));
}

double stationary_pdf(double s, const SdeParams& p) {
  return p.kind == NoiseKind::Additive ? ou_stationary_pdf(s, p) : mn_stationary_pdf(s, p);
}

double stationary_pdf_derivative(double s, const SdeParams& p) {
  if (p.kind == NoiseKind::Additive) {
    return -2.0 * p.alpha * (s - p.mu) / (p.sigma * p.sigma) * ou_stationary_pdf(s, p);
  }
  if (!(s > 0.0)) return 0.0;
  const double g = p.gamma();
  return (g * p.mu / (s * s) - (g + 2.0) / s) * mn_stationary_pdf(s, p);
}

double fokker_planck_residual(double s, const SdeParams& p) {
  const double b = diffusion(p, s);
  const double coeff = (2.0 * drift(p, s) - 2.0 * b * diffusion_slope(p, s)) / (b * b);
  return stationary_pdf_derivative(s, p) - coeff * stationary_pdf(s, p);
}

std::pair<double, double> stationary_support(const SdeParams& p, double tail_mass) {
  p.validate();
  if (!(tail_mass > 0.0 && tail_mass < 0.5)) {
    throw std::invalid_argument("stationary_support: tail mass must lie in (0, 0.5)");
  }
  if (p.kind == NoiseKind::Additive) {
    const double sd = p.sigma / std::sqrt(2.0 * p.alpha);
    const double z = std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * tail_mass);
    return {p.mu - z * sd, p.mu + z * sd};
  }
  // 1/S is Gamma(shape g + 1, rate g mu).
  const double shape = p.gamma() + 1.0;
  const double rate = p.gamma() * p.mu;
  const double lo = rate / boost::math::gamma_q_inv(shape, tail_mass);
  const double hi = rate / boost::math::gamma_p_inv(shape, tail_mass);
  return {lo, hi};
}

DensityCurve stationary_pdf_numeric(const std::function<double(double)>& drift_fn,
                                    const std::function<double(double)>& diffusion_fn,
                                    double lo, double hi, std::size_t points) {
  if (!(lo < hi) || !std::isfinite(lo) || !std::isfinite(hi)) {
    throw std::invalid_argument("stationary_pdf_numeric: need a finite range lo < hi");
  }
  if (points < 3) throw std::invalid_argument("stationary_pdf_numeric: need at least 3 points");

  DensityCurve curve;
  curve.s.resize(points);
  const double h = (hi - lo) / static_cast<double>(points - 1);
  for (std::size_t k = 0; k < points; ++k) curve.s[k] = lo + h * static_cast<double>(k);
  curve.s.back() = hi;

  // Integration runs on a refinement of the output grid so narrow peaks
  // between output nodes are still resolved.
  const std::size_t refine = std::max<std::size_t>(1, (8000 + points - 2) / (points - 1));
  const std::size_t nodes = (points - 1) * refine + 1;
  const double step = h / static_cast<double>(refine);
  const auto node = [&](std::size_t i) {
    return i + 1 == nodes ? hi : lo + step * static_cast<double>(i);
  };

  const auto exponent_rate = [&](double u) {
    const double b = diffusion_fn(u);
    return 2.0 * drift_fn(u) / (b * b);
  };
  const auto segment = [&](double a, double b) {
    return gauss<double, 20>::integrate(exponent_rate, a, b);
  };

  // log of the unnormalized density at the nodes, referenced to lo.
  std::vector<double> cumulative(nodes, 0.0);
  std::vector<double> log_density(nodes);
  for (std::size_t i = 0; i < nodes; ++i) {
    const double b = diffusion_fn(node(i));
    if (!(b > 0.0) || !std::isfinite(b)) {
      throw std::invalid_argument("stationary_pdf_numeric: diffusion must be positive on the range");
    }
    if (i > 0) cumulative[i] = cumulative[i - 1] + segment(node(i - 1), node(i));
    log_density[i] = cumulative[i] - 2.0 * std::log(b);
    if (!std::isfinite(log_density[i])) {
      throw NonNormalizableError("stationary density: exponent diverges on the range");
    }
  }
  const double peak = *std::max_element(log_density.begin(), log_density.end());

  double total = 0.0;
  for (std::size_t i = 0; i + 1 < nodes; ++i) {
    const double base = node(i);
    const double offset = cumulative[i];
    const auto integrand = [&](double s) {
      const double b = diffusion_fn(s);
      const double inner = s > base ? segment(base, s) : 0.0;
      return std::exp(offset + inner - 2.0 * std::log(b) - peak);
    };
    total += gauss<double, 20>::integrate(integrand, base, node(i + 1));
  }
  if (!(total > 0.0) || !std::isfinite(total)) {
    throw NonNormalizableError("stationary density: normalization integral is not finite");
  }

  curve.density.resize(points);
  for (std::size_t k = 0; k < points; ++k) {
    curve.density[k] = std::exp(log_density[k * refine] - peak) / total;
  }
  const double top = 1.0 / total;
  if (curve.density.front() > 1e-6 * top || curve.density.back() > 1e-6 * top) {
    throw NonNormalizableError(
        "stationary density: mass does not vanish at the range ends; the process has no "
        "stationary distribution there");
  }
  return curve;
}

double conditional_mean(const SdeParams& p, double s0, double tau) {
  if (!(tau >= 0.0)) throw std::invalid_argument("conditional_mean: tau must be >= 0");
  return std::exp(-p.alpha * tau) * (s0 - p.mu) + p.mu;
}

SimulatedPath simulate_path(const SdeParams& p, std::size_t steps, double dt, double s0,
                            std::uint64_t seed) {
  const CorrelationMatrix identity(1);
  auto paths = simulate_correlated_paths(std::span(&p, 1), identity, steps, dt,
                                         std::span(&s0, 1), seed);
  return std::move(paths.front());
}

CorrelationMatrix::CorrelationMatrix(std::size_t n) : n_(n), values_(n * n, 0.0) {
  for (std::size_t i = 0; i < n; ++i) values_[i * n + i] = 1.0;
}

CorrelationMatrix CorrelationMatrix::from_rows(const std::vector<std::vector<double>>& rows) {
  CorrelationMatrix m(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != rows.size()) throw std::invalid_argument("correlation: matrix not square");
    if (rows[i][i] != 1.0) throw std::invalid_argument("correlation: diagonal must be 1");
    for (std::size_t j = 0; j < i; ++j) {
      if (rows[i][j] != rows[j][i]) throw std::invalid_argument("correlation: matrix not symmetric");
      m.set(i, j, rows[i][j]);
    }
  }
  return m;
}

void CorrelationMatrix::set(std::size_t i, std::size_t j, double rho) {
  if (i >= n_ || j >= n_) throw std::out_of_range("correlation: index out of range");
  if (i == j) throw std::invalid_argument("correlation: diagonal entries are fixed at 1");
  if (!(std::abs(rho) <= 1.0)) throw std::invalid_argument("correlation: |rho| must be <= 1");
  values_[i * n_ + j] = rho;
  values_[j * n_ + i] = rho;
}

std::vector<double> CorrelationMatrix::cholesky() const {
  constexpr double kTol = 1e-10;
  std::vector<double> lower(n_ * n_, 0.0);
  for (std::size_t j = 0; j < n_; ++j) {
    double d = (*this)(j, j);
    for (std::size_t k = 0; k < j; ++k) d -= lower[j * n_ + k] * lower[j * n_ + k];
    if (d < -kTol) throw std::invalid_argument("correlation: matrix is not positive semi-definite");
    const double pivot = d > kTol ? std::sqrt(d) : 0.0;
    lower[j * n_ + j] = pivot;
    for (std::size_t i = j + 1; i < n_; ++i) {
      double v = (*this)(i, j);
      for (std::size_t k = 0; k < j; ++k) v -= lower[i * n_ + k] * lower[j * n_ + k];
      if (pivot == 0.0) {
        if (std::abs(v) > 1e-8) {
          throw std::invalid_argument("correlation: matrix is not positive semi-definite");
        }
        lower[i * n_ + j] = 0.0;
      } else {
        lower[i * n_ + j] = v / pivot;
      }
    }
  }
  return lower;
}

std::vector<SimulatedPath> simulate_correlated_paths(std::span<const SdeParams> params,
                                                     const CorrelationMatrix& rho,
                                                     std::size_t steps, double dt,
                                                     std::span<const double> s0,
                                                     std::uint64_t seed) {
  const std::size_t n = params.size();
  if (rho.size() != n || s0.size() != n) {
    throw std::invalid_argument("simulate: params, rho and s0 sizes differ");
  }
  if (!positive_finite(dt)) throw std::invalid_argument("simulate: dt must be positive");
  for (std::size_t i = 0; i < n; ++i) {
    params[i].validate(/*allow_zero_sigma=*/true);
    if (!std::isfinite(s0[i])) throw std::invalid_argument("simulate: non-finite start value");
    if (params[i].kind == NoiseKind::Multiplicative && !(s0[i] > 0.0)) {
      throw std::invalid_argument("simulate: multiplicative paths need s0 > 0");
    }
  }
  const std::vector<double> factor = rho.cholesky();

  std::vector<SimulatedPath> paths(n);
  for (std::size_t i = 0; i < n; ++i) {
    paths[i].series.dt = dt;
    paths[i].series.values.reserve(steps);
    if (steps > 0) paths[i].series.values.push_back(s0[i]);
  }

  Rng rng(seed);
  const double sqrt_dt = std::sqrt(dt);
  std::vector<double> z(n), w(n), next(n);
  for (std::size_t k = 1; k < steps; ++k) {
    for (int attempt = 0;; ++attempt) {
      if (attempt == 10000) throw std::runtime_error("simulate: cannot keep path positive");
      for (auto& zi : z) zi = rng.normal();
      bool positive = true;
      for (std::size_t i = 0; i < n; ++i) {
        w[i] = 0.0;
        for (std::size_t j = 0; j <= i; ++j) w[i] += factor[i * n + j] * z[j];
        const SdeParams& p = params[i];
        const double s = paths[i].series.values.back();
        next[i] = s + drift(p, s) * dt + diffusion(p, s) * sqrt_dt * w[i];
        if (p.kind == NoiseKind::Multiplicative && !(next[i] > 0.0)) {
          positive = false;
          ++paths[i].redraws;
        }
      }
      if (positive) break;
    }
    for (std::size_t i = 0; i < n; ++i) paths[i].series.values.push_back(next[i]);
  }
  return paths;
}

}  // namespace bwm
