#include "bwmarket/series.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace bwm {

void PriceSeries::validate(std::size_t min_length, bool positive) const {
  const std::string name = label.empty() ? "series" : "series '" + label + "'";
  if (values.size() < min_length) {
    throw std::invalid_argument(name + ": need at least " + std::to_string(min_length) +
                                " observations, got " + std::to_string(values.size()));
  }
  if (!(dt > 0.0) || !std::isfinite(dt)) throw std::invalid_argument(name + ": dt must be positive");
  for (double v : values) {
    if (!std::isfinite(v)) throw std::invalid_argument(name + ": non-finite observation");
    if (positive && !(v > 0.0)) throw std::invalid_argument(name + ": non-positive observation");
  }
}

double mean(std::span<const double> xs) {
  if (xs.empty()) throw std::invalid_argument("mean: empty sample");
  double sum = 0.0;
  for (double x : xs) sum += x;
  return sum / static_cast<double>(xs.size());
}

double sample_variance(std::span<const double> xs) {
  if (xs.size() < 2) throw std::invalid_argument("sample_variance: need two observations");
  const double m = mean(xs);
  double ss = 0.0;
  for (double x : xs) ss += (x - m) * (x - m);
  return ss / static_cast<double>(xs.size() - 1);
}

}  // namespace bwm
