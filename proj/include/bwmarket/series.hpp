#pragma once

#include <span>
#include <string>
#include <vector>

namespace bwm {

/// Regularly spaced price observations S(1..L) with spacing dt.
struct PriceSeries {
  std::vector<double> values;
  double dt = 0.01;
  std::string label;

  std::size_t size() const noexcept { return values.size(); }

  /// Throws std::invalid_argument unless L >= min_length, dt > 0 and all
  /// values are finite (and positive when `positive` is set).
  void validate(std::size_t min_length = 2, bool positive = false) const;
};

double mean(std::span<const double> xs);
/// Unbiased (n - 1) sample variance.
double sample_variance(std::span<const double> xs);

}  // namespace bwm
