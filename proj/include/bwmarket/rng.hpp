#pragma once

#include <cstddef>
#include <cstdint>
#include <random>

namespace bwm {

/// Seedable random stream used for every stochastic draw in the library.
///
/// The engine is std::mt19937_64, whose output sequence is fixed by the
/// standard. The standard distributions are not (their algorithms are
/// implementation-defined), so the variates are derived here by hand:
///
///   uniform01()     (k + 0.5) / 2^53 from the top 53 bits, always in (0, 1)
///   uniform_index() modulo with rejection of the biased low words
///   normal()        Marsaglia polar method, second variate cached
///
/// Two Rng objects built from the same seed produce identical streams on any
/// conforming platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  double uniform01();

  /// Uniform integer in [0, n). n must be positive.
  std::size_t uniform_index(std::size_t n);

  /// Uniform integer in [lo, hi], inclusive.
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi);

  double normal();

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace bwm
