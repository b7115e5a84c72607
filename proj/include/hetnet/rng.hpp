#pragma once
// Portable random source for scenario generation.
//
// Engine: std::mt19937_64, whose output sequence is fixed by the C++ standard.
// The std:: distributions are implementation-defined, so the variates are
// derived here explicitly:
//   uniform01: top 53 bits of one engine draw, scaled by 2^-53, in [0, 1).
//   normal:    Marsaglia polar method on uniform01 pairs; the second variate
//              of each accepted pair is cached and returned on the next call.
// Identical seeds therefore give identical scenarios on every platform with
// IEEE-754 doubles and a correctly rounded sqrt/log.

#include <cstdint>
#include <optional>
#include <random>

namespace hetnet {

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double uniform01();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }
  double normal(double mean = 0.0, double stddev = 1.0);
  std::uint64_t below(std::uint64_t n);

 private:
  std::mt19937_64 engine_;
  std::optional<double> spare_;
};

}  // namespace hetnet
