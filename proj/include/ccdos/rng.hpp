#pragma once

#include <cstdint>

namespace ccdos {

// Counter-based generator: the i-th output of a stream is the SplitMix64
// finalizer applied to key + (i + 1) * golden-gamma. Streams are keyed by
// hashing (seed, purpose, index), so independent streams can be drawn in any
// order or in parallel with identical results. Non-uniform variates are built
// here rather than with <random> distributions, whose algorithms differ
// between standard libraries.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t key) : key_(key) {}

  static CounterRng stream(std::uint64_t seed, std::uint64_t purpose, std::uint64_t index = 0);

  std::uint64_t next();
  // Uniform on (0, 1).
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  // Uniform integer in [0, bound).
  std::uint64_t below(std::uint64_t bound);
  double normal();
  std::uint64_t poisson(double mean);
  bool bernoulli(double p) { return uniform() < p; }

  std::uint64_t counter() const { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  double spare_normal_ = 0.0;
  bool has_spare_ = false;
};

std::uint64_t mix64(std::uint64_t x);

// Seed for a sub-task, derived from a parent seed and up to two indices.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0);

}  // namespace ccdos
