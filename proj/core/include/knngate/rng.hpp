#pragma once

#include <cstdint>
#include <random>

#include "knngate/prob.hpp"

namespace knngate {

/// Stream tags for derive_seed. Every random stream in the project is keyed
/// by (master_seed, index, stream tag); no ambient entropy is used anywhere.
enum class Stream : std::uint64_t {
  Memory = 1,   // memory store draws, index = cell_index << 32 | replicate
  Query = 2,    // sampled query points, index = query number
  Test = 3,     // randomized tests and oracles
};

/// SplitMix64 finalizer (Steele, Lea & Flood).
std::uint64_t splitmix64(std::uint64_t x);

/// Seed derivation: splitmix64(splitmix64(splitmix64(master) ^ index) ^ tag).
/// Distinct (index, tag) pairs give independent, reproducible streams from a
/// single master seed.
std::uint64_t derive_seed(std::uint64_t master_seed, std::uint64_t index,
                          Stream stream);

/// Deterministic random source. The engine is std::mt19937_64 (its output
/// sequence is pinned by the standard); all samplers are implemented
/// explicitly on top of raw 64-bit draws so results do not depend on the
/// standard library's distribution implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  std::uint64_t next_u64() { return eng_(); }

  /// Uniform in [0, 1) with 53-bit resolution.
  double uniform01() {
    return double(eng_() >> 11) * 0x1.0p-53;
  }

  /// Uniform in [lo, hi).
  double uniform(double lo, double hi) {
    return lo + (hi - lo) * uniform01();
  }

  /// Standard normal via Box-Muller (pairs cached).
  double normal();

  /// Uniform integer in [0, bound), bound >= 1. Rejection-based, unbiased.
  std::uint64_t uniform_int(std::uint64_t bound);

  /// Draw a label from a categorical distribution by inverse CDF.
  Label categorical(const ProbVec& p);

 private:
  std::mt19937_64 eng_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace knngate
