#pragma once

#include <cstdint>
#include <random>

namespace glyphforge {

/// Seeded generator with a platform-independent output sequence.
///
/// The engine is std::mt19937_64, whose raw output is fully specified by the
/// standard. Conversions to floats and bounded integers are implemented here
/// because the std distributions are implementation-defined.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : seed_(seed), engine_(seed) {}

  /// Independent stream for (seed, index); used for per-image and per-step RNGs.
  static Rng split(std::uint64_t seed, std::uint64_t index) { return Rng(mix(seed, index)); }
  static Rng split(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
    return Rng(mix(mix(seed, a), b));
  }

  std::uint64_t seed() const { return seed_; }
  std::uint64_t next_u64() { return engine_(); }

  /// Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [lo, hi] (inclusive), unbiased by rejection.
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi);

  bool bernoulli(double p) { return uniform() < p; }

  /// Standard normal via Box-Muller (one value per call, no caching).
  double normal();
  double normal(double mean, double stddev) { return mean + stddev * normal(); }

  static std::uint64_t mix(std::uint64_t seed, std::uint64_t index);

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

}  // namespace glyphforge
