#pragma once

#include <cstdint>
#include <random>

namespace bcm {

/// Seedable 64-bit generator with independent streams.
///
/// The engine is std::mt19937_64. A (seed, stream) pair is expanded through
/// std::seed_seq into the full engine state, so stream k of seed s is an
/// independent sequence for every k; parallel sweeps give task k stream k.
/// The variate transforms below are written out rather than taken from
/// <random> distributions, whose output is implementation-defined, so a seed
/// reproduces bit-identical sequences on every standard library.
class Rng {
 public:
  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0);

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform01();

  /// Uniform integer in [0, n); n must be positive. Lemire's multiply-shift
  /// with rejection, so the result is unbiased.
  std::uint64_t below(std::uint64_t n);

  /// Exponential variate with the given rate (mean 1/rate).
  double exponential(double rate);

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream() const { return stream_; }

  friend bool operator==(const Rng& a, const Rng& b) {
    return a.seed_ == b.seed_ && a.stream_ == b.stream_ && a.engine_ == b.engine_;
  }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::mt19937_64 engine_;
};

}  // namespace bcm
