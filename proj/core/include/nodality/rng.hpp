#pragma once

#include <cstdint>
#include <random>

namespace nodality {

/// Deterministic random source. The engine is std::mt19937_64 but every
/// distribution is implemented here, because the standard library's
/// distribution algorithms are unspecified and differ across toolchains.
/// Identical seeds therefore produce identical streams everywhere, which the
/// reproducibility guarantees of the pipeline rely on.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed), seed_(seed) {}

  std::uint64_t seed() const { return seed_; }

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform in [0, 1) with 53 random bits.
  double next_double() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Uniform integer in [0, n). Rejection-free modulo is fine here; n is
  /// always tiny relative to 2^64 so the bias is far below measurement noise,
  /// but we reject anyway to keep the stream well-defined.
  std::uint64_t uniform_index(std::uint64_t n);

  double uniform_real(double lo, double hi) { return lo + (hi - lo) * next_double(); }

  bool bernoulli(double p) { return next_double() < p; }

  /// Standard normal via Box-Muller (the spare variate is cached).
  double normal();
  double normal(double mean, double stdev) { return mean + stdev * normal(); }

  double lognormal(double log_mean, double log_sigma) {
    return std::exp(normal(log_mean, log_sigma));
  }

  /// Poisson by inversion of the product of uniforms; large means are split
  /// in half recursively so the product never underflows.
  std::uint64_t poisson(double mean);

  /// Independent child stream: the parent seed and the stream id are mixed
  /// through SplitMix64 so sibling streams never overlap in practice.
  Rng fork(std::uint64_t stream) const;

 private:
  std::mt19937_64 engine_;
  std::uint64_t seed_ = 0;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

/// SplitMix64 finalizer, used for seed derivation and hashing small keys.
std::uint64_t mix64(std::uint64_t x);

}  // namespace nodality
