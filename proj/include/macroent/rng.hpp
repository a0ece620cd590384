#pragma once

#include <cstdint>
#include <random>

namespace macroent {

/// SplitMix64 finalizer. Used to derive statistically independent child seeds
/// from a master seed and a counter.
std::uint64_t mix_seed(std::uint64_t x);

/// Seed for stream `index` under `master`. Order-independent: the seed of run
/// i does not depend on how many other runs exist or which thread runs it.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index);

/// Per-trajectory random stream.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(mix_seed(seed)) {}

  double normal() { return normal_(engine_); }
  double normal(double mean, double stddev) { return mean + stddev * normal_(engine_); }

  /// Child stream for sub-task `index` (e.g. pulse I vs pulse II).
  Rng split(std::uint64_t index) { return Rng(derive_seed(engine_(), index)); }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace macroent
