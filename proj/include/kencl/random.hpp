#pragma once

#include <complex>
#include <cstdint>
#include <optional>
#include <random>

namespace kencl {

/// splitmix64 finalizer; used to derive independent per-trial seeds.
std::uint64_t splitmix64(std::uint64_t x);

/// Seed for trial `index` of a run started with `base`.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index);

/// Portable generator: the engine is fully specified by the standard, and the
/// distributions below are implemented here so outputs match across platforms.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }
  /// Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Uniform integer in [lo, hi].
  int integer(int lo, int hi);
  double normal();
  std::complex<double> complex_normal();

 private:
  std::mt19937_64 engine_;
  std::optional<double> spare_;
};

}  // namespace kencl
