#pragma once

#include <cstdint>
#include <random>

namespace pmhdg {

// Thin wrapper around mt19937_64 with an explicit uint64 -> double mapping.
// std::uniform_real_distribution is implementation defined, which would break
// bit-reproducibility of seeded runs across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform double in [0, 1).
  double uniform() { return (engine_() >> 11) * 0x1.0p-53; }

  /// Uniform double in [a, b).
  double uniform(double a, double b) { return a + (b - a) * uniform(); }

  std::uint64_t next_u64() { return engine_(); }

 private:
  std::mt19937_64 engine_;
};

}  // namespace pmhdg
