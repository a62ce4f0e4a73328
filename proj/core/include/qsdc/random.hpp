#pragma once

#include <cstddef>
#include <cstdint>
#include <random>

namespace qsdc {

// splitmix64 finalizer.
constexpr std::uint64_t mix_seed(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// Seed for the index-th independent stream under a base seed. Monte Carlo
// trials use this so results do not depend on how trials are scheduled.
constexpr std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) noexcept {
  return mix_seed(base ^ mix_seed(index ^ 0xD1B54A32D192ED03ULL));
}

// The single source of randomness threaded through every probabilistic
// operation. Equal seeds give equal draw sequences.
class RandomSource {
 public:
  explicit RandomSource(std::uint64_t seed) : seed_(seed), engine_(mix_seed(seed)) {}

  std::uint64_t seed() const noexcept { return seed_; }

  std::uint64_t next_u64() { return engine_(); }

  // Uniform in [0, 1) with 53 bits of resolution.
  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  // One draw regardless of p.
  bool bernoulli(double p) { return uniform01() < p; }

  std::uint8_t coin() { return static_cast<std::uint8_t>(engine_() >> 63); }

  // Unbiased integer in [0, n); n must be positive.
  std::size_t below(std::size_t n);

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

}  // namespace qsdc
