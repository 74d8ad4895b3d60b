#pragma once

#include <cstdint>

#include "ksalsa/tensor.hpp"

namespace ksalsa {

// Counter-based generator: the i-th output is mix(key + i * kGamma), where
// mix is the SplitMix64 finalizer. Only integer arithmetic is involved, so a
// seed yields the same 64-bit stream on every platform and language.
//
//   kGamma = 0x9E3779B97F4A7C15
//   mix(z): z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
//           z = (z ^ (z >> 27)) * 0x94D049BB133111EB
//           z =  z ^ (z >> 31)
//
// Uniforms take the top 53 bits. Normals use Box-Muller (cosine branch only),
// consuming two uniforms per draw.
class Rng {
 public:
  static constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ULL;

  explicit Rng(std::uint64_t seed) : seed_(seed), key_(mix(seed)) {}

  std::uint64_t seed() const { return seed_; }
  std::uint64_t counter() const { return counter_; }

  std::uint64_t next_u64();
  // Uniform in [0, 1).
  double uniform();
  // Uniform integer in [0, n); n > 0.
  std::uint64_t below(std::uint64_t n);
  double normal(double mean = 0.0, double stddev = 1.0);

  // Independent child stream; does not advance this generator.
  Rng split(std::uint64_t stream) const;

  static std::uint64_t mix(std::uint64_t z);

 private:
  std::uint64_t seed_;
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

// i.i.d. normal tensor. Throws ArgumentError on negative stddev.
Tensor seeded_normal(Rng& rng, Tensor::Dims dims, double mean, double stddev);

Tensor seeded_uniform(Rng& rng, Tensor::Dims dims, double lo, double hi);

}  // namespace ksalsa
