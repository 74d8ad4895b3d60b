#include "ksalsa/rng.hpp"

#include <cmath>
#include <numbers>

#include "ksalsa/errors.hpp"

namespace ksalsa {

std::uint64_t Rng::mix(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::uint64_t Rng::next_u64() { return mix(key_ + (++counter_) * kGamma); }

double Rng::uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

std::uint64_t Rng::below(std::uint64_t n) {
  if (n == 0) throw ArgumentError("Rng::below requires n > 0");
  // Rejection sampling keeps the result unbiased.
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  std::uint64_t x;
  do {
    x = next_u64();
  } while (x >= limit);
  return x % n;
}

double Rng::normal(double mean, double stddev) {
  const double u1 = static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;  // (0, 1]
  const double u2 = uniform();
  const double z = std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  return mean + stddev * z;
}

Rng Rng::split(std::uint64_t stream) const {
  return Rng(mix(seed_ ^ mix(stream + kGamma)));
}

Tensor seeded_normal(Rng& rng, Tensor::Dims dims, double mean, double stddev) {
  if (!(stddev >= 0.0) || !std::isfinite(stddev)) {
    throw ArgumentError("seeded_normal: stddev must be finite and >= 0");
  }
  std::vector<double> data(element_count(dims));
  for (double& v : data) v = rng.normal(mean, stddev);
  return Tensor(std::move(dims), std::move(data));
}

Tensor seeded_uniform(Rng& rng, Tensor::Dims dims, double lo, double hi) {
  std::vector<double> data(element_count(dims));
  for (double& v : data) v = lo + (hi - lo) * rng.uniform();
  return Tensor(std::move(dims), std::move(data));
}

}  // namespace ksalsa
