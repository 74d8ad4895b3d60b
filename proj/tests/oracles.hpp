#pragma once

// Brute-force reference implementations. They share no code with the library
// beyond the Tensor container, so agreement is evidence of correctness.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "ksalsa/rng.hpp"
#include "ksalsa/tensor.hpp"

namespace oracle {

using ksalsa::Tensor;

// Gram of every grid patch by explicit (u, v, pixel) loops.
inline std::vector<std::vector<std::vector<double>>> patch_grams(const Tensor& fmap,
                                                                 std::size_t grid) {
  const std::size_t c = fmap.dim(0), n = fmap.dim(1), side = n / grid;
  std::vector<std::vector<std::vector<double>>> out;
  for (std::size_t gr = 0; gr < grid; ++gr) {
    for (std::size_t gc = 0; gc < grid; ++gc) {
      std::vector<std::vector<double>> g(c, std::vector<double>(c, 0.0));
      for (std::size_t u = 0; u < c; ++u) {
        for (std::size_t v = 0; v < c; ++v) {
          for (std::size_t r = gr * side; r < (gr + 1) * side; ++r) {
            for (std::size_t q = gc * side; q < (gc + 1) * side; ++q) {
              g[u][v] += fmap[(u * n + r) * n + q] * fmap[(v * n + r) * n + q];
            }
          }
        }
      }
      out.push_back(std::move(g));
    }
  }
  return out;
}

inline std::vector<double> flatten_patch(const Tensor& styles, std::size_t j) {
  const std::size_t cc = styles.dim(1) * styles.dim(2);
  return {styles.values().begin() + std::ptrdiff_t(j * cc),
          styles.values().begin() + std::ptrdiff_t((j + 1) * cc)};
}

inline double cosine(const std::vector<double>& a, const std::vector<double>& b) {
  double ab = 0, aa = 0, bb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ab += a[i] * b[i];
    aa += a[i] * a[i];
    bb += b[i] * b[i];
  }
  if (aa == 0 || bb == 0) return 0.0;
  return ab / (std::sqrt(aa) * std::sqrt(bb));
}

// For each source patch, the first target patch whose cosine is not beaten
// by any other, found by checking every pair.
inline std::vector<std::size_t> exhaustive_correspondence(const Tensor& source,
                                                          const Tensor& target) {
  const std::size_t p = source.dim(0);
  std::vector<std::size_t> out(p);
  for (std::size_t j = 0; j < p; ++j) {
    const auto s = flatten_patch(source, j);
    for (std::size_t cand = 0; cand < p; ++cand) {
      const double cc = cosine(s, flatten_patch(target, cand));
      bool dominated = false;
      for (std::size_t other = 0; other < p; ++other) {
        const double co = cosine(s, flatten_patch(target, other));
        if (co > cc) dominated = true;
      }
      if (!dominated) {
        out[j] = cand;
        break;
      }
    }
  }
  return out;
}

struct GreedyStep {
  std::size_t seed;
  std::vector<std::size_t> members;  // sorted
};

inline double euclid(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

// Outlier-first greedy grouping written step by step: average distance to
// the other remaining points, first maximum wins; then k-1 picks of the
// nearest remaining point, first minimum wins.
inline std::vector<GreedyStep> greedy_reference(const std::vector<std::vector<double>>& points,
                                                std::size_t k) {
  std::vector<bool> taken(points.size(), false);
  std::size_t left = points.size();
  std::vector<GreedyStep> steps;
  while (left >= k) {
    std::size_t seed = points.size();
    double best = 0;
    for (std::size_t i = 0; i < points.size(); ++i) {
      if (taken[i]) continue;
      double sum = 0;
      for (std::size_t j = 0; j < points.size(); ++j) {
        if (!taken[j] && j != i) sum += euclid(points[i], points[j]);
      }
      const double avg = left > 1 ? sum / double(left - 1) : 0.0;
      if (seed == points.size() || avg > best) {
        best = avg;
        seed = i;
      }
    }
    GreedyStep step{seed, {seed}};
    taken[seed] = true;
    for (std::size_t m = 1; m < k; ++m) {
      std::size_t pick = points.size();
      double nearest = 0;
      for (std::size_t j = 0; j < points.size(); ++j) {
        if (taken[j]) continue;
        const double d = euclid(points[seed], points[j]);
        if (pick == points.size() || d < nearest) {
          nearest = d;
          pick = j;
        }
      }
      taken[pick] = true;
      step.members.push_back(pick);
    }
    std::sort(step.members.begin(), step.members.end());
    left -= k;
    steps.push_back(std::move(step));
  }
  return steps;
}

// Adam unrolled for a constant scalar gradient over `steps` steps.
inline double adam_constant_update(double g, int steps, double lr, double b1, double b2,
                                   double eps) {
  double m = 0, v = 0;
  for (int t = 1; t <= steps; ++t) {
    m = b1 * m + (1 - b1) * g;
    v = b2 * v + (1 - b2) * g * g;
  }
  const double mhat = m / (1 - std::pow(b1, steps));
  const double vhat = v / (1 - std::pow(b2, steps));
  return -lr * mhat / (std::sqrt(vhat) + eps);
}

inline Tensor random_tensor(std::uint64_t seed, Tensor::Dims dims, double stddev = 1.0) {
  ksalsa::Rng rng(seed);
  return ksalsa::seeded_normal(rng, std::move(dims), 0.0, stddev);
}

}  // namespace oracle
