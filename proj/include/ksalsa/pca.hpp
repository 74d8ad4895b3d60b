#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "ksalsa/tensor.hpp"

namespace ksalsa {

struct PcaModel {
  Tensor mean;                            // D
  Tensor components;                      // r x D, orthonormal rows
  std::vector<double> explained_variance;  // r eigenvalues of the sample covariance

  std::size_t rank() const { return components.dim(0); }
  std::size_t dimension() const { return mean.size(); }

  // mean + V V^T (x - mean)
  Tensor reconstruct(const Tensor& sample) const;
  // V^T (x - mean)
  std::vector<double> project(const Tensor& sample) const;
};

struct PcaOptions {
  std::uint64_t seed = 0;
  int max_sweeps = 200000;
  // Stop when every Ritz residual ||M u - theta u|| <= tolerance * theta_1.
  double tolerance = 1e-10;
};

// Top-r principal directions by orthogonal (block power) iteration with a
// Rayleigh-Ritz step. Works on the n x n Gram matrix when n < D.
// Samples are flattened; r must lie in [1, min(n-1, D)].
PcaModel fit_pca(std::span<const Tensor> samples, std::size_t r, const PcaOptions& options = {});

}  // namespace ksalsa
