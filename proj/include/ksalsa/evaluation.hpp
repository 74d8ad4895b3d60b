#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "ksalsa/objective.hpp"
#include "ksalsa/tensor.hpp"

namespace ksalsa {

struct GaussianFit {
  Tensor mean;        // e
  Tensor covariance;  // e x e, symmetric
};

// (S + S^T) / 2
Tensor symmetrize(const Tensor& square);

inline constexpr double kCovarianceRidge = 1e-6;

// Sample mean and unbiased covariance of equal-length vectors. With n <= e
// samples, kCovarianceRidge is added to the diagonal.
GaussianFit fit_gaussian(std::span<const Tensor> samples);

// ||mu_a - mu_b||^2 + Tr(S_a + S_b - 2 (S_a^1/2 S_b S_a^1/2)^1/2). Square
// roots come from symmetric eigendecompositions with negative eigenvalues
// clamped to zero.
double frechet_distance(const GaussianFit& a, const GaussianFit& b);

// Unit content embeddings, the feature space used for the fidelity metric.
std::vector<Tensor> embed_images(const ContentEncoder& encoder, std::span<const Tensor> images);

struct Candidate {
  std::uint64_t id = 0;
  Tensor image;
  bool is_member = false;
  std::optional<std::size_t> cluster;  // set for members
};

struct MiaQuery {
  std::size_t cluster = 0;
  const Tensor* average = nullptr;
};

// Higher score = more likely a member of the queried cluster.
using Scorer = std::function<double(const MiaQuery&, const Candidate&)>;

// Cosine similarity of content embeddings.
Scorer cosine_scorer(std::shared_ptr<const ContentEncoder> encoder);

// Pool ids by descending score; equal scores keep ascending id order.
std::vector<std::uint64_t> rank_candidates(const MiaQuery& query, std::span<const Candidate> pool,
                                           const Scorer& scorer);

struct MiaInstance {
  std::vector<Tensor> averages;  // averages[c] is released for cluster c
  std::vector<Candidate> pool;
  std::size_t k = 0;
};

// Members per cluster must number exactly k and the pool must hold
// non-members.
void validate(const MiaInstance& instance);

// Mean over clusters of the fraction of the top-k ranked candidates that are
// true members of that cluster.
double mia_topk_accuracy(const MiaInstance& instance, const Scorer& scorer);

}  // namespace ksalsa
