#include "ksalsa/evaluation.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_map>
#include <unordered_set>

#include "ksalsa/errors.hpp"

namespace ksalsa {
namespace {

using Matrix = Eigen::MatrixXd;

Matrix to_matrix(const Tensor& t) {
  const std::size_t e = t.dim(0);
  Matrix m(e, e);
  for (std::size_t i = 0; i < e; ++i) {
    for (std::size_t j = 0; j < e; ++j) m(Eigen::Index(i), Eigen::Index(j)) = t[i * e + j];
  }
  return m;
}

Eigen::SelfAdjointEigenSolver<Matrix> eigen(const Matrix& m, const char* what) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(m);
  if (solver.info() != Eigen::Success) {
    throw NumericError(std::string("eigendecomposition failed for ") + what);
  }
  return solver;
}

Matrix sqrt_psd(const Matrix& m) {
  const auto solver = eigen(m, "matrix square root");
  const Eigen::VectorXd roots = solver.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return solver.eigenvectors() * roots.asDiagonal() * solver.eigenvectors().transpose();
}

}  // namespace

Tensor symmetrize(const Tensor& square) {
  if (square.rank() != 2 || square.dim(0) != square.dim(1)) {
    throw ArgumentError("symmetrize needs a square matrix");
  }
  const std::size_t e = square.dim(0);
  std::vector<double> out(e * e);
  for (std::size_t i = 0; i < e; ++i) {
    for (std::size_t j = 0; j < e; ++j) out[i * e + j] = 0.5 * (square[i * e + j] + square[j * e + i]);
  }
  return Tensor(square.dims(), std::move(out));
}

GaussianFit fit_gaussian(std::span<const Tensor> samples) {
  if (samples.size() < 2) throw ArgumentError("fit_gaussian needs at least two samples");
  const std::size_t e = samples.front().size();
  std::vector<double> mean(e, 0.0);
  for (const auto& s : samples) {
    if (s.size() != e) throw ArgumentError("fit_gaussian: samples differ in dimension");
    for (std::size_t i = 0; i < e; ++i) mean[i] += s[i];
  }
  const double n = double(samples.size());
  for (double& m : mean) m /= n;
  std::vector<double> cov(e * e, 0.0);
  for (const auto& s : samples) {
    for (std::size_t i = 0; i < e; ++i) {
      for (std::size_t j = 0; j < e; ++j) cov[i * e + j] += (s[i] - mean[i]) * (s[j] - mean[j]);
    }
  }
  for (double& c : cov) c /= n - 1.0;
  if (samples.size() <= e) {
    for (std::size_t i = 0; i < e; ++i) cov[i * e + i] += kCovarianceRidge;
  }
  return {Tensor({e}, std::move(mean)), symmetrize(Tensor({e, e}, std::move(cov)))};
}

double frechet_distance(const GaussianFit& a, const GaussianFit& b) {
  if (!a.mean.same_shape(b.mean) || !a.covariance.same_shape(b.covariance) ||
      a.covariance.dim(0) != a.mean.size()) {
    throw ArgumentError("frechet_distance: fits differ in dimension");
  }
  double mean_term = 0.0;
  for (std::size_t i = 0; i < a.mean.size(); ++i) {
    const double d = a.mean[i] - b.mean[i];
    mean_term += d * d;
  }
  const Matrix sa = to_matrix(symmetrize(a.covariance));
  const Matrix sb = to_matrix(symmetrize(b.covariance));
  const Matrix root_a = sqrt_psd(sa);
  Matrix inner = root_a * sb * root_a;
  inner = 0.5 * (inner + inner.transpose());
  const auto solver = eigen(inner, "covariance product");
  const double cross = solver.eigenvalues().cwiseMax(0.0).cwiseSqrt().sum();
  return mean_term + sa.trace() + sb.trace() - 2.0 * cross;
}

std::vector<Tensor> embed_images(const ContentEncoder& encoder, std::span<const Tensor> images) {
  std::vector<Tensor> out;
  out.reserve(images.size());
  for (const auto& image : images) out.push_back(encoder.forward(image));
  return out;
}

Scorer cosine_scorer(std::shared_ptr<const ContentEncoder> encoder) {
  return [encoder](const MiaQuery& query, const Candidate& candidate) {
    const Tensor a = encoder->forward(*query.average);
    const Tensor b = encoder->forward(candidate.image);
    return dot(a.values(), b.values());
  };
}

std::vector<std::uint64_t> rank_candidates(const MiaQuery& query, std::span<const Candidate> pool,
                                           const Scorer& scorer) {
  if (pool.empty()) throw ArgumentError("rank_candidates: empty pool");
  if (query.average == nullptr) throw ArgumentError("rank_candidates: query has no average");
  std::vector<std::pair<double, std::uint64_t>> scored;
  scored.reserve(pool.size());
  for (const auto& c : pool) {
    if (!c.image.same_shape(*query.average)) {
      throw ArgumentError("rank_candidates: candidate " + std::to_string(c.id) +
                          " differs in shape from the average");
    }
    scored.emplace_back(scorer(query, c), c.id);
  }
  std::sort(scored.begin(), scored.end(), [](const auto& x, const auto& y) {
    if (x.first != y.first) return x.first > y.first;
    return x.second < y.second;
  });
  std::vector<std::uint64_t> ids;
  ids.reserve(scored.size());
  for (const auto& s : scored) ids.push_back(s.second);
  return ids;
}

void validate(const MiaInstance& instance) {
  if (instance.averages.empty()) throw ArgumentError("MIA instance has no clusters");
  if (instance.k == 0) throw ArgumentError("MIA instance needs k >= 1");
  std::vector<std::size_t> counts(instance.averages.size(), 0);
  bool has_nonmember = false;
  std::unordered_set<std::uint64_t> seen;
  for (const auto& c : instance.pool) {
    if (!seen.insert(c.id).second) {
      throw ArgumentError("MIA pool repeats candidate id " + std::to_string(c.id));
    }
    if (!c.is_member) {
      has_nonmember = true;
      continue;
    }
    if (!c.cluster || *c.cluster >= counts.size()) {
      throw ArgumentError("MIA member " + std::to_string(c.id) + " has no valid cluster");
    }
    ++counts[*c.cluster];
  }
  for (std::size_t c = 0; c < counts.size(); ++c) {
    if (counts[c] != instance.k) {
      throw ArgumentError("MIA cluster " + std::to_string(c) + " has " + std::to_string(counts[c]) +
                          " members in the pool, expected " + std::to_string(instance.k));
    }
  }
  if (!has_nonmember) throw ArgumentError("MIA pool holds no non-members");
}

double mia_topk_accuracy(const MiaInstance& instance, const Scorer& scorer) {
  validate(instance);
  std::unordered_map<std::uint64_t, const Candidate*> by_id;
  for (const auto& c : instance.pool) by_id.emplace(c.id, &c);
  double total = 0.0;
  for (std::size_t cluster = 0; cluster < instance.averages.size(); ++cluster) {
    const auto ranking = rank_candidates({cluster, &instance.averages[cluster]}, instance.pool, scorer);
    std::size_t hits = 0;
    for (std::size_t r = 0; r < instance.k && r < ranking.size(); ++r) {
      const Candidate* c = by_id.at(ranking[r]);
      if (c->is_member && c->cluster == cluster) ++hits;
    }
    total += double(hits) / double(instance.k);
  }
  return total / double(instance.averages.size());
}

}  // namespace ksalsa
