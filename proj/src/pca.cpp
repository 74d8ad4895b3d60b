#include "ksalsa/pca.hpp"

#include <Eigen/Dense>
#include <cmath>

#include "ksalsa/errors.hpp"
#include "ksalsa/rng.hpp"

namespace ksalsa {
namespace {

// Dense symmetric m x m matrix, row-major.
struct SymMatrix {
  std::size_t m;
  std::vector<double> a;

  std::vector<double> apply(const std::vector<double>& v) const {
    std::vector<double> out(m);
    for (std::size_t i = 0; i < m; ++i) out[i] = dot({a.data() + i * m, m}, v);
    return out;
  }
};

// Removes the components of v along each basis vector (two passes).
void orthogonalize(std::vector<double>& v, const std::vector<std::vector<double>>& basis) {
  for (int pass = 0; pass < 2; ++pass) {
    for (const auto& b : basis) {
      const double c = dot(v, b);
      for (std::size_t i = 0; i < v.size(); ++i) v[i] -= c * b[i];
    }
  }
}

double normalize(std::vector<double>& v) {
  const double norm = std::sqrt(squared_norm(v));
  if (norm > 0.0) {
    for (double& x : v) x /= norm;
  }
  return norm;
}

struct Eigenpair {
  std::vector<double> vector;
  double value;
};

// Block orthogonal iteration with a Rayleigh-Ritz step. Each sweep multiplies
// an orthonormal m x r block by M, re-orthonormalizes it and extracts Ritz
// pairs, so clustered eigenvalues inside the block do not slow convergence.
std::vector<Eigenpair> top_eigenpairs(const SymMatrix& mat, std::size_t r, const PcaOptions& opts) {
  using Eigen::Index;
  using Eigen::MatrixXd;
  const Index m = Index(mat.m), k = Index(r);
  const Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> a(
      mat.a.data(), m, m);
  Rng init = Rng(opts.seed).split(0);
  MatrixXd v(m, k);
  for (Index j = 0; j < k; ++j) {
    for (Index i = 0; i < m; ++i) v(i, j) = init.normal();
  }
  v = Eigen::HouseholderQR<MatrixXd>(v).householderQ() * MatrixXd::Identity(m, k);

  for (int sweep = 0; sweep < opts.max_sweeps; ++sweep) {
    const MatrixXd w = a * v;
    const MatrixXd h = (v.transpose() * w + w.transpose() * v) / 2.0;
    const Eigen::SelfAdjointEigenSolver<MatrixXd> small(h);
    if (small.info() != Eigen::Success) throw NumericError("PCA: Rayleigh-Ritz eigensolve failed");
    // Descending order.
    const MatrixXd y = small.eigenvectors().rowwise().reverse();
    const Eigen::VectorXd theta = small.eigenvalues().reverse();
    const MatrixXd u = v * y;
    const MatrixXd residual = w * y - u * theta.asDiagonal();
    const double ref = std::max(std::abs(theta(0)), 1e-300);
    if (residual.colwise().norm().maxCoeff() <= opts.tolerance * ref) {
      std::vector<Eigenpair> found;
      for (Index j = 0; j < k; ++j) {
        found.push_back({std::vector<double>(u.col(j).data(), u.col(j).data() + m), theta(j)});
      }
      return found;
    }
    v = Eigen::HouseholderQR<MatrixXd>(w).householderQ() * MatrixXd::Identity(m, k);
  }
  throw ConvergenceError("orthogonal iteration did not converge within " +
                         std::to_string(opts.max_sweeps) + " sweeps");
}

}  // namespace

Tensor PcaModel::reconstruct(const Tensor& sample) const {
  const auto coeffs = project(sample);
  std::vector<double> out = mean.vector();
  const std::size_t d = dimension();
  for (std::size_t c = 0; c < rank(); ++c) {
    const auto row = components.values().subspan(c * d, d);
    for (std::size_t i = 0; i < d; ++i) out[i] += coeffs[c] * row[i];
  }
  return Tensor(sample.dims(), std::move(out));
}

std::vector<double> PcaModel::project(const Tensor& sample) const {
  if (sample.size() != dimension()) throw ArgumentError("PCA sample has the wrong dimension");
  const std::size_t d = dimension();
  std::vector<double> centered(d);
  for (std::size_t i = 0; i < d; ++i) centered[i] = sample[i] - mean[i];
  std::vector<double> coeffs(rank());
  for (std::size_t c = 0; c < rank(); ++c) {
    coeffs[c] = dot(components.values().subspan(c * d, d), centered);
  }
  return coeffs;
}

PcaModel fit_pca(std::span<const Tensor> samples, std::size_t r, const PcaOptions& options) {
  const std::size_t n = samples.size();
  if (n < 2) throw ArgumentError("fit_pca needs at least two samples");
  const std::size_t d = samples.front().size();
  for (const auto& s : samples) {
    if (s.size() != d) throw ArgumentError("fit_pca: samples differ in size");
  }
  if (r < 1 || r > std::min(n - 1, d)) {
    throw ArgumentError("fit_pca: r=" + std::to_string(r) + " outside [1, " +
                        std::to_string(std::min(n - 1, d)) + "]");
  }

  std::vector<double> mean(d, 0.0);
  for (const auto& s : samples) {
    for (std::size_t i = 0; i < d; ++i) mean[i] += s[i];
  }
  for (double& m : mean) m /= double(n);
  std::vector<double> x(n * d);  // centered, n x d
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t i = 0; i < d; ++i) x[k * d + i] = samples[k][i] - mean[i];
  }
  const double denom = double(n - 1);

  std::vector<std::vector<double>> directions;
  std::vector<double> variances;
  if (n <= d) {
    SymMatrix gram{n, std::vector<double>(n * n)};
    for (std::size_t a = 0; a < n; ++a) {
      for (std::size_t b = a; b < n; ++b) {
        const double v = dot({x.data() + a * d, d}, {x.data() + b * d, d}) / denom;
        gram.a[a * n + b] = gram.a[b * n + a] = v;
      }
    }
    Rng fill(Rng(options.seed).split(0xF111).seed());
    auto pairs = top_eigenpairs(gram, r, options);
    const double lead_norm = std::sqrt(std::max(pairs.front().value, 0.0) * denom);
    for (auto& pair : pairs) {
      // Map the Gram eigenvector u to the covariance eigenvector X^T u.
      std::vector<double> dir(d, 0.0);
      for (std::size_t k = 0; k < n; ++k) {
        for (std::size_t i = 0; i < d; ++i) dir[i] += pair.vector[k] * x[k * d + i];
      }
      orthogonalize(dir, directions);
      if (normalize(dir) <= 1e-10 * lead_norm || lead_norm == 0.0) {
        // Null direction: any unit vector orthogonal to the others will do.
        for (double& v : dir) v = fill.normal();
        orthogonalize(dir, directions);
        normalize(dir);
      }
      directions.push_back(std::move(dir));
      variances.push_back(pair.value);
    }
  } else {
    SymMatrix cov{d, std::vector<double>(d * d, 0.0)};
    for (std::size_t k = 0; k < n; ++k) {
      const double* row = x.data() + k * d;
      for (std::size_t i = 0; i < d; ++i) {
        for (std::size_t j = i; j < d; ++j) cov.a[i * d + j] += row[i] * row[j] / denom;
      }
    }
    for (std::size_t i = 0; i < d; ++i) {
      for (std::size_t j = 0; j < i; ++j) cov.a[i * d + j] = cov.a[j * d + i];
    }
    for (auto& pair : top_eigenpairs(cov, r, options)) {
      directions.push_back(std::move(pair.vector));
      variances.push_back(pair.value);
    }
  }

  std::vector<double> flat;
  flat.reserve(r * d);
  for (const auto& dir : directions) flat.insert(flat.end(), dir.begin(), dir.end());
  return {Tensor({d}, std::move(mean)), Tensor({r, d}, std::move(flat)), std::move(variances)};
}

}  // namespace ksalsa
