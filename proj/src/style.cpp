#include "ksalsa/style.hpp"

#include <cmath>

#include "ksalsa/errors.hpp"

namespace ksalsa {

FeatureExtractor::FeatureExtractor(ImageShape input, Tensor weights, Tensor bias)
    : input_(input), weights_(std::move(weights)), bias_(std::move(bias)) {
  if (weights_.rank() != 4 || weights_.dim(1) != input_.channels || weights_.dim(2) != 3 ||
      weights_.dim(3) != 3) {
    throw ArgumentError("extractor weights must be c x " + std::to_string(input_.channels) +
                        " x 3 x 3, got " + dims_to_string(weights_.dims()));
  }
  if (bias_.dims() != Tensor::Dims{weights_.dim(0)}) {
    throw ArgumentError("extractor bias must have one entry per output channel");
  }
  if (input_.height != input_.width) throw ArgumentError("extractor expects square images");
}

Tensor FeatureExtractor::preactivation(const Tensor& image) const {
  if (image.dims() != input_.dims()) {
    throw ArgumentError("extractor expects image dims " + dims_to_string(input_.dims()) +
                        ", got " + dims_to_string(image.dims()));
  }
  const std::size_t cin = input_.channels;
  const std::size_t n = input_.height;
  const std::size_t cout = channels();
  const auto w = weights_.values();
  const auto x = image.values();
  std::vector<double> out(cout * n * n);
  for (std::size_t o = 0; o < cout; ++o) {
    for (std::size_t r = 0; r < n; ++r) {
      for (std::size_t c = 0; c < n; ++c) {
        double acc = bias_[o];
        for (std::size_t i = 0; i < cin; ++i) {
          for (std::size_t dr = 0; dr < 3; ++dr) {
            const std::ptrdiff_t rr = std::ptrdiff_t(r) + std::ptrdiff_t(dr) - 1;
            if (rr < 0 || rr >= std::ptrdiff_t(n)) continue;
            for (std::size_t dc = 0; dc < 3; ++dc) {
              const std::ptrdiff_t cc = std::ptrdiff_t(c) + std::ptrdiff_t(dc) - 1;
              if (cc < 0 || cc >= std::ptrdiff_t(n)) continue;
              acc += w[((o * cin + i) * 3 + dr) * 3 + dc] * x[(i * n + rr) * n + cc];
            }
          }
        }
        out[(o * n + r) * n + c] = acc;
      }
    }
  }
  return Tensor(output_dims(), std::move(out));
}

Tensor FeatureExtractor::forward(const Tensor& image) const {
  const Tensor pre = preactivation(image);
  std::vector<double> out = pre.vector();
  for (double& v : out) v = v > 0.0 ? v : 0.0;
  return Tensor(pre.dims(), std::move(out));
}

Tensor FeatureExtractor::vjp(const Tensor& image, const Tensor& cotangent) const {
  if (cotangent.dims() != output_dims()) {
    throw ArgumentError("extractor cotangent must have dims " + dims_to_string(output_dims()));
  }
  const Tensor pre = preactivation(image);
  const std::size_t cin = input_.channels;
  const std::size_t n = input_.height;
  const std::size_t cout = channels();
  const auto w = weights_.values();
  std::vector<double> grad(image.size(), 0.0);
  for (std::size_t o = 0; o < cout; ++o) {
    for (std::size_t r = 0; r < n; ++r) {
      for (std::size_t c = 0; c < n; ++c) {
        const std::size_t idx = (o * n + r) * n + c;
        if (pre[idx] <= 0.0) continue;  // ReLU gate
        const double g = cotangent[idx];
        for (std::size_t i = 0; i < cin; ++i) {
          for (std::size_t dr = 0; dr < 3; ++dr) {
            const std::ptrdiff_t rr = std::ptrdiff_t(r) + std::ptrdiff_t(dr) - 1;
            if (rr < 0 || rr >= std::ptrdiff_t(n)) continue;
            for (std::size_t dc = 0; dc < 3; ++dc) {
              const std::ptrdiff_t cc = std::ptrdiff_t(c) + std::ptrdiff_t(dc) - 1;
              if (cc < 0 || cc >= std::ptrdiff_t(n)) continue;
              grad[(i * n + rr) * n + cc] += g * w[((o * cin + i) * 3 + dr) * 3 + dc];
            }
          }
        }
      }
    }
  }
  return Tensor(image.dims(), std::move(grad));
}

std::shared_ptr<const FeatureExtractor> seeded_extractor(std::uint64_t seed, ImageShape input,
                                                         std::size_t channels,
                                                         double bias_stddev) {
  if (channels == 0) throw ArgumentError("extractor needs at least one channel");
  Rng rng(seed);
  Rng weight_rng = rng.split(1);
  Rng bias_rng = rng.split(2);
  Tensor weights = seeded_normal(weight_rng, {channels, input.channels, 3, 3}, 0.0,
                                 1.0 / std::sqrt(9.0 * double(input.channels)));
  Tensor bias = seeded_normal(bias_rng, {channels}, 0.0, bias_stddev);
  return std::make_shared<const FeatureExtractor>(input, std::move(weights), std::move(bias));
}

StyleSet::StyleSet(std::size_t grid, Tensor matrices) : grid_(grid), matrices_(std::move(matrices)) {
  if (matrices_.rank() != 3 || matrices_.dim(1) != matrices_.dim(2)) {
    throw ArgumentError("style set must be p x c x c, got " + dims_to_string(matrices_.dims()));
  }
  if (grid_ == 0 || grid_ * grid_ != matrices_.dim(0)) {
    throw ArgumentError("style set patch count must equal grid^2");
  }
}

std::span<const double> StyleSet::matrix(std::size_t j) const {
  const std::size_t cc = channels() * channels();
  return matrices_.values().subspan(j * cc, cc);
}

namespace {

struct PatchGeometry {
  std::size_t channels;
  std::size_t n;
  std::size_t grid;
  std::size_t side;  // patch edge length
};

PatchGeometry geometry(const Tensor& fmap, std::size_t grid) {
  if (fmap.rank() != 3 || fmap.dim(1) != fmap.dim(2)) {
    throw ArgumentError("feature map must be c x n x n, got " + dims_to_string(fmap.dims()));
  }
  const std::size_t n = fmap.dim(1);
  if (grid == 0 || n % grid != 0) {
    throw ArgumentError("feature map size " + std::to_string(n) + " is not divisible by grid " +
                        std::to_string(grid));
  }
  return {fmap.dim(0), n, grid, n / grid};
}

}  // namespace

StyleSet local_style_features(const Tensor& fmap, const StyleOptions& options) {
  const auto geo = geometry(fmap, options.grid);
  const std::size_t p = geo.grid * geo.grid;
  const std::size_t c = geo.channels;
  const double scale = options.normalize ? 1.0 / double(geo.side * geo.side) : 1.0;
  const auto f = fmap.values();
  std::vector<double> grams(p * c * c, 0.0);
  for (std::size_t j = 0; j < p; ++j) {
    const std::size_t r0 = (j / geo.grid) * geo.side;
    const std::size_t c0 = (j % geo.grid) * geo.side;
    double* gram = grams.data() + j * c * c;
    for (std::size_t u = 0; u < c; ++u) {
      for (std::size_t v = u; v < c; ++v) {
        double acc = 0.0;
        for (std::size_t r = r0; r < r0 + geo.side; ++r) {
          const double* fu = f.data() + (u * geo.n + r) * geo.n;
          const double* fv = f.data() + (v * geo.n + r) * geo.n;
          for (std::size_t col = c0; col < c0 + geo.side; ++col) acc += fu[col] * fv[col];
        }
        gram[u * c + v] = gram[v * c + u] = scale * acc;
      }
    }
  }
  return StyleSet(geo.grid, Tensor({p, c, c}, std::move(grams)));
}

Tensor local_style_features_vjp(const Tensor& fmap, const Tensor& gram_cotangent,
                                const StyleOptions& options) {
  const auto geo = geometry(fmap, options.grid);
  const std::size_t p = geo.grid * geo.grid;
  const std::size_t c = geo.channels;
  if (gram_cotangent.dims() != Tensor::Dims{p, c, c}) {
    throw ArgumentError("Gram cotangent must be " + dims_to_string({p, c, c}));
  }
  const double scale = options.normalize ? 1.0 / double(geo.side * geo.side) : 1.0;
  const auto f = fmap.values();
  std::vector<double> grad(fmap.size(), 0.0);
  // dS_uv/dF_u = F_v and dS_uv/dF_v = F_u, so dF_u = sum_v (G_uv + G_vu) F_v.
  for (std::size_t j = 0; j < p; ++j) {
    const std::size_t r0 = (j / geo.grid) * geo.side;
    const std::size_t c0 = (j % geo.grid) * geo.side;
    const double* g = gram_cotangent.values().data() + j * c * c;
    for (std::size_t u = 0; u < c; ++u) {
      for (std::size_t v = 0; v < c; ++v) {
        const double coeff = scale * (g[u * c + v] + g[v * c + u]);
        if (coeff == 0.0) continue;
        for (std::size_t r = r0; r < r0 + geo.side; ++r) {
          double* du = grad.data() + (u * geo.n + r) * geo.n;
          const double* fv = f.data() + (v * geo.n + r) * geo.n;
          for (std::size_t col = c0; col < c0 + geo.side; ++col) du[col] += coeff * fv[col];
        }
      }
    }
  }
  return Tensor(fmap.dims(), std::move(grad));
}

}  // namespace ksalsa
