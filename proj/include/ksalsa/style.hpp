#pragma once

#include <cstdint>
#include <memory>
#include <span>

#include "ksalsa/diff.hpp"
#include "ksalsa/generator.hpp"

namespace ksalsa {

// Fixed 3x3 convolution (stride 1, zero padding, spatial size preserved)
// followed by ReLU. Maps a C x n x n image to a c x n x n feature map; feature
// maps are stored channel-major so that each channel slice is contiguous.
class FeatureExtractor final : public DiffOp {
 public:
  // weights: c x C x 3 x 3, bias: c.
  FeatureExtractor(ImageShape input, Tensor weights, Tensor bias);

  Tensor forward(const Tensor& image) const override;
  Tensor vjp(const Tensor& image, const Tensor& cotangent) const override;

  ImageShape input_shape() const { return input_; }
  std::size_t channels() const { return weights_.dim(0); }
  Tensor::Dims output_dims() const { return {channels(), input_.height, input_.width}; }

  // Convolution output before the ReLU.
  Tensor preactivation(const Tensor& image) const;

 private:

  ImageShape input_;
  Tensor weights_;
  Tensor bias_;
};

// Weights ~ N(0, 1/(9C)); bias ~ N(0, bias_stddev^2).
std::shared_ptr<const FeatureExtractor> seeded_extractor(std::uint64_t seed, ImageShape input,
                                                         std::size_t channels = 8,
                                                         double bias_stddev = 0.0);

// The p = g*g patch-wise c x c Gram matrices of one feature map. Patch j
// covers grid cell (j / g, j % g), i.e. patches are numbered row-major.
class StyleSet {
 public:
  StyleSet() = default;
  // matrices: p x c x c.
  StyleSet(std::size_t grid, Tensor matrices);

  std::size_t grid() const { return grid_; }
  std::size_t patches() const { return matrices_.dim(0); }
  std::size_t channels() const { return matrices_.dim(1); }
  std::span<const double> matrix(std::size_t j) const;
  const Tensor& tensor() const { return matrices_; }

  bool compatible(const StyleSet& other) const {
    return matrices_.same_shape(other.matrices_);
  }

 private:
  std::size_t grid_ = 0;
  Tensor matrices_;
};

struct StyleOptions {
  std::size_t grid = 4;
  // Divide each Gram by the patch pixel count. Off by default.
  bool normalize = false;
};

// (S_j)_{u,v} = <vec(F_j[u]), vec(F_j[v])> over each grid patch j. grid = 1
// gives the whole-image Gram.
StyleSet local_style_features(const Tensor& feature_map, const StyleOptions& options = {});

// Cotangent of the feature map given a p x c x c cotangent on the Grams.
Tensor local_style_features_vjp(const Tensor& feature_map, const Tensor& gram_cotangent,
                                const StyleOptions& options = {});

}  // namespace ksalsa
