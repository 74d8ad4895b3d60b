#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>

#include "ksalsa/diff.hpp"
#include "ksalsa/latent.hpp"

namespace ksalsa {

struct ImageShape {
  std::size_t channels = 0;
  std::size_t height = 0;
  std::size_t width = 0;

  Tensor::Dims dims() const { return {channels, height, width}; }
  std::size_t size() const { return channels * height * width; }
  friend bool operator==(const ImageShape&, const ImageShape&) = default;
};

struct GeneratorProfile {
  std::string id;
  std::size_t latent_rows = 0;
  std::size_t latent_width = 0;
  ImageShape image;
  // Typical magnitude of latent coordinates; the generator divides by it.
  double latent_scale = 1.0;
};

// "toy-16": L=1, d=32, 3x16x16. "toy-32": L=1, d=32, 3x32x32. Both use a
// latent scale of 10, so Adam steps of 0.1 move a code by about 1% of its
// spread.
GeneratorProfile generator_profile(std::string_view id);

// Maps an L x d latent to a C x H x W image. Implementations are immutable
// and must be safe to call concurrently.
class Generator : public DiffOp {
 public:
  virtual std::size_t latent_rows() const = 0;
  virtual std::size_t latent_width() const = 0;
  virtual ImageShape image_shape() const = 0;
  virtual double latent_scale() const { return 1.0; }

  Tensor generate(const LatentCode& code) const { return forward(code.tensor()); }
  LatentCode latent_vjp(const LatentCode& code, const Tensor& image_cotangent) const {
    return LatentCode(vjp(code.tensor(), image_cotangent));
  }

 protected:
  void check_latent(const Tensor& input) const;
  void check_image(const Tensor& image) const;
};

// tanh(W * vec(w) / s + b) for latent scale s, reshaped to the image.
// Weights are frozen at construction.
class ToyGenerator final : public Generator {
 public:
  ToyGenerator(GeneratorProfile profile, Tensor weights, Tensor bias);

  Tensor forward(const Tensor& input) const override;
  Tensor vjp(const Tensor& input, const Tensor& cotangent) const override;

  std::size_t latent_rows() const override { return profile_.latent_rows; }
  std::size_t latent_width() const override { return profile_.latent_width; }
  ImageShape image_shape() const override { return profile_.image; }
  double latent_scale() const override { return profile_.latent_scale; }

  const Tensor& weights() const { return weights_; }
  const Tensor& bias() const { return bias_; }

 private:
  GeneratorProfile profile_;
  Tensor weights_;  // (C*H*W) x (L*d)
  Tensor bias_;     // C*H*W
};

// Weights ~ N(0, 1/(L*d)), bias ~ N(0, bias_stddev^2), both from `seed`.
std::shared_ptr<const ToyGenerator> toy_generator(std::uint64_t seed, std::string_view profile,
                                                  double bias_stddev = 0.1);

// Reshape between latent and image; requires L*d == C*H*W.
class IdentityGenerator final : public Generator {
 public:
  IdentityGenerator(std::size_t rows, std::size_t width, ImageShape image);

  Tensor forward(const Tensor& input) const override;
  Tensor vjp(const Tensor& input, const Tensor& cotangent) const override;

  std::size_t latent_rows() const override { return rows_; }
  std::size_t latent_width() const override { return width_; }
  ImageShape image_shape() const override { return image_; }

 private:
  std::size_t rows_;
  std::size_t width_;
  ImageShape image_;
};

std::shared_ptr<const IdentityGenerator> identity_generator(std::size_t rows, std::size_t width,
                                                            ImageShape image);

struct InversionOptions {
  int max_iters = 2000;
  // First trial step; later line searches start from twice the last
  // accepted step.
  double step_size = 0.5;
  // Stop once the reconstruction MSE is at or below this.
  double tolerance = 1e-12;
  // Also stop when one step improves the loss by less than this fraction.
  double stall_tolerance = 1e-12;
  // Starts from the zero code when unset.
  std::optional<LatentCode> init;
};

struct InversionResult {
  LatentCode code;
  double mse = 0.0;
  int iterations = 0;
};

// Gradient descent on ||G(w) - x||^2 with Armijo backtracking. Returns the
// best iterate seen, so the result never reconstructs worse than the start.
InversionResult invert(const Generator& generator, const Tensor& image,
                       const InversionOptions& options = {});

}  // namespace ksalsa
