#include "ksalsa/generator.hpp"

#include <cmath>

#include "ksalsa/errors.hpp"

namespace ksalsa {

GeneratorProfile generator_profile(std::string_view id) {
  if (id == "toy-16") return {"toy-16", 1, 32, {3, 16, 16}, 10.0};
  if (id == "toy-32") return {"toy-32", 1, 32, {3, 32, 32}, 10.0};
  throw ArgumentError("unknown generator profile '" + std::string(id) +
                      "' (expected toy-16 or toy-32)");
}

void Generator::check_latent(const Tensor& input) const {
  if (input.dims() != Tensor::Dims{latent_rows(), latent_width()}) {
    throw ArgumentError("generator expects a " + std::to_string(latent_rows()) + "x" +
                        std::to_string(latent_width()) + " latent, got " +
                        dims_to_string(input.dims()));
  }
}

void Generator::check_image(const Tensor& image) const {
  if (image.dims() != image_shape().dims()) {
    throw ArgumentError("generator image shape is " + dims_to_string(image_shape().dims()) +
                        ", got " + dims_to_string(image.dims()));
  }
}

ToyGenerator::ToyGenerator(GeneratorProfile profile, Tensor weights, Tensor bias)
    : profile_(std::move(profile)), weights_(std::move(weights)), bias_(std::move(bias)) {
  const std::size_t out = profile_.image.size();
  const std::size_t in = profile_.latent_rows * profile_.latent_width;
  if (weights_.dims() != Tensor::Dims{out, in}) {
    throw ArgumentError("toy generator weights must be " + std::to_string(out) + "x" +
                        std::to_string(in));
  }
  if (bias_.dims() != Tensor::Dims{out}) {
    throw ArgumentError("toy generator bias must have " + std::to_string(out) + " entries");
  }
  if (!(profile_.latent_scale > 0.0)) throw ArgumentError("latent scale must be positive");
}

Tensor ToyGenerator::forward(const Tensor& input) const {
  check_latent(input);
  const std::size_t out = profile_.image.size();
  const std::size_t in = input.size();
  const auto w = weights_.values();
  const auto z = input.values();
  const double inv_scale = 1.0 / profile_.latent_scale;
  std::vector<double> image(out);
  for (std::size_t r = 0; r < out; ++r) {
    image[r] = std::tanh(bias_[r] + inv_scale * dot(w.subspan(r * in, in), z));
  }
  return Tensor(profile_.image.dims(), std::move(image));
}

Tensor ToyGenerator::vjp(const Tensor& input, const Tensor& cotangent) const {
  check_image(cotangent);
  const Tensor image = forward(input);
  const std::size_t out = profile_.image.size();
  const std::size_t in = input.size();
  const auto w = weights_.values();
  const double inv_scale = 1.0 / profile_.latent_scale;
  std::vector<double> grad(in, 0.0);
  for (std::size_t r = 0; r < out; ++r) {
    const double s = inv_scale * cotangent[r] * (1.0 - image[r] * image[r]);
    if (s == 0.0) continue;
    const auto row = w.subspan(r * in, in);
    for (std::size_t c = 0; c < in; ++c) grad[c] += s * row[c];
  }
  return Tensor(input.dims(), std::move(grad));
}

std::shared_ptr<const ToyGenerator> toy_generator(std::uint64_t seed, std::string_view profile_id,
                                                  double bias_stddev) {
  GeneratorProfile profile = generator_profile(profile_id);
  const std::size_t out = profile.image.size();
  const std::size_t in = profile.latent_rows * profile.latent_width;
  Rng rng(seed);
  Rng weight_rng = rng.split(1);
  Rng bias_rng = rng.split(2);
  Tensor weights = seeded_normal(weight_rng, {out, in}, 0.0, 1.0 / std::sqrt(double(in)));
  Tensor bias = seeded_normal(bias_rng, {out}, 0.0, bias_stddev);
  return std::make_shared<const ToyGenerator>(std::move(profile), std::move(weights),
                                              std::move(bias));
}

IdentityGenerator::IdentityGenerator(std::size_t rows, std::size_t width, ImageShape image)
    : rows_(rows), width_(width), image_(image) {
  if (rows * width != image.size() || image.size() == 0) {
    throw ArgumentError("identity generator needs L*d == C*H*W, got " + std::to_string(rows * width) +
                        " vs " + std::to_string(image.size()));
  }
}

Tensor IdentityGenerator::forward(const Tensor& input) const {
  check_latent(input);
  return input.reshaped(image_.dims());
}

Tensor IdentityGenerator::vjp(const Tensor& input, const Tensor& cotangent) const {
  check_latent(input);
  check_image(cotangent);
  return cotangent.reshaped(input.dims());
}

std::shared_ptr<const IdentityGenerator> identity_generator(std::size_t rows, std::size_t width,
                                                            ImageShape image) {
  return std::make_shared<const IdentityGenerator>(rows, width, image);
}

namespace {

double reconstruction_loss(const Generator& generator, const Tensor& latent, const Tensor& image) {
  const Tensor recon = generator.forward(latent);
  double acc = 0.0;
  for (std::size_t i = 0; i < recon.size(); ++i) {
    const double d = recon[i] - image[i];
    acc += d * d;
  }
  return acc;
}

}  // namespace

InversionResult invert(const Generator& generator, const Tensor& image,
                       const InversionOptions& options) {
  if (options.max_iters < 0) throw ArgumentError("invert: max_iters must be >= 0");
  if (!(options.step_size > 0.0)) throw ArgumentError("invert: step_size must be positive");
  if (!(options.tolerance >= 0.0)) throw ArgumentError("invert: tolerance must be >= 0");
  if (image.dims() != generator.image_shape().dims()) {
    throw ArgumentError("invert: image dims " + dims_to_string(image.dims()) +
                        " do not match generator output " +
                        dims_to_string(generator.image_shape().dims()));
  }
  const double pixels = static_cast<double>(image.size());
  Tensor latent = options.init ? options.init->tensor()
                               : Tensor::zeros({generator.latent_rows(), generator.latent_width()});
  if (latent.dims() != Tensor::Dims{generator.latent_rows(), generator.latent_width()}) {
    throw ArgumentError("invert: init code has the wrong shape");
  }

  auto diverged = [&](int iter) {
    return DivergenceError("invert: non-finite reconstruction loss at iteration " +
                           std::to_string(iter) + "; try a smaller step_size");
  };

  double loss = 0.0;
  try {
    loss = reconstruction_loss(generator, latent, image);
  } catch (const NumericError&) {
    throw diverged(0);
  }
  if (!std::isfinite(loss)) throw diverged(0);

  int iter = 0;
  double step = options.step_size;
  while (iter < options.max_iters && loss / pixels > options.tolerance) {
    const Tensor residual = generator.forward(latent) - image;
    const Tensor grad = 2.0 * generator.vjp(latent, residual);
    const double grad_sq = squared_norm(grad.values());
    if (grad_sq == 0.0) break;

    bool accepted = false;
    bool stalled = false;
    for (int halving = 0; halving < 60; ++halving) {
      double trial_loss;
      Tensor trial;
      try {
        trial = latent - step * grad;
        trial_loss = reconstruction_loss(generator, trial, image);
      } catch (const NumericError&) {
        throw diverged(iter + 1);
      }
      if (!std::isfinite(trial_loss)) throw diverged(iter + 1);
      if (trial_loss <= loss - 1e-4 * step * grad_sq) {
        stalled = loss - trial_loss <= options.stall_tolerance * loss;
        latent = std::move(trial);
        loss = trial_loss;
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;  // no representable decrease left
    ++iter;
    if (stalled) break;
    step *= 2.0;
  }
  return {LatentCode(std::move(latent)), loss / pixels, iter};
}

}  // namespace ksalsa
