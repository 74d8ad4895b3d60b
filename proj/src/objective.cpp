#include "ksalsa/objective.hpp"

#include <cmath>

#include "ksalsa/errors.hpp"

namespace ksalsa {

ContentEncoder::ContentEncoder(ImageShape input, Tensor weights, Tensor bias)
    : input_(input), weights_(std::move(weights)), bias_(std::move(bias)) {
  if (weights_.rank() != 2 || weights_.dim(1) != input_.size()) {
    throw ArgumentError("content encoder weights must be e x " + std::to_string(input_.size()));
  }
  if (bias_.dims() != Tensor::Dims{weights_.dim(0)}) {
    throw ArgumentError("content encoder bias must have e entries");
  }
}

Tensor ContentEncoder::raw_embedding(const Tensor& image) const {
  if (image.dims() != input_.dims()) {
    throw ArgumentError("content encoder expects image dims " + dims_to_string(input_.dims()) +
                        ", got " + dims_to_string(image.dims()));
  }
  const std::size_t e = dimension();
  const std::size_t n = input_.size();
  const auto w = weights_.values();
  std::vector<double> z(e);
  for (std::size_t r = 0; r < e; ++r) z[r] = bias_[r] + dot(w.subspan(r * n, n), image.values());
  return Tensor({e}, std::move(z));
}

Tensor ContentEncoder::forward(const Tensor& image) const {
  const Tensor z = raw_embedding(image);
  const double norm = std::sqrt(squared_norm(z.values()));
  if (norm == 0.0) return z;
  return (1.0 / norm) * z;
}

Tensor ContentEncoder::vjp(const Tensor& image, const Tensor& cotangent) const {
  if (cotangent.dims() != Tensor::Dims{dimension()}) {
    throw ArgumentError("content encoder cotangent must have e entries");
  }
  const Tensor z = raw_embedding(image);
  const double norm = std::sqrt(squared_norm(z.values()));
  const std::size_t e = dimension();
  const std::size_t n = input_.size();
  if (norm == 0.0) return Tensor::zeros(image.dims());
  // d(z/|z|)/dz = (I - y y^T) / |z|
  std::vector<double> dz(e);
  double y_dot_c = 0.0;
  for (std::size_t r = 0; r < e; ++r) y_dot_c += z[r] / norm * cotangent[r];
  for (std::size_t r = 0; r < e; ++r) dz[r] = (cotangent[r] - z[r] / norm * y_dot_c) / norm;
  const auto w = weights_.values();
  std::vector<double> grad(n, 0.0);
  for (std::size_t r = 0; r < e; ++r) {
    const auto row = w.subspan(r * n, n);
    for (std::size_t i = 0; i < n; ++i) grad[i] += dz[r] * row[i];
  }
  return Tensor(image.dims(), std::move(grad));
}

std::shared_ptr<const ContentEncoder> seeded_encoder(std::uint64_t seed, ImageShape input,
                                                     std::size_t dimension) {
  if (dimension == 0) throw ArgumentError("content encoder needs a positive dimension");
  Rng rng(seed);
  Rng weight_rng = rng.split(1);
  Tensor weights = seeded_normal(weight_rng, {dimension, input.size()}, 0.0,
                                 1.0 / std::sqrt(double(input.size())));
  return std::make_shared<const ContentEncoder>(input, std::move(weights),
                                                Tensor::zeros({dimension}));
}

void validate(const LossConfig& config) {
  if (!(config.lambda >= 0.0 && config.lambda <= 1.0)) {
    throw ArgumentError("lambda must lie in [0, 1]");
  }
  if (config.iterations < 0) throw ArgumentError("iterations T must be >= 0");
  if (config.style.grid == 0) throw ArgumentError("grid must be >= 1");
  validate(config.adam);
}

double auto_lambda(int k, std::string_view schedule) {
  if (schedule == "aptos") {
    if (k == 2) return 0.1;
    if (k == 5) return 0.05;
    if (k == 10) return 0.03;
  } else if (schedule == "eyepacs") {
    if (k == 2) return 0.01;
    if (k == 5) return 0.02;
    if (k == 10) return 0.01;
  } else {
    throw ArgumentError("unknown lambda schedule '" + std::string(schedule) + "'");
  }
  throw ArgumentError("lambda schedule '" + std::string(schedule) + "' has no entry for k=" +
                      std::to_string(k) + "; pass an explicit lambda");
}

double content_loss(const Tensor& anchor, const Tensor& candidate) {
  if (anchor.rank() != 1 || !anchor.same_shape(candidate)) {
    throw ArgumentError("content_loss: embeddings must be vectors of equal dimension");
  }
  return 1.0 - dot(anchor.values(), candidate.values());
}

namespace {

void check_style_inputs(std::span<const StyleSet> sources, const StyleSet& target,
                        std::span<const Correspondence> correspondences) {
  if (sources.size() != correspondences.size()) {
    throw ArgumentError("style_loss: " + std::to_string(sources.size()) + " sources but " +
                        std::to_string(correspondences.size()) + " correspondences");
  }
  const std::size_t p = target.patches();
  for (std::size_t i = 0; i < sources.size(); ++i) {
    if (!sources[i].compatible(target)) {
      throw ArgumentError("style_loss: source " + std::to_string(i) + " differs in shape from target");
    }
    if (correspondences[i].size() != p) {
      throw ArgumentError("style_loss: correspondence " + std::to_string(i) + " has wrong length");
    }
    for (std::size_t idx : correspondences[i]) {
      if (idx >= p) throw ArgumentError("style_loss: correspondence index out of range");
    }
  }
}

template <typename Fn>
auto staged(const char* stage, Fn&& fn) {
  try {
    return fn();
  } catch (const NumericError& e) {
    throw NumericError(std::string("non-finite value in stage '") + stage + "': " + e.what());
  }
}

struct Forward {
  Tensor image;
  Tensor features;
  StyleSet target;
  Tensor embedding;
  LossBreakdown loss;
};

Forward run_forward(const LatentCode& code, const ObjectiveContext& ctx) {
  const auto& m = ctx.models;
  const auto& cfg = ctx.config;
  Forward f;
  f.image = staged("generator", [&] { return m.generator->generate(code); });
  f.features = staged("extractor", [&] { return m.extractor->forward(f.image); });
  f.target = staged("style", [&] { return local_style_features(f.features, cfg.style); });
  f.embedding = staged("encoder", [&] { return m.encoder->forward(f.image); });
  f.loss.correspondences.reserve(ctx.source_styles.size());
  for (const auto& s : ctx.source_styles) {
    f.loss.correspondences.push_back(correspondence(s, f.target, cfg.alignment));
  }
  f.loss.content = content_loss(ctx.anchor_embedding, f.embedding);
  f.loss.style = style_loss(ctx.source_styles, f.target, f.loss.correspondences);
  f.loss.total = cfg.lambda * f.loss.content + (1.0 - cfg.lambda) * f.loss.style;
  if (!std::isfinite(f.loss.total)) throw NumericError("non-finite value in stage 'loss'");
  return f;
}

}  // namespace

double style_loss(std::span<const StyleSet> sources, const StyleSet& target,
                  std::span<const Correspondence> correspondences) {
  check_style_inputs(sources, target, correspondences);
  double total = 0.0;
  for (std::size_t i = 0; i < sources.size(); ++i) {
    for (std::size_t j = 0; j < target.patches(); ++j) {
      const auto s = sources[i].matrix(j);
      const auto t = target.matrix(correspondences[i][j]);
      for (std::size_t e = 0; e < s.size(); ++e) {
        const double d = s[e] - t[e];
        total += d * d;
      }
    }
  }
  return total;
}

ObjectiveContext make_context(const ObjectiveModels& models, std::span<const Tensor> images,
                              const LatentCode& anchor_code, const LossConfig& config) {
  validate(config);
  if (!models.generator || !models.extractor || !models.encoder) {
    throw StateError("objective models are not fully configured");
  }
  if (images.empty()) throw ArgumentError("objective needs at least one source image");
  ObjectiveContext ctx{models, {}, {}, config};
  ctx.source_styles.reserve(images.size());
  for (const auto& image : images) {
    ctx.source_styles.push_back(
        local_style_features(models.extractor->forward(image), config.style));
  }
  ctx.anchor_embedding = models.encoder->forward(models.generator->generate(anchor_code));
  return ctx;
}

LossBreakdown evaluate_loss(const LatentCode& code, const ObjectiveContext& context) {
  return run_forward(code, context).loss;
}

double total_loss(const LatentCode& code, const ObjectiveContext& context) {
  return evaluate_loss(code, context).total;
}

LossGradient total_loss_gradient(const LatentCode& code, const ObjectiveContext& ctx) {
  const auto& m = ctx.models;
  const auto& cfg = ctx.config;
  Forward f = run_forward(code, ctx);

  const std::size_t p = f.target.patches();
  const std::size_t cc = f.target.channels() * f.target.channels();
  std::vector<double> gram_cot(p * cc, 0.0);
  const double style_weight = 1.0 - cfg.lambda;
  if (style_weight != 0.0) {
    for (std::size_t i = 0; i < ctx.source_styles.size(); ++i) {
      for (std::size_t j = 0; j < p; ++j) {
        const std::size_t target_patch = f.loss.correspondences[i][j];
        const auto s = ctx.source_styles[i].matrix(j);
        const auto t = f.target.matrix(target_patch);
        double* g = gram_cot.data() + target_patch * cc;
        for (std::size_t e = 0; e < cc; ++e) g[e] += style_weight * 2.0 * (t[e] - s[e]);
      }
    }
  }
  Tensor image_cot = staged("style backward", [&] {
    const Tensor gram_cotangent(f.target.tensor().dims(), std::move(gram_cot));
    const Tensor feature_cot = local_style_features_vjp(f.features, gram_cotangent, cfg.style);
    return m.extractor->vjp(f.image, feature_cot);
  });
  if (cfg.lambda != 0.0) {
    image_cot = image_cot + staged("encoder backward", [&] {
      return m.encoder->vjp(f.image, -cfg.lambda * ctx.anchor_embedding);
    });
  }
  Tensor grad = staged("generator backward", [&] { return m.generator->vjp(code.tensor(), image_cot); });
  return {std::move(f.loss), std::move(grad)};
}

AverageResult optimize_average(std::span<const LatentCode> codes, std::span<const Tensor> images,
                               const ObjectiveModels& models, const LossConfig& config) {
  if (codes.empty()) throw ArgumentError("optimize_average: empty cluster");
  if (codes.size() != images.size()) {
    throw ArgumentError("optimize_average: " + std::to_string(codes.size()) + " codes but " +
                        std::to_string(images.size()) + " images");
  }
  const LatentCode start = centroid(codes);
  const ObjectiveContext ctx = make_context(models, images, start, config);

  AverageResult result;
  result.trace.reserve(std::size_t(config.iterations) + 1);
  Tensor latent = start.tensor();
  AdamState state = AdamState::fresh(latent.dims());

  auto record = [&](int iteration, const LossBreakdown& loss) {
    result.trace.push_back({iteration, loss.total, loss.content, loss.style});
  };
  try {
    for (int t = 0; t < config.iterations; ++t) {
      LossGradient lg = total_loss_gradient(LatentCode(latent), ctx);
      record(t, lg.loss);
      AdamStep step = adam_step(state, lg.gradient, config.adam);
      state = std::move(step.state);
      latent = latent + step.update;
    }
    LossBreakdown last = evaluate_loss(LatentCode(latent), ctx);
    record(config.iterations, last);
    result.final_correspondences = std::move(last.correspondences);
  } catch (const NumericError& e) {
    throw OptimizationError(std::string("optimize_average diverged: ") + e.what(), result.trace);
  }
  result.code = LatentCode(std::move(latent));
  return result;
}

}  // namespace ksalsa
