#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ksalsa/adam.hpp"
#include "ksalsa/alignment.hpp"
#include "ksalsa/errors.hpp"
#include "ksalsa/generator.hpp"
#include "ksalsa/style.hpp"

namespace ksalsa {

// Fixed affine map from an image to an e-dimensional embedding, followed by
// L2 normalization. A zero pre-normalization embedding maps to zero.
class ContentEncoder final : public DiffOp {
 public:
  // weights: e x (C*H*W), bias: e.
  ContentEncoder(ImageShape input, Tensor weights, Tensor bias);

  Tensor forward(const Tensor& image) const override;
  Tensor vjp(const Tensor& image, const Tensor& cotangent) const override;

  std::size_t dimension() const { return weights_.dim(0); }
  ImageShape input_shape() const { return input_; }

  // Affine part only.
  Tensor raw_embedding(const Tensor& image) const;

 private:
  ImageShape input_;
  Tensor weights_;
  Tensor bias_;
};

std::shared_ptr<const ContentEncoder> seeded_encoder(std::uint64_t seed, ImageShape input,
                                                     std::size_t dimension = 16);

// The frozen networks the objective differentiates through.
struct ObjectiveModels {
  std::shared_ptr<const Generator> generator;
  std::shared_ptr<const FeatureExtractor> extractor;
  std::shared_ptr<const ContentEncoder> encoder;
};

struct LossConfig {
  // Weight of the content term; the style term gets 1 - lambda.
  double lambda = 0.05;
  StyleOptions style;
  AlignmentMode alignment = AlignmentMode::kCosineArgmax;
  int iterations = 50;
  AdamOptions adam;
};

void validate(const LossConfig& config);

// Per-k lambda schedules. "aptos": k=2,5,10 -> 0.1, 0.05, 0.03.
// "eyepacs": k=2,5,10 -> 0.01, 0.02, 0.01. Other k have no entry.
double auto_lambda(int k, std::string_view schedule = "aptos");

// 1 - <anchor, candidate> for unit embeddings.
double content_loss(const Tensor& anchor, const Tensor& candidate);

// sum_i sum_j ||S_i,j - T_{a(i,j)}||_F^2.
double style_loss(std::span<const StyleSet> sources, const StyleSet& target,
                  std::span<const Correspondence> correspondences);

// Everything total_loss depends on besides the latent being optimized.
struct ObjectiveContext {
  ObjectiveModels models;
  std::vector<StyleSet> source_styles;
  Tensor anchor_embedding;  // F(G(w0)), constant during optimization
  LossConfig config;
};

// Source styles come from the original images; the anchor is F(G(w0)).
ObjectiveContext make_context(const ObjectiveModels& models, std::span<const Tensor> images,
                              const LatentCode& anchor_code, const LossConfig& config);

struct LossBreakdown {
  double total = 0.0;
  double content = 0.0;
  double style = 0.0;
  std::vector<Correspondence> correspondences;
};

// lambda * content + (1 - lambda) * style, with correspondences recomputed
// against the current target styles.
LossBreakdown evaluate_loss(const LatentCode& code, const ObjectiveContext& context);
double total_loss(const LatentCode& code, const ObjectiveContext& context);

struct LossGradient {
  LossBreakdown loss;
  Tensor gradient;  // latent-shaped
};

// Reverse-mode chain through Grams, extractor, encoder and generator. The
// correspondences are held fixed at their values for `code`.
LossGradient total_loss_gradient(const LatentCode& code, const ObjectiveContext& context);

struct TraceEntry {
  int iteration = 0;
  double total = 0.0;
  double content = 0.0;
  double style = 0.0;
};

struct AverageResult {
  LatentCode code;
  std::vector<TraceEntry> trace;  // iteration 0 is w0; one entry per iterate
  std::vector<Correspondence> final_correspondences;
};

// Raised when the loss turns non-finite; carries the trace so far.
class OptimizationError : public DivergenceError {
 public:
  OptimizationError(const std::string& what, std::vector<TraceEntry> trace)
      : DivergenceError(what), trace_(std::move(trace)) {}
  const std::vector<TraceEntry>& trace() const { return trace_; }

 private:
  std::vector<TraceEntry> trace_;
};

// Starts at the centroid of the codes and runs config.iterations Adam steps.
AverageResult optimize_average(std::span<const LatentCode> codes, std::span<const Tensor> images,
                               const ObjectiveModels& models, const LossConfig& config);

}  // namespace ksalsa
