#include "ksalsa/gradcheck.hpp"

#include <cmath>
#include <limits>

#include "ksalsa/errors.hpp"

namespace ksalsa {
namespace {

// Smallest gap between the best and runner-up cosine over all source patches.
double argmax_margin(const ObjectiveContext& ctx, const StyleSet& target) {
  if (ctx.config.alignment == AlignmentMode::kNone) return std::numeric_limits<double>::infinity();
  double margin = std::numeric_limits<double>::infinity();
  for (const auto& source : ctx.source_styles) {
    const Tensor sim = cosine_matrix(source, target);
    const std::size_t p = source.patches();
    for (std::size_t j = 0; j < p; ++j) {
      double best = -2.0, second = -2.0;
      for (std::size_t k = 0; k < p; ++k) {
        const double s = sim[j * p + k];
        if (s > best) {
          second = best;
          best = s;
        } else if (s > second) {
          second = s;
        }
      }
      margin = std::min(margin, best - second);
    }
  }
  return margin;
}

}  // namespace

GradientAudit audit_total_loss_gradient(const ObjectiveModels& models, const LossConfig& config,
                                        std::size_t k, std::uint64_t seed, double h, double margin) {
  if (k == 0) throw ArgumentError("gradient audit needs k >= 1");
  const auto& gen = *models.generator;
  const Tensor::Dims latent_dims{gen.latent_rows(), gen.latent_width()};
  const double scale = gen.latent_scale();
  Rng rng(seed);
  std::vector<LatentCode> codes;
  std::vector<Tensor> images;
  for (std::size_t i = 0; i < k; ++i) {
    codes.emplace_back(seeded_normal(rng, latent_dims, 0.0, scale));
    images.push_back(gen.generate(codes.back()));
  }
  const LatentCode start = centroid(codes);
  const ObjectiveContext ctx = make_context(models, images, start, config);

  GradientAudit audit;
  for (;; ++audit.resamples) {
    if (audit.resamples > 200) {
      throw NumericError("gradient audit could not find a point away from kinks and ties");
    }
    const LatentCode point(start.tensor() + seeded_normal(rng, latent_dims, 0.0, 0.3 * scale));
    const Tensor image = gen.generate(point);
    const Tensor pre = models.extractor->preactivation(image);
    double kink = std::numeric_limits<double>::infinity();
    for (double v : pre.values()) kink = std::min(kink, std::abs(v));
    if (kink < margin) continue;
    const StyleSet target = local_style_features(models.extractor->forward(image), config.style);
    if (argmax_margin(ctx, target) < margin) continue;

    const Tensor analytic = total_loss_gradient(point, ctx).gradient;
    const Tensor numeric = finite_diff_gradient(
        [&](const Tensor& w) { return total_loss(LatentCode(w), ctx); }, point.tensor(), h);
    audit.relative_error = relative_l2_error(analytic, numeric);
    audit.gradient_norm = std::sqrt(squared_norm(numeric.values()));
    return audit;
  }
}

}  // namespace ksalsa
