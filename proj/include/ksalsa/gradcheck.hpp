#pragma once

#include <cstdint>

#include "ksalsa/objective.hpp"

namespace ksalsa {

struct GradientAudit {
  double relative_error = 0.0;  // ||analytic - numeric|| / ||numeric||
  double gradient_norm = 0.0;
  int resamples = 0;  // points rejected for sitting near a kink or argmax tie
};

// Builds a seeded cluster of k images from random latents, then compares
// total_loss_gradient against central differences at a point near the
// cluster centroid. Points within `margin` of a ReLU kink or of an argmax
// tie are re-drawn, since neither function is differentiable there.
GradientAudit audit_total_loss_gradient(const ObjectiveModels& models, const LossConfig& config,
                                        std::size_t k, std::uint64_t seed, double h = 1e-5,
                                        double margin = 1e-4);

}  // namespace ksalsa
