#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include <json.hpp>

#include "ksalsa/adam.hpp"
#include "ksalsa/alignment.hpp"
#include "ksalsa/clustering.hpp"
#include "ksalsa/generator.hpp"
#include "ksalsa/objective.hpp"

namespace ksalsa {

enum class AverageMethod { kKsalsa, kCentroid, kPixel, kPca };

AverageMethod parse_method(std::string_view name);
std::string to_string(AverageMethod method);

// Everything that determines a release. Paths and job counts are carried
// alongside but do not enter the hash, so the same settings reproduce the
// same bytes wherever they run.
struct RunConfig {
  std::string profile = "toy-16";
  std::size_t k = 5;
  std::optional<double> lambda;  // unset means "auto"
  std::string lambda_schedule = "aptos";
  int iterations = 50;
  std::size_t grid = 4;
  bool normalize_grams = false;
  AlignmentMode alignment = AlignmentMode::kCosineArgmax;
  AverageMethod method = AverageMethod::kKsalsa;
  std::uint64_t seed = 0;
  LeftoverPolicy policy = LeftoverPolicy::kError;
  int augment_count = 0;
  double augment_scale = 0.0;
  AdamOptions adam;
  int invert_iters = 2000;
  double invert_step = 0.5;
  double invert_tolerance = 1e-12;
  std::size_t feature_channels = 8;
  std::size_t embedding_dim = 16;
  std::size_t pca_components = 0;  // 0 picks min(n - 1, 16)

  std::string in_dir;
  std::string out_dir;
  std::size_t jobs = 0;  // 0 = available parallelism
};

double resolved_lambda(const RunConfig& config);
LossConfig loss_config(const RunConfig& config);
InversionOptions inversion_options(const RunConfig& config);

// Canonical JSON of the hashed fields, keys sorted, lambda resolved.
nlohmann::json canonical_json(const RunConfig& config);
// 16 hex digits of FNV-1a 64 over canonical_json(config).dump().
std::string config_hash(const RunConfig& config);

// Full config, including paths, for --config files. Unknown keys are errors.
nlohmann::json to_json(const RunConfig& config);
void apply_json(RunConfig& config, const nlohmann::json& j);

std::uint64_t fnv1a64(std::string_view bytes);

// Seeds for the frozen models, derived from one master seed.
struct ModelSeeds {
  std::uint64_t generator;
  std::uint64_t extractor;
  std::uint64_t encoder;
  std::uint64_t augment;
};
ModelSeeds model_seeds(std::uint64_t seed);

ObjectiveModels build_models(const RunConfig& config);

}  // namespace ksalsa
