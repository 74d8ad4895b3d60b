#include "ksalsa/config.hpp"

#include <cstdio>

#include "ksalsa/errors.hpp"
#include "ksalsa/rng.hpp"
#include "ksalsa/style.hpp"

namespace ksalsa {

AverageMethod parse_method(std::string_view name) {
  if (name == "ksalsa") return AverageMethod::kKsalsa;
  if (name == "centroid") return AverageMethod::kCentroid;
  if (name == "pixel") return AverageMethod::kPixel;
  if (name == "pca") return AverageMethod::kPca;
  throw ArgumentError("unknown method '" + std::string(name) +
                      "' (expected ksalsa, centroid, pixel or pca)");
}

std::string to_string(AverageMethod method) {
  switch (method) {
    case AverageMethod::kKsalsa: return "ksalsa";
    case AverageMethod::kCentroid: return "centroid";
    case AverageMethod::kPixel: return "pixel";
    case AverageMethod::kPca: return "pca";
  }
  return "?";
}

double resolved_lambda(const RunConfig& config) {
  if (config.lambda) return *config.lambda;
  return auto_lambda(static_cast<int>(config.k), config.lambda_schedule);
}

LossConfig loss_config(const RunConfig& config) {
  LossConfig loss;
  // Lambda only matters for the optimizing method; baselines may use any k.
  loss.lambda = config.method == AverageMethod::kKsalsa || config.lambda ? resolved_lambda(config)
                                                                         : 0.0;
  loss.style = {config.grid, config.normalize_grams};
  loss.alignment = config.alignment;
  loss.iterations = config.iterations;
  loss.adam = config.adam;
  validate(loss);
  return loss;
}

InversionOptions inversion_options(const RunConfig& config) {
  InversionOptions opts;
  opts.max_iters = config.invert_iters;
  opts.step_size = config.invert_step;
  opts.tolerance = config.invert_tolerance;
  return opts;
}

nlohmann::json canonical_json(const RunConfig& c) {
  nlohmann::json j;
  j["profile"] = c.profile;
  j["k"] = c.k;
  j["lambda"] = c.method == AverageMethod::kKsalsa || c.lambda ? nlohmann::json(resolved_lambda(c))
                                                              : nlohmann::json(nullptr);
  j["lambda_schedule"] = c.lambda_schedule;
  j["T"] = c.iterations;
  j["grid"] = c.grid;
  j["normalize_grams"] = c.normalize_grams;
  j["alignment"] = to_string(c.alignment);
  j["method"] = to_string(c.method);
  j["seed"] = c.seed;
  j["policy"] = to_string(c.policy);
  j["augment"] = {{"count", c.augment_count}, {"scale", c.augment_scale}};
  j["adam"] = {{"lr", c.adam.lr}, {"beta1", c.adam.beta1}, {"beta2", c.adam.beta2},
               {"eps", c.adam.eps}};
  j["invert"] = {{"iters", c.invert_iters}, {"step", c.invert_step},
                 {"tolerance", c.invert_tolerance}};
  j["feature_channels"] = c.feature_channels;
  j["embedding_dim"] = c.embedding_dim;
  j["pca_components"] = c.pca_components;
  return j;
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char b : bytes) {
    h ^= b;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string config_hash(const RunConfig& config) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(fnv1a64(canonical_json(config).dump())));
  return buf;
}

nlohmann::json to_json(const RunConfig& c) {
  nlohmann::json j = canonical_json(c);
  if (!c.lambda) j["lambda"] = "auto";
  j["in"] = c.in_dir;
  j["out"] = c.out_dir;
  j["jobs"] = c.jobs;
  return j;
}

void apply_json(RunConfig& c, const nlohmann::json& j) {
  if (!j.is_object()) throw ArgumentError("config file must hold a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (key == "profile") c.profile = value.get<std::string>();
    else if (key == "k") c.k = value.get<std::size_t>();
    else if (key == "lambda") {
      if (value.is_null() || (value.is_string() && value.get<std::string>() == "auto")) c.lambda.reset();
      else c.lambda = value.get<double>();
    } else if (key == "lambda_schedule") c.lambda_schedule = value.get<std::string>();
    else if (key == "T") c.iterations = value.get<int>();
    else if (key == "grid") c.grid = value.get<std::size_t>();
    else if (key == "normalize_grams") c.normalize_grams = value.get<bool>();
    else if (key == "alignment") c.alignment = parse_alignment_mode(value.get<std::string>());
    else if (key == "method") c.method = parse_method(value.get<std::string>());
    else if (key == "seed") c.seed = value.get<std::uint64_t>();
    else if (key == "policy") c.policy = parse_leftover_policy(value.get<std::string>());
    else if (key == "augment") {
      c.augment_count = value.value("count", c.augment_count);
      c.augment_scale = value.value("scale", c.augment_scale);
    } else if (key == "adam") {
      c.adam.lr = value.value("lr", c.adam.lr);
      c.adam.beta1 = value.value("beta1", c.adam.beta1);
      c.adam.beta2 = value.value("beta2", c.adam.beta2);
      c.adam.eps = value.value("eps", c.adam.eps);
    } else if (key == "invert") {
      c.invert_iters = value.value("iters", c.invert_iters);
      c.invert_step = value.value("step", c.invert_step);
      c.invert_tolerance = value.value("tolerance", c.invert_tolerance);
    } else if (key == "feature_channels") c.feature_channels = value.get<std::size_t>();
    else if (key == "embedding_dim") c.embedding_dim = value.get<std::size_t>();
    else if (key == "pca_components") c.pca_components = value.get<std::size_t>();
    else if (key == "in") c.in_dir = value.get<std::string>();
    else if (key == "out") c.out_dir = value.get<std::string>();
    else if (key == "jobs") c.jobs = value.get<std::size_t>();
    else throw ArgumentError("unknown config key '" + key + "'");
  }
}

ModelSeeds model_seeds(std::uint64_t seed) {
  const Rng root(seed);
  return {root.split(1).seed(), root.split(2).seed(), root.split(3).seed(), root.split(4).seed()};
}

ObjectiveModels build_models(const RunConfig& config) {
  const auto seeds = model_seeds(config.seed);
  auto generator = toy_generator(seeds.generator, config.profile);
  const ImageShape shape = generator->image_shape();
  return {generator, seeded_extractor(seeds.extractor, shape, config.feature_channels),
          seeded_encoder(seeds.encoder, shape, config.embedding_dim)};
}

}  // namespace ksalsa
