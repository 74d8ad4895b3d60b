#include "ksalsa/latent.hpp"

#include <cmath>
#include <json.hpp>

#include "ksalsa/codec.hpp"
#include "ksalsa/errors.hpp"

namespace ksalsa {

LatentCode::LatentCode(Tensor matrix) : matrix_(std::move(matrix)) {
  if (matrix_.rank() != 2) {
    throw ArgumentError("latent code must be an L x d matrix, got dims " +
                        dims_to_string(matrix_.dims()));
  }
}

LatentCode LatentCode::zeros(std::size_t rows, std::size_t width) {
  return LatentCode(Tensor::zeros({rows, width}));
}

LatentCode centroid(std::span<const LatentCode> codes) {
  if (codes.empty()) throw ArgumentError("centroid of an empty list");
  const auto& first = codes.front();
  std::vector<double> sum(first.size(), 0.0);
  for (const auto& code : codes) {
    if (!code.same_shape(first)) throw ArgumentError("centroid: latent codes differ in shape");
    const auto v = code.values();
    for (std::size_t i = 0; i < sum.size(); ++i) sum[i] += v[i];
  }
  const double inv = 1.0 / static_cast<double>(codes.size());
  for (double& s : sum) s *= inv;
  return LatentCode(Tensor(first.tensor().dims(), std::move(sum)));
}

double latent_distance(const LatentCode& a, const LatentCode& b) {
  if (!a.same_shape(b)) throw ArgumentError("latent_distance: shape mismatch");
  const auto x = a.values();
  const auto y = b.values();
  double acc = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d = x[i] - y[i];
    acc += d * d;
  }
  return std::sqrt(acc);
}

std::vector<LatentCode> augment(const LatentCode& code, double scale, int count, Rng& rng) {
  if (!(scale >= 0.0) || !std::isfinite(scale)) throw ArgumentError("augment: scale must be >= 0");
  if (count < 1) throw ArgumentError("augment: count must be >= 1");
  std::vector<LatentCode> views;
  views.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    const Tensor noise = seeded_normal(rng, code.tensor().dims(), 0.0, scale);
    views.emplace_back(code.tensor() + noise);
  }
  return views;
}

namespace {
std::filesystem::path sidecar_path(const std::filesystem::path& path) {
  auto side = path;
  side += ".json";
  return side;
}
}  // namespace

void save_latent(const std::filesystem::path& path, const LatentCode& code,
                 const std::string& source_id) {
  save_tensor(path, code.tensor());
  const nlohmann::json meta = {{"L", code.rows()}, {"d", code.width()}, {"source_id", source_id}};
  write_file(sidecar_path(path), meta.dump() + "\n");
}

LatentCode load_latent(const std::filesystem::path& path) {
  LatentCode code(load_tensor(path));
  const auto side = sidecar_path(path);
  if (std::filesystem::exists(side)) {
    const auto meta = nlohmann::json::parse(read_file(side));
    if (meta.at("L").get<std::size_t>() != code.rows() ||
        meta.at("d").get<std::size_t>() != code.width()) {
      throw CorruptionError("latent sidecar shape disagrees with " + path.string());
    }
  }
  return code;
}

}  // namespace ksalsa
