#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "ksalsa/rng.hpp"
#include "ksalsa/tensor.hpp"

namespace ksalsa {

// A point in the generator's extended latent space: an L x d matrix.
class LatentCode {
 public:
  LatentCode() = default;
  explicit LatentCode(Tensor matrix);
  static LatentCode zeros(std::size_t rows, std::size_t width);

  std::size_t rows() const { return matrix_.dim(0); }
  std::size_t width() const { return matrix_.dim(1); }
  std::size_t size() const { return matrix_.size(); }
  const Tensor& tensor() const { return matrix_; }
  std::span<const double> values() const { return matrix_.values(); }

  bool same_shape(const LatentCode& other) const { return matrix_.same_shape(other.matrix_); }

  friend bool operator==(const LatentCode&, const LatentCode&) = default;

 private:
  Tensor matrix_;
};

// Elementwise mean of the codes.
LatentCode centroid(std::span<const LatentCode> codes);

// Euclidean norm of the flattened difference.
double latent_distance(const LatentCode& a, const LatentCode& b);

// `count` noisy views of `code`, each with i.i.d. N(0, scale^2) noise.
std::vector<LatentCode> augment(const LatentCode& code, double scale, int count, Rng& rng);

// Codes persist as a KSTN file plus a sidecar JSON {"L", "d", "source_id"}.
void save_latent(const std::filesystem::path& path, const LatentCode& code,
                 const std::string& source_id);
LatentCode load_latent(const std::filesystem::path& path);

}  // namespace ksalsa
