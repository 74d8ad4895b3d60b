#include "ksalsa/alignment.hpp"

#include <cmath>

#include "ksalsa/errors.hpp"

namespace ksalsa {

AlignmentMode parse_alignment_mode(std::string_view name) {
  if (name == "cosine-argmax") return AlignmentMode::kCosineArgmax;
  if (name == "none") return AlignmentMode::kNone;
  throw ArgumentError("unknown alignment mode '" + std::string(name) +
                      "' (expected cosine-argmax or none)");
}

std::string to_string(AlignmentMode mode) {
  return mode == AlignmentMode::kNone ? "none" : "cosine-argmax";
}

namespace {

// Rows of the p x c^2 matrix of style vectors, scaled to unit length.
std::vector<double> unit_rows(const StyleSet& s) {
  const std::size_t p = s.patches();
  const std::size_t width = s.channels() * s.channels();
  std::vector<double> rows(s.tensor().vector());
  for (std::size_t j = 0; j < p; ++j) {
    double* row = rows.data() + j * width;
    double norm = std::sqrt(squared_norm({row, width}));
    const double inv = norm > 0.0 ? 1.0 / norm : 0.0;
    for (std::size_t k = 0; k < width; ++k) row[k] *= inv;
  }
  return rows;
}

}  // namespace

Tensor cosine_matrix(const StyleSet& a, const StyleSet& b) {
  if (!a.compatible(b)) {
    throw ArgumentError("cosine_matrix: style sets differ in shape (" +
                        dims_to_string(a.tensor().dims()) + " vs " +
                        dims_to_string(b.tensor().dims()) + ")");
  }
  const std::size_t p = a.patches();
  const std::size_t width = a.channels() * a.channels();
  const auto ua = unit_rows(a);
  const auto ub = unit_rows(b);
  std::vector<double> sim(p * p);
  for (std::size_t j = 0; j < p; ++j) {
    for (std::size_t k = 0; k < p; ++k) {
      sim[j * p + k] = dot({ua.data() + j * width, width}, {ub.data() + k * width, width});
    }
  }
  return Tensor({p, p}, std::move(sim));
}

Correspondence correspondence(const StyleSet& source, const StyleSet& target, AlignmentMode mode) {
  if (!source.compatible(target)) {
    throw ArgumentError("correspondence: style sets differ in shape");
  }
  const std::size_t p = source.patches();
  Correspondence out(p);
  if (mode == AlignmentMode::kNone) {
    for (std::size_t j = 0; j < p; ++j) out[j] = j;
    return out;
  }
  const Tensor sim = cosine_matrix(source, target);
  for (std::size_t j = 0; j < p; ++j) {
    std::size_t best = 0;
    for (std::size_t k = 1; k < p; ++k) {
      if (sim[j * p + k] > sim[j * p + best]) best = k;
    }
    out[j] = best;
  }
  return out;
}

}  // namespace ksalsa
