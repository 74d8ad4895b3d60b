#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "ksalsa/style.hpp"

namespace ksalsa {

enum class AlignmentMode {
  kCosineArgmax,  // best-cosine target patch for each source patch
  kNone,          // patch j compares against patch j
};

AlignmentMode parse_alignment_mode(std::string_view name);
std::string to_string(AlignmentMode mode);

// For one source image: entry j is the target patch matched to source patch j.
using Correspondence = std::vector<std::size_t>;

// p x p matrix of cosine similarities between vec(A_j) and vec(B_j'). A row or
// column whose style vector has zero norm is all zeros.
Tensor cosine_matrix(const StyleSet& a, const StyleSet& b);

// Argmax ties resolve to the lowest target index.
Correspondence correspondence(const StyleSet& source, const StyleSet& target, AlignmentMode mode);

}  // namespace ksalsa
