#pragma once

#include <cstdint>
#include <string>

#include "ksalsa/dataset.hpp"
#include "ksalsa/generator.hpp"

namespace ksalsa {

struct ToyDataOptions {
  std::string profile = "toy-16";
  std::size_t members = 60;
  std::size_t nonmembers = 0;
  std::size_t groups = 6;
  int label_max = 4;
  std::uint64_t seed = 0;
  // Spread of records around their group prototype, in units of the
  // generator's latent scale.
  double latent_noise = 0.35;
  double texture_amplitude = 1.5;
  // Texture cells per image edge; 4 matches the default style grid.
  std::size_t texture_grid = 4;
  // Cells per image that receive a texture, at record-specific positions.
  std::size_t textured_cells = 16;
};

struct ToyData {
  LabeledDataset members;
  LabeledDataset nonmembers;  // ids continue after the members'
};

// Records are G(prototype + noise) for a per-group prototype. Textures
// (stripes, checkerboard, ...) are added to `textured_cells` grid cells in a
// record-specific shuffled order, then clamped to [-1, 1]. The sequence of
// texture kinds and channels is fixed per group, so records of one group
// share local styles at different positions. Each group has its own grade;
// 20% of labels are redrawn uniformly.
ToyData generate_toy_data(const Generator& generator, const ToyDataOptions& options);

}  // namespace ksalsa
