#include "ksalsa/toy_data.hpp"

#include <algorithm>
#include <cmath>

#include "ksalsa/errors.hpp"
#include "ksalsa/rng.hpp"

namespace ksalsa {
namespace {

// Pattern value at (r, c) inside a cell for texture `kind`.
double texture(std::size_t kind, std::size_t r, std::size_t c) {
  switch (kind % 5) {
    case 0: return r % 2 == 0 ? 1.0 : -1.0;            // horizontal stripes
    case 1: return c % 2 == 0 ? 1.0 : -1.0;            // vertical stripes
    case 2: return (r + c) % 2 == 0 ? 1.0 : -1.0;      // checkerboard
    case 3: return (r + 2 * c) % 3 == 0 ? 1.0 : -0.5;  // diagonal
    default: return (r % 2 == 0 && c % 2 == 0) ? 1.0 : 0.0;  // dots
  }
}

}  // namespace

ToyData generate_toy_data(const Generator& generator, const ToyDataOptions& options) {
  if (options.groups == 0) throw ArgumentError("toy data needs at least one group");
  const ImageShape shape = generator.image_shape();
  if (options.texture_grid == 0 || shape.height % options.texture_grid != 0) {
    throw ArgumentError("texture grid must divide the image size");
  }
  const std::size_t side = shape.height / options.texture_grid;
  Rng root(options.seed);
  Rng proto_rng = root.split(1);

  struct Group {
    Tensor prototype;
    std::size_t texture;
    std::size_t channel;
    int grade;
  };
  std::vector<Group> groups;
  for (std::size_t g = 0; g < options.groups; ++g) {
    groups.push_back({seeded_normal(proto_rng, {generator.latent_rows(), generator.latent_width()},
                                    0.0, generator.latent_scale()),
                      g % 5, (g / 5 + g) % shape.channels,
                      static_cast<int>(g % std::size_t(options.label_max + 1))});
  }

  auto make = [&](std::size_t count, std::uint64_t first_id, Rng rng) {
    LabeledDataset ds;
    ds.profile = options.profile;
    ds.label_max = options.label_max;
    for (std::size_t i = 0; i < count; ++i) {
      const Group& group = groups[i % groups.size()];
      const Tensor latent =
          group.prototype +
          seeded_normal(rng, group.prototype.dims(), 0.0,
                        options.latent_noise * generator.latent_scale());
      std::vector<double> pixels = generator.forward(latent).vector();
      const std::size_t cells = options.texture_grid * options.texture_grid;
      std::vector<std::size_t> order(cells);
      for (std::size_t j = 0; j < cells; ++j) order[j] = j;
      for (std::size_t j = 0; j + 1 < cells; ++j) {
        std::swap(order[j], order[j + rng.below(cells - j)]);
      }
      for (std::size_t t = 0; t < std::min(options.textured_cells, cells); ++t) {
        const std::size_t r0 = (order[t] / options.texture_grid) * side;
        const std::size_t c0 = (order[t] % options.texture_grid) * side;
        const std::size_t kind = group.texture + t;
        const std::size_t channel = (group.channel + t) % shape.channels;
        for (std::size_t r = 0; r < side; ++r) {
          for (std::size_t c = 0; c < side; ++c) {
            double& px = pixels[(channel * shape.height + r0 + r) * shape.width + c0 + c];
            px = std::clamp(px + options.texture_amplitude * texture(kind, r, c), -1.0, 1.0);
          }
        }
      }
      int label = group.grade;
      if (rng.uniform() < 0.2) label = static_cast<int>(rng.below(std::uint64_t(options.label_max) + 1));
      ds.records.push_back({first_id + i, Tensor(shape.dims(), std::move(pixels)), label});
    }
    return ds;
  };
  ToyData out;
  out.members = make(options.members, 0, root.split(2));
  out.nonmembers = make(options.nonmembers, options.members, root.split(3));
  return out;
}

}  // namespace ksalsa
