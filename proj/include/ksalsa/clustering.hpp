#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ksalsa/latent.hpp"

namespace ksalsa {

enum class LeftoverPolicy {
  kError,     // reject inputs whose size is not a multiple of k
  kTruncate,  // drop the final < k points and record them
};

LeftoverPolicy parse_leftover_policy(std::string_view name);
std::string to_string(LeftoverPolicy policy);

struct ClusterPartition {
  std::size_t k = 0;
  std::vector<std::vector<std::size_t>> clusters;  // in formation order
  std::vector<std::size_t> dropped;
  // seeds[c] is the outlier that started clusters[c].
  std::vector<std::size_t> seeds;
};

// Throws ArgumentError if any partition invariant fails for n inputs.
void validate(const ClusterPartition& partition, std::size_t n);

// Greedy outlier-first grouping into clusters of exactly k. Each round seeds
// on the remaining point with the largest mean distance to the other
// remaining points, then adds its k-1 nearest remaining neighbours. All ties
// go to the lowest index.
ClusterPartition same_size_clustering(std::span<const LatentCode> codes, std::size_t k,
                                      LeftoverPolicy policy = LeftoverPolicy::kError);

// {"k":..., "clusters":[[ids]...], "dropped":[ids]}; ids are dataset ids.
std::string partition_to_json(const ClusterPartition& partition,
                              std::span<const std::uint64_t> ids);
ClusterPartition partition_from_json(const std::string& text, std::span<const std::uint64_t> ids);

}  // namespace ksalsa
