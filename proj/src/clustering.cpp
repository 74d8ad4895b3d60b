#include "ksalsa/clustering.hpp"

#include <algorithm>
#include <json.hpp>
#include <numeric>
#include <unordered_map>

#include "ksalsa/errors.hpp"

namespace ksalsa {

LeftoverPolicy parse_leftover_policy(std::string_view name) {
  if (name == "error") return LeftoverPolicy::kError;
  if (name == "truncate") return LeftoverPolicy::kTruncate;
  throw ArgumentError("unknown leftover policy '" + std::string(name) +
                      "' (expected error or truncate)");
}

std::string to_string(LeftoverPolicy policy) {
  return policy == LeftoverPolicy::kTruncate ? "truncate" : "error";
}

void validate(const ClusterPartition& partition, std::size_t n) {
  std::vector<int> seen(n, 0);
  auto mark = [&](std::size_t idx) {
    if (idx >= n) throw ArgumentError("partition index " + std::to_string(idx) + " out of range");
    if (seen[idx]++) throw ArgumentError("partition index " + std::to_string(idx) + " repeated");
  };
  for (const auto& cluster : partition.clusters) {
    if (cluster.size() != partition.k) {
      throw ArgumentError("partition cluster has " + std::to_string(cluster.size()) +
                          " members, expected " + std::to_string(partition.k));
    }
    for (std::size_t idx : cluster) mark(idx);
  }
  for (std::size_t idx : partition.dropped) mark(idx);
  for (std::size_t i = 0; i < n; ++i) {
    if (!seen[i]) throw ArgumentError("partition misses index " + std::to_string(i));
  }
}

ClusterPartition same_size_clustering(std::span<const LatentCode> codes, std::size_t k,
                                      LeftoverPolicy policy) {
  const std::size_t n = codes.size();
  if (k < 1) throw ArgumentError("k must be >= 1");
  if (n < k) {
    throw ArgumentError("need at least k=" + std::to_string(k) + " codes, got " + std::to_string(n));
  }
  const std::size_t leftover = n % k;
  if (leftover != 0 && policy == LeftoverPolicy::kError) {
    throw SizeError(std::to_string(n) + " records do not split into groups of k=" +
                    std::to_string(k) + ": remainder " + std::to_string(leftover) +
                    " (use the truncate policy to drop them)");
  }

  std::vector<double> dist(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      dist[i * n + j] = dist[j * n + i] = latent_distance(codes[i], codes[j]);
    }
  }

  ClusterPartition out;
  out.k = k;
  std::vector<std::size_t> remaining(n);
  std::iota(remaining.begin(), remaining.end(), std::size_t{0});

  while (remaining.size() >= k) {
    // Mean distance to the other remaining points; the divisor is shared, so
    // comparing sums selects the same seed.
    std::size_t seed = remaining.front();
    double best = -1.0;
    for (std::size_t i : remaining) {
      double sum = 0.0;
      for (std::size_t j : remaining) sum += dist[i * n + j];
      if (sum > best) {
        best = sum;
        seed = i;
      }
    }
    std::vector<std::size_t> others;
    others.reserve(remaining.size() - 1);
    for (std::size_t j : remaining) {
      if (j != seed) others.push_back(j);
    }
    std::stable_sort(others.begin(), others.end(), [&](std::size_t a, std::size_t b) {
      return dist[seed * n + a] < dist[seed * n + b];
    });
    std::vector<std::size_t> cluster{seed};
    cluster.insert(cluster.end(), others.begin(), others.begin() + std::ptrdiff_t(k - 1));
    std::sort(cluster.begin(), cluster.end());
    std::erase_if(remaining, [&](std::size_t idx) {
      return std::binary_search(cluster.begin(), cluster.end(), idx);
    });
    out.seeds.push_back(seed);
    out.clusters.push_back(std::move(cluster));
  }
  out.dropped = remaining;
  return out;
}

std::string partition_to_json(const ClusterPartition& partition,
                              std::span<const std::uint64_t> ids) {
  nlohmann::ordered_json j;
  j["k"] = partition.k;
  auto& clusters = j["clusters"] = nlohmann::ordered_json::array();
  for (const auto& cluster : partition.clusters) {
    auto arr = nlohmann::ordered_json::array();
    for (std::size_t idx : cluster) arr.push_back(ids[idx]);
    clusters.push_back(std::move(arr));
  }
  auto& dropped = j["dropped"] = nlohmann::ordered_json::array();
  for (std::size_t idx : partition.dropped) dropped.push_back(ids[idx]);
  return j.dump() + "\n";
}

ClusterPartition partition_from_json(const std::string& text, std::span<const std::uint64_t> ids) {
  std::unordered_map<std::uint64_t, std::size_t> index;
  for (std::size_t i = 0; i < ids.size(); ++i) index.emplace(ids[i], i);
  auto lookup = [&](std::uint64_t id) {
    auto it = index.find(id);
    if (it == index.end()) throw ArgumentError("partition refers to unknown id " + std::to_string(id));
    return it->second;
  };
  const auto j = nlohmann::json::parse(text);
  ClusterPartition out;
  out.k = j.at("k").get<std::size_t>();
  for (const auto& cluster : j.at("clusters")) {
    std::vector<std::size_t> members;
    for (const auto& id : cluster) members.push_back(lookup(id.get<std::uint64_t>()));
    out.clusters.push_back(std::move(members));
  }
  for (const auto& id : j.at("dropped")) out.dropped.push_back(lookup(id.get<std::uint64_t>()));
  validate(out, ids.size());
  return out;
}

}  // namespace ksalsa
