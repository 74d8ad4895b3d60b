#include <gtest/gtest.h>

#include <algorithm>
#include <set>

#include "ksalsa/clustering.hpp"
#include "ksalsa/errors.hpp"
#include "ksalsa/rng.hpp"
#include "oracles.hpp"

using namespace ksalsa;

namespace {

std::vector<LatentCode> to_codes(const std::vector<std::vector<double>>& pts) {
  std::vector<LatentCode> out;
  for (const auto& p : pts) out.emplace_back(Tensor({1, p.size()}, p));
  return out;
}

std::vector<std::vector<double>> random_points(std::uint64_t seed, std::size_t n, std::size_t d) {
  Rng rng(seed);
  std::vector<std::vector<double>> pts(n, std::vector<double>(d));
  for (auto& p : pts) {
    for (double& v : p) v = rng.normal();
  }
  return pts;
}

std::set<std::set<std::size_t>> as_sets(const std::vector<std::vector<std::size_t>>& clusters) {
  std::set<std::set<std::size_t>> out;
  for (const auto& c : clusters) out.emplace(c.begin(), c.end());
  return out;
}

}  // namespace

TEST(Clustering, TwoTriples) {
  const std::vector<std::vector<double>> pts{{0, 0}, {10, 10}, {0.5, 0}, {10, 10.4}, {0, 0.3},
                                             {9.8, 10}};
  const auto part = same_size_clustering(to_codes(pts), 3);
  ASSERT_EQ(part.clusters.size(), 2u);
  EXPECT_EQ(as_sets(part.clusters), (std::set<std::set<std::size_t>>{{0, 2, 4}, {1, 3, 5}}));
  const auto ref = oracle::greedy_reference(pts, 3);
  for (std::size_t c = 0; c < 2; ++c) {
    EXPECT_EQ(part.clusters[c], ref[c].members);
    EXPECT_EQ(part.seeds[c], ref[c].seed);
  }
}

TEST(Clustering, MatchesGreedyReference) {
  for (std::uint64_t s = 0; s < 60; ++s) {
    const std::size_t k = 2 + s % 3;
    const std::size_t n = k * (1 + s % 4);
    const auto pts = random_points(s, n, 3);
    const auto part = same_size_clustering(to_codes(pts), k);
    const auto ref = oracle::greedy_reference(pts, k);
    ASSERT_EQ(part.clusters.size(), ref.size());
    for (std::size_t c = 0; c < ref.size(); ++c) {
      EXPECT_EQ(part.clusters[c], ref[c].members) << "seed " << s << " round " << c;
      EXPECT_EQ(part.seeds[c], ref[c].seed);
    }
    EXPECT_NO_THROW(validate(part, n));
  }
}

TEST(Clustering, FirstSeedIsGlobalOutlier) {
  const auto pts = random_points(99, 12, 4);
  const auto part = same_size_clustering(to_codes(pts), 3);
  std::size_t best = 0;
  double best_avg = -1;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    double sum = 0;
    for (std::size_t j = 0; j < pts.size(); ++j) sum += oracle::euclid(pts[i], pts[j]);
    if (sum / 11.0 > best_avg) {
      best_avg = sum / 11.0;
      best = i;
    }
  }
  EXPECT_EQ(part.seeds[0], best);
}

TEST(Clustering, NEqualsK) {
  const auto part = same_size_clustering(to_codes(random_points(1, 4, 2)), 4);
  ASSERT_EQ(part.clusters.size(), 1u);
  EXPECT_EQ(part.clusters[0], (std::vector<std::size_t>{0, 1, 2, 3}));
}

TEST(Clustering, KEqualsOneGivesSingletonsInOutlierOrder) {
  const auto pts = random_points(2, 7, 2);
  const auto part = same_size_clustering(to_codes(pts), 1);
  ASSERT_EQ(part.clusters.size(), 7u);
  const auto ref = oracle::greedy_reference(pts, 1);
  for (std::size_t c = 0; c < 7; ++c) {
    EXPECT_EQ(part.clusters[c], (std::vector<std::size_t>{ref[c].seed}));
  }
}

TEST(Clustering, LeftoverPolicies) {
  const auto codes = to_codes(random_points(3, 20, 2));
  try {
    same_size_clustering(codes, 7);
    FAIL() << "expected SizeError";
  } catch (const SizeError& e) {
    EXPECT_NE(std::string(e.what()).find("remainder 6"), std::string::npos);
  }
  const auto part = same_size_clustering(codes, 7, LeftoverPolicy::kTruncate);
  EXPECT_EQ(part.clusters.size(), 2u);
  EXPECT_EQ(part.dropped.size(), 6u);
  EXPECT_NO_THROW(validate(part, 20));
}

TEST(Clustering, ArgumentErrors) {
  const auto codes = to_codes(random_points(4, 3, 2));
  EXPECT_THROW(same_size_clustering(codes, 0), ArgumentError);
  EXPECT_THROW(same_size_clustering(codes, 4), ArgumentError);
  EXPECT_THROW(parse_leftover_policy("keep"), ArgumentError);
}

TEST(Clustering, TiesBreakToLowestIndex) {
  // Integer distances on a line, so sums tie exactly. Points 0 and 1 share
  // the largest mean distance; points 2 and 3 tie as nearest to point 0.
  const std::vector<std::vector<double>> pts{{-3}, {3}, {0}, {0}};
  const auto part = same_size_clustering(to_codes(pts), 2);
  EXPECT_EQ(part.seeds[0], 0u);
  EXPECT_EQ(part.clusters[0], (std::vector<std::size_t>{0, 2}));
  EXPECT_EQ(part.clusters[1], (std::vector<std::size_t>{1, 3}));
}

TEST(Clustering, PermutationInvariantAsSets) {
  for (std::uint64_t s = 0; s < 10; ++s) {
    const auto pts = random_points(50 + s, 12, 3);
    const auto base = same_size_clustering(to_codes(pts), 3);
    std::vector<std::size_t> perm(pts.size());
    for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = (i * 5 + 3) % perm.size();
    std::vector<std::vector<double>> shuffled;
    for (std::size_t i : perm) shuffled.push_back(pts[i]);
    const auto moved = same_size_clustering(to_codes(shuffled), 3);
    std::vector<std::vector<std::size_t>> mapped;
    for (const auto& c : moved.clusters) {
      std::vector<std::size_t> orig;
      for (std::size_t i : c) orig.push_back(perm[i]);
      mapped.push_back(orig);
    }
    EXPECT_EQ(as_sets(mapped), as_sets(base.clusters));
  }
}

TEST(Clustering, Deterministic) {
  const auto codes = to_codes(random_points(6, 15, 4));
  const auto a = same_size_clustering(codes, 5), b = same_size_clustering(codes, 5);
  EXPECT_EQ(a.clusters, b.clusters);
  EXPECT_EQ(a.seeds, b.seeds);
}

TEST(Clustering, JsonRoundTripUsesIds) {
  const auto codes = to_codes(random_points(7, 6, 2));
  const auto part = same_size_clustering(codes, 2);
  const std::vector<std::uint64_t> ids{10, 11, 12, 13, 14, 15};
  const std::string text = partition_to_json(part, ids);
  EXPECT_NE(text.find("\"k\":2"), std::string::npos);
  const auto back = partition_from_json(text, ids);
  EXPECT_EQ(back.clusters, part.clusters);
  EXPECT_EQ(back.k, 2u);
  EXPECT_THROW(partition_from_json(text, std::vector<std::uint64_t>{1, 2, 3, 4, 5, 6}),
               ArgumentError);
}

TEST(Clustering, ValidateCatchesBrokenPartitions) {
  ClusterPartition p;
  p.k = 2;
  p.clusters = {{0, 1}, {1, 2}};
  EXPECT_THROW(validate(p, 4), ArgumentError);
  p.clusters = {{0, 1}, {2}};
  EXPECT_THROW(validate(p, 3), ArgumentError);
  p.clusters = {{0, 1}};
  EXPECT_THROW(validate(p, 3), ArgumentError);
}
