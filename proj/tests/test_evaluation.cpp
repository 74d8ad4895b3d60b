#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "ksalsa/errors.hpp"
#include "ksalsa/evaluation.hpp"
#include "ksalsa/objective.hpp"
#include "ksalsa/rng.hpp"
#include "oracles.hpp"

using namespace ksalsa;

namespace {

GaussianFit random_fit(std::uint64_t seed, std::size_t e) {
  Rng rng(seed);
  std::vector<Tensor> samples;
  for (std::size_t i = 0; i < 3 * e; ++i) samples.push_back(seeded_normal(rng, {e}, 0.3, 1.5));
  return fit_gaussian(samples);
}

GaussianFit scalar_fit(double mu, double var) {
  return {Tensor({1}, {mu}), Tensor({1, 1}, {var})};
}

Candidate member(std::uint64_t id, std::size_t cluster) {
  return {id, Tensor({1}, {double(id)}), true, cluster};
}

Candidate outsider(std::uint64_t id) { return {id, Tensor({1}, {double(id)}), false, {}}; }

// k members per cluster followed by `outsiders` non-members.
MiaInstance instance(std::size_t clusters, std::size_t k, std::size_t outsiders) {
  MiaInstance inst;
  inst.k = k;
  std::uint64_t id = 0;
  for (std::size_t c = 0; c < clusters; ++c) {
    inst.averages.push_back(Tensor({1}, {double(c)}));
    for (std::size_t i = 0; i < k; ++i) inst.pool.push_back(member(id++, c));
  }
  for (std::size_t i = 0; i < outsiders; ++i) inst.pool.push_back(outsider(id++));
  return inst;
}

}  // namespace

TEST(Frechet, IdenticalFitsZero) {
  const auto f = random_fit(1, 6);
  EXPECT_NEAR(frechet_distance(f, f), 0.0, 1e-8);
}

TEST(Frechet, EqualCovarianceIsMeanGap) {
  const auto f = random_fit(2, 5);
  std::vector<double> shifted = f.mean.vector();
  double gap = 0;
  for (std::size_t i = 0; i < shifted.size(); ++i) {
    const double d = 0.1 * double(i + 1);
    shifted[i] += d;
    gap += d * d;
  }
  const GaussianFit g{Tensor(f.mean.dims(), shifted), f.covariance};
  EXPECT_NEAR(frechet_distance(f, g), gap, 1e-8);
}

TEST(Frechet, ScalarClosedForm) {
  Rng rng(3);
  for (int i = 0; i < 50; ++i) {
    const double m1 = rng.normal(), m2 = rng.normal();
    const double s1 = 0.1 + rng.uniform() * 2, s2 = 0.1 + rng.uniform() * 2;
    const double expect = (m1 - m2) * (m1 - m2) + (s1 - s2) * (s1 - s2);
    EXPECT_NEAR(frechet_distance(scalar_fit(m1, s1 * s1), scalar_fit(m2, s2 * s2)), expect, 1e-8);
  }
}

TEST(Frechet, SymmetricAndNonNegative) {
  for (std::uint64_t s = 0; s < 10; ++s) {
    const auto a = random_fit(10 + s, 4), b = random_fit(20 + s, 4);
    const double ab = frechet_distance(a, b), ba = frechet_distance(b, a);
    EXPECT_NEAR(ab, ba, 1e-8);
    EXPECT_GE(ab, -1e-8);
  }
}

TEST(Frechet, DimensionMismatch) {
  EXPECT_THROW(frechet_distance(random_fit(1, 3), random_fit(1, 4)), ArgumentError);
}

TEST(Gaussian, UnbiasedCovarianceAndRidge) {
  const std::vector<Tensor> samples{Tensor({2}, {0, 0}), Tensor({2}, {2, 0}), Tensor({2}, {1, 3})};
  const auto f = fit_gaussian(samples);
  EXPECT_NEAR(f.mean[0], 1.0, 1e-15);
  EXPECT_NEAR(f.mean[1], 1.0, 1e-15);
  EXPECT_NEAR(f.covariance[0], 1.0, 1e-12);  // var of {0, 2, 1}
  EXPECT_NEAR(f.covariance[3], 3.0, 1e-12);  // var of {0, 0, 3}
  EXPECT_NEAR(f.covariance[1], 0.0, 1e-12);
  // Two samples in two dimensions: the ridge is added.
  const auto g = fit_gaussian(std::vector<Tensor>{Tensor({2}, {0, 0}), Tensor({2}, {2, 0})});
  EXPECT_NEAR(g.covariance[3], kCovarianceRidge, 1e-18);
}

TEST(Gaussian, SymmetrizeIsIdempotent) {
  const Tensor m = oracle::random_tensor(4, {3, 3});
  const Tensor s = symmetrize(m);
  EXPECT_EQ(symmetrize(s), s);
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t j = 0; j < 3; ++j) EXPECT_EQ(s[i * 3 + j], s[j * 3 + i]);
  }
}

TEST(Rank, AverageRanksItselfFirst) {
  const auto enc = seeded_encoder(1, {3, 4, 4}, 8);
  const Tensor avg = oracle::random_tensor(2, {3, 4, 4});
  std::vector<Candidate> pool;
  for (std::uint64_t i = 0; i < 6; ++i) {
    pool.push_back({i, oracle::random_tensor(10 + i, {3, 4, 4}), false, {}});
  }
  pool.push_back({99, avg, false, {}});
  const auto order = rank_candidates({0, &avg}, pool, cosine_scorer(enc));
  EXPECT_EQ(order.front(), 99u);
}

TEST(Rank, ConstantScorerGivesIdOrder) {
  const Tensor avg({1}, {0});
  const std::vector<Candidate> pool{outsider(5), outsider(2), outsider(9), outsider(1)};
  const auto order = rank_candidates({0, &avg}, pool, [](auto&, auto&) { return 1.0; });
  EXPECT_EQ(order, (std::vector<std::uint64_t>{1, 2, 5, 9}));
}

TEST(Rank, MatchesSortOracle) {
  Rng rng(8);
  std::vector<Candidate> pool;
  std::vector<std::pair<double, std::uint64_t>> ref;
  for (std::uint64_t i = 0; i < 8; ++i) {
    const std::uint64_t id = 100 - 7 * i;
    // Coarse scores so that some tie.
    const double score = double(rng.below(4));
    pool.push_back({id, Tensor({1}, {score}), false, {}});
    ref.emplace_back(-score, id);
  }
  std::sort(ref.begin(), ref.end());
  const Tensor avg({1}, {0});
  const auto order =
      rank_candidates({0, &avg}, pool, [](const MiaQuery&, const Candidate& c) { return c.image[0]; });
  for (std::size_t i = 0; i < 8; ++i) EXPECT_EQ(order[i], ref[i].second);
}

TEST(Rank, ShapeMismatchRejected) {
  const auto enc = seeded_encoder(1, {3, 4, 4}, 8);
  const Tensor avg = oracle::random_tensor(2, {3, 4, 4});
  const std::vector<Candidate> pool{{1, Tensor::zeros({3, 8, 8}), false, {}}};
  EXPECT_THROW(rank_candidates({0, &avg}, pool, cosine_scorer(enc)), ArgumentError);
  EXPECT_THROW(rank_candidates({0, &avg}, std::vector<Candidate>{}, cosine_scorer(enc)),
               ArgumentError);
}

TEST(Mia, OracleAndInvertedAttackers) {
  const auto inst = instance(3, 4, 12);
  auto truth = [](const MiaQuery& q, const Candidate& c) {
    return c.is_member && c.cluster == q.cluster ? 1.0 : 0.0;
  };
  auto inverted = [&](const MiaQuery& q, const Candidate& c) { return -truth(q, c); };
  EXPECT_EQ(mia_topk_accuracy(inst, truth), 1.0);
  EXPECT_EQ(mia_topk_accuracy(inst, inverted), 0.0);
}

TEST(Mia, RandomScorerNullIsHalf) {
  double total = 0;
  const int trials = 1000;
  for (int t = 0; t < trials; ++t) {
    const auto inst = instance(1, 5, 5);
    Rng rng{std::uint64_t(t)};
    std::vector<double> scores(inst.pool.size());
    for (double& s : scores) s = rng.uniform();
    total += mia_topk_accuracy(inst, [&](const MiaQuery&, const Candidate& c) {
      return scores[c.id];
    });
  }
  EXPECT_NEAR(total / trials, 0.5, 0.05);
}

TEST(Mia, InvariantToClusterRelabeling) {
  auto inst = instance(3, 2, 6);
  Rng rng(4);
  std::vector<double> scores(inst.pool.size() * 3);
  for (double& s : scores) s = rng.uniform();
  auto scorer = [&](const MiaQuery& q, const Candidate& c) { return scores[c.id * 3 + q.cluster]; };
  const double base = mia_topk_accuracy(inst, scorer);
  // Swap cluster ids 0 and 2 everywhere, including the scorer's view.
  auto relabeled = inst;
  std::swap(relabeled.averages[0], relabeled.averages[2]);
  for (auto& c : relabeled.pool) {
    if (c.cluster) c.cluster = 2 - *c.cluster;
  }
  auto relabeled_scorer = [&](const MiaQuery& q, const Candidate& c) {
    return scores[c.id * 3 + (2 - q.cluster)];
  };
  EXPECT_NEAR(mia_topk_accuracy(relabeled, relabeled_scorer), base, 1e-12);
  EXPECT_GE(base, 0.0);
  EXPECT_LE(base, 1.0);
}

TEST(Mia, InvalidInstances) {
  auto scorer = [](const MiaQuery&, const Candidate&) { return 0.0; };
  auto short_cluster = instance(2, 3, 4);
  short_cluster.pool.erase(short_cluster.pool.begin());
  EXPECT_THROW(mia_topk_accuracy(short_cluster, scorer), ArgumentError);
  EXPECT_THROW(mia_topk_accuracy(instance(2, 3, 0), scorer), ArgumentError);
  auto dup = instance(1, 2, 2);
  dup.pool.back().id = dup.pool.front().id;
  EXPECT_THROW(mia_topk_accuracy(dup, scorer), ArgumentError);
  MiaInstance empty;
  empty.k = 2;
  EXPECT_THROW(mia_topk_accuracy(empty, scorer), ArgumentError);
}

TEST(Embed, UnitEmbeddings) {
  const auto enc = seeded_encoder(2, {3, 4, 4}, 6);
  const std::vector<Tensor> images{oracle::random_tensor(1, {3, 4, 4}),
                                   oracle::random_tensor(2, {3, 4, 4})};
  for (const auto& e : embed_images(*enc, images)) {
    EXPECT_NEAR(squared_norm(e.values()), 1.0, 1e-12);
  }
}
