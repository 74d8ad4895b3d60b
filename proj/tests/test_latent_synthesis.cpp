#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>

#include "ksalsa/diff.hpp"
#include "ksalsa/errors.hpp"
#include "ksalsa/generator.hpp"
#include "ksalsa/latent.hpp"
#include "ksalsa/rng.hpp"
#include "oracles.hpp"

namespace fs = std::filesystem;
using namespace ksalsa;

namespace {

LatentCode random_code(std::uint64_t seed, std::size_t rows = 1, std::size_t width = 32,
                       double stddev = 1.0) {
  return LatentCode(oracle::random_tensor(seed, {rows, width}, stddev));
}

}  // namespace

TEST(Latent, RejectsNonMatrix) {
  EXPECT_THROW(LatentCode(Tensor({4}, {1, 2, 3, 4})), ArgumentError);
}

TEST(Centroid, IdenticalCodes) {
  const LatentCode w = random_code(1);
  const std::vector<LatentCode> codes(4, w);
  EXPECT_EQ(centroid(codes), w);
}

TEST(Centroid, OppositeCodesCancel) {
  const LatentCode w = random_code(2);
  const std::vector<LatentCode> codes{w, LatentCode(-1.0 * w.tensor())};
  const LatentCode c = centroid(codes);
  for (double v : c.values()) EXPECT_EQ(v, 0.0);
}

TEST(Centroid, PairwiseSummationOracle) {
  const std::vector<LatentCode> codes{random_code(3, 2, 8), random_code(4, 2, 8),
                                      random_code(5, 2, 8)};
  const LatentCode c = centroid(codes);
  for (std::size_t i = 0; i < c.size(); ++i) {
    const double pair = codes[0].values()[i] + codes[1].values()[i];
    const double expect = (pair + codes[2].values()[i]) / 3.0;
    EXPECT_NEAR(c.values()[i], expect, 1e-12);
  }
}

TEST(Centroid, PermutationInvariant) {
  std::vector<LatentCode> codes{random_code(6), random_code(7), random_code(8), random_code(9)};
  const LatentCode a = centroid(codes);
  std::swap(codes[0], codes[3]);
  std::swap(codes[1], codes[2]);
  const LatentCode b = centroid(codes);
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(a.values()[i], b.values()[i], 1e-12);
}

TEST(Centroid, Errors) {
  EXPECT_THROW(centroid(std::vector<LatentCode>{}), ArgumentError);
  const std::vector<LatentCode> mixed{random_code(1, 1, 4), random_code(1, 2, 2)};
  EXPECT_THROW(centroid(mixed), ArgumentError);
}

TEST(Distance, Basics) {
  const LatentCode w = random_code(10);
  EXPECT_EQ(latent_distance(w, w), 0.0);
  EXPECT_DOUBLE_EQ(latent_distance(LatentCode(Tensor({1, 2}, {0, 0})),
                                   LatentCode(Tensor({1, 2}, {3, 4}))),
                   5.0);
  EXPECT_THROW(latent_distance(random_code(1, 1, 4), random_code(1, 2, 2)), ArgumentError);
}

TEST(Distance, BruteForceAndTriangle) {
  for (std::uint64_t s = 0; s < 20; ++s) {
    const LatentCode a = random_code(100 + s), b = random_code(200 + s), c = random_code(300 + s);
    double sq = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
      sq += (a.values()[i] - b.values()[i]) * (a.values()[i] - b.values()[i]);
    }
    EXPECT_NEAR(latent_distance(a, b), std::sqrt(sq), 1e-12);
    EXPECT_LE(latent_distance(a, c), latent_distance(a, b) + latent_distance(b, c) + 1e-12);
  }
}

TEST(Augment, ZeroScaleCopies) {
  Rng rng(1);
  const LatentCode w = random_code(11);
  const auto views = augment(w, 0.0, 5, rng);
  ASSERT_EQ(views.size(), 5u);
  for (const auto& v : views) EXPECT_EQ(v, w);
}

TEST(Augment, OffsetMagnitudeMonteCarlo) {
  Rng rng(7);
  const LatentCode w = random_code(12);
  const double scale = 0.1;
  double total = 0;
  int count = 0;
  for (int trial = 0; trial < 400; ++trial) {
    for (const auto& v : augment(w, scale, 5, rng)) {
      total += latent_distance(v, w);
      ++count;
    }
  }
  // E||noise|| for 32 i.i.d. N(0, s^2) is s * sqrt(2) Gamma(16.5)/Gamma(16),
  // within 1% of s * sqrt(32).
  EXPECT_NEAR(total / count, scale * std::sqrt(32.0), 0.02 * scale * std::sqrt(32.0));
}

TEST(Augment, Errors) {
  Rng rng(1);
  EXPECT_THROW(augment(random_code(1), -0.1, 2, rng), ArgumentError);
  EXPECT_THROW(augment(random_code(1), 0.1, 0, rng), ArgumentError);
}

TEST(Latent, SaveLoadWithSidecar) {
  const fs::path dir = fs::temp_directory_path() / "ksalsa_tests";
  fs::create_directories(dir);
  const LatentCode w = random_code(13, 2, 5);
  save_latent(dir / "w.kstn", w, "record-3");
  EXPECT_TRUE(fs::exists(dir / "w.kstn.json"));
  EXPECT_EQ(load_latent(dir / "w.kstn"), w);
}

TEST(ToyGenerator, ProfilesAndUnknown) {
  const auto p = generator_profile("toy-16");
  EXPECT_EQ(p.latent_rows, 1u);
  EXPECT_EQ(p.latent_width, 32u);
  EXPECT_EQ(p.image, (ImageShape{3, 16, 16}));
  EXPECT_EQ(generator_profile("toy-32").image, (ImageShape{3, 32, 32}));
  EXPECT_THROW(generator_profile("stylegan"), ArgumentError);
}

TEST(ToyGenerator, ZeroLatentZeroBiasGivesZeroImage) {
  const auto g = toy_generator(3, "toy-16", 0.0);
  const Tensor img = g->generate(LatentCode::zeros(1, 32));
  for (double v : img.values()) EXPECT_EQ(v, 0.0);
}

TEST(ToyGenerator, Deterministic) {
  const auto a = toy_generator(5, "toy-16"), b = toy_generator(5, "toy-16");
  EXPECT_EQ(a->weights(), b->weights());
  EXPECT_EQ(a->bias(), b->bias());
  EXPECT_NE(a->weights(), toy_generator(6, "toy-16")->weights());
}

TEST(ToyGenerator, VjpMatchesFiniteDifferences) {
  const auto g = toy_generator(8, "toy-16");
  const Tensor w = oracle::random_tensor(9, {1, 32}, g->latent_scale());
  const Tensor cot = oracle::random_tensor(10, {3, 16, 16});
  EXPECT_LE(relative_l2_error(g->vjp(w, cot), finite_diff_vjp(*g, w, cot)), 1e-6);
}

TEST(ToyGenerator, ShapeChecks) {
  const auto g = toy_generator(8, "toy-16");
  EXPECT_THROW(g->forward(Tensor::zeros({1, 31})), ArgumentError);
  EXPECT_THROW(g->vjp(Tensor::zeros({1, 32}), Tensor::zeros({3, 8, 8})), ArgumentError);
}

TEST(IdentityGenerator, ForwardAndAdjoint) {
  const auto g = identity_generator(3, 16, {3, 4, 4});
  const Tensor w = oracle::random_tensor(1, {3, 16});
  const Tensor img = g->forward(w);
  EXPECT_EQ(img.dims(), (Tensor::Dims{3, 4, 4}));
  EXPECT_EQ(img.vector(), w.vector());
  const Tensor cot = oracle::random_tensor(2, {3, 4, 4});
  EXPECT_EQ(g->vjp(w, cot).vector(), cot.vector());
  EXPECT_THROW(identity_generator(2, 16, {3, 4, 4}), ArgumentError);
}

TEST(Invert, IdentityGeneratorOneIteration) {
  const auto g = identity_generator(3, 16, {3, 4, 4});
  const Tensor x = oracle::random_tensor(3, {3, 4, 4});
  const auto r = invert(*g, x);
  EXPECT_EQ(r.iterations, 1);
  EXPECT_LE(r.mse, 1e-24);
  for (std::size_t i = 0; i < x.size(); ++i) EXPECT_NEAR(r.code.values()[i], x[i], 1e-12);
}

TEST(Invert, RecoversToyLatent) {
  const auto g = toy_generator(4, "toy-16");
  const LatentCode truth(oracle::random_tensor(5, {1, 32}, g->latent_scale()));
  const auto r = invert(*g, g->generate(truth));
  EXPECT_LE(r.mse, 1e-6);
}

TEST(Invert, StartAtOptimumStaysPut) {
  const auto g = toy_generator(4, "toy-16");
  const LatentCode w(oracle::random_tensor(6, {1, 32}, g->latent_scale()));
  InversionOptions opts;
  opts.init = w;
  const auto r = invert(*g, g->generate(w), opts);
  EXPECT_EQ(r.code, w);
  EXPECT_EQ(r.mse, 0.0);
}

TEST(Invert, NeverWorseThanInit) {
  const auto g = toy_generator(4, "toy-16");
  const Tensor target = oracle::random_tensor(7, {3, 16, 16}, 0.3);
  for (std::uint64_t s = 0; s < 5; ++s) {
    InversionOptions opts;
    opts.max_iters = 20;
    opts.init = LatentCode(oracle::random_tensor(50 + s, {1, 32}, 10.0));
    const Tensor start = g->generate(*opts.init) - target;
    const double start_mse = squared_norm(start.values()) / double(start.size());
    const auto r = invert(*g, target, opts);
    EXPECT_LE(r.mse, start_mse);
    // Lossy: a random image is outside the generator's range.
    EXPECT_GT(r.mse, 1e-6);
  }
}

TEST(Invert, Errors) {
  const auto g = toy_generator(4, "toy-16");
  InversionOptions bad;
  bad.step_size = 0;
  EXPECT_THROW(invert(*g, Tensor::zeros({3, 16, 16}), bad), ArgumentError);
  EXPECT_THROW(invert(*g, Tensor::zeros({3, 8, 8})), ArgumentError);
}
