#include <gtest/gtest.h>

#include <filesystem>
#include <json.hpp>
#include <sstream>

#include "ksalsa/cli.hpp"
#include "ksalsa/codec.hpp"

namespace fs = std::filesystem;
using ksalsa::cli::dispatch;

namespace {

struct CliRun {
  int code;
  std::string out;
  std::string err;
};

CliRun run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = dispatch(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "ksalsa_cli_tests" / name;
  fs::remove_all(dir);
  fs::create_directories(dir.parent_path());
  return dir;
}

}  // namespace

TEST(Cli, HelpOnEverySubcommand) {
  const std::vector<std::pair<std::string, std::vector<std::string>>> flags{
      {"gen-toy-data", {"--profile", "--seed", "--n", "--nonmembers", "--groups", "--out"}},
      {"invert", {"--in", "--out", "--config"}},
      {"cluster", {"--k", "--policy", "--in"}},
      {"average", {"--latents", "--partition", "--lambda", "--T", "--method"}},
      {"release", {"--k", "--lambda", "--lambda-schedule", "--T", "--grid", "--alignment",
                   "--method", "--seed", "--lr", "--beta1", "--beta2", "--augment-count",
                   "--normalize-grams", "--trace", "--dump-styles", "--dump-alignment"}},
      {"eval-fd", {"--real", "--synthetic"}},
      {"eval-mia", {"--release", "--nonmembers", "--scorer", "--trials"}},
      {"grad-check", {"--k", "--lambda", "--grid", "--alignment", "--instances", "--step"}}};
  for (const auto& [sub, expected] : flags) {
    const CliRun r = run({sub, "--help"});
    EXPECT_EQ(r.code, 0) << sub;
    for (const auto& f : expected) EXPECT_NE(r.out.find(f), std::string::npos) << sub << " " << f;
  }
  EXPECT_EQ(run({"--help"}).code, 0);
}

TEST(Cli, UsageErrors) {
  EXPECT_EQ(run({}).code, 1);
  EXPECT_EQ(run({"frobnicate"}).code, 1);
  const CliRun r = run({"cluster", "--bogus"});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("cluster"), std::string::npos);
  EXPECT_EQ(run({"release", "--in", "x", "--out", "y", "--lambda", "nope"}).code, 1);
  EXPECT_EQ(run({"release", "--in", "x", "--out", "y", "--method", "median"}).code, 1);
}

TEST(Cli, EndToEnd) {
  const fs::path data = fresh_dir("data"), rel = fresh_dir("rel"), lat = fresh_dir("lat");
  ASSERT_EQ(run({"gen-toy-data", "--seed", "7", "--n", "20", "--nonmembers", "10", "--out",
                 data.string()})
                .code,
            0);

  const CliRun bad = run({"cluster", "--k", "7", "--in", data.string()});
  EXPECT_EQ(bad.code, 2);
  EXPECT_NE(bad.err.find("remainder 6"), std::string::npos);

  const CliRun rr = run({"release", "--k", "5", "--lambda", "auto", "--T", "5", "--method", "ksalsa",
                      "--seed", "7", "--in", data.string(), "--out", rel.string()});
  ASSERT_EQ(rr.code, 0) << rr.err;
  const auto manifest = nlohmann::json::parse(ksalsa::read_file(rel / "manifest.json"));
  EXPECT_EQ(manifest["entries"].size(), 4u);
  EXPECT_EQ(manifest["k"], 5);

  ASSERT_EQ(run({"invert", "--seed", "7", "--in", data.string(), "--out", lat.string()}).code, 0);
  const fs::path part = lat / "partition.json";
  ASSERT_EQ(run({"cluster", "--k", "5", "--in", lat.string(), "--out", part.string()}).code, 0);
  const fs::path avg = fresh_dir("avg");
  const CliRun ar = run({"average", "--T", "5", "--seed", "7", "--in", data.string(), "--latents",
                      lat.string(), "--partition", part.string(), "--out", avg.string()});
  ASSERT_EQ(ar.code, 0) << ar.err;
  // The staged commands reproduce the one-shot release.
  EXPECT_EQ(ksalsa::read_file(avg / "manifest.json"), ksalsa::read_file(rel / "manifest.json"));

  const CliRun fd = run({"eval-fd", "--seed", "7", "--real", data.string(), "--synthetic", rel.string()});
  ASSERT_EQ(fd.code, 0) << fd.err;
  const auto fdj = nlohmann::json::parse(fd.out);
  EXPECT_GE(fdj["frechet"].get<double>(), 0.0);
  EXPECT_EQ(fdj["n_clusters"], 4);

  const CliRun mia = run({"eval-mia", "--seed", "7", "--release", rel.string(), "--in",
                       data.string(), "--nonmembers", (data / "nonmembers").string()});
  ASSERT_EQ(mia.code, 0) << mia.err;
  const double acc = nlohmann::json::parse(mia.out)["mia_topk"].get<double>();
  EXPECT_GE(acc, 0.0);
  EXPECT_LE(acc, 1.0);

  EXPECT_EQ(run({"eval-mia", "--release", rel.string(), "--in", data.string(), "--nonmembers",
                 (data / "nonmembers").string(), "--scorer", "psychic"})
                .code,
            1);
}

TEST(Cli, GradCheck) {
  const CliRun r = run({"grad-check", "--profile", "toy-16", "--seed", "3", "--instances", "2"});
  EXPECT_EQ(r.code, 0) << r.err;
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_LE(j["max_relative_error"].get<double>(), 1e-4);
  // A step this coarse cannot meet the tolerance.
  EXPECT_EQ(run({"grad-check", "--seed", "3", "--instances", "1", "--step", "0.5"}).code, 2);
}

TEST(Cli, ConfigFileAndOverrides) {
  const fs::path data = fresh_dir("cfg_data"), rel = fresh_dir("cfg_rel");
  ASSERT_EQ(run({"gen-toy-data", "--n", "4", "--out", data.string()}).code, 0);
  const fs::path cfg = fresh_dir("cfg") .concat(".json");
  ksalsa::write_file(cfg, R"({"k": 2, "T": 1, "lambda": 0.2})");
  const CliRun r = run({"release", "--config", cfg.string(), "--k", "4", "--in", data.string(),
                     "--out", rel.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto manifest = nlohmann::json::parse(ksalsa::read_file(rel / "manifest.json"));
  EXPECT_EQ(manifest["k"], 4);
  EXPECT_EQ(manifest["config"]["T"], 1);
  ksalsa::write_file(cfg, R"({"bogus": 1})");
  EXPECT_EQ(run({"release", "--config", cfg.string(), "--in", data.string(), "--out", rel.string()})
                .code,
            1);
}
