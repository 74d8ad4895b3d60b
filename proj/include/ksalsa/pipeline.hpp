#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ksalsa/clustering.hpp"
#include "ksalsa/config.hpp"
#include "ksalsa/dataset.hpp"
#include "ksalsa/objective.hpp"
#include "ksalsa/pca.hpp"

namespace ksalsa {

struct LabelVote {
  int grade = 0;
  std::vector<int> histogram;  // label_max + 1 counts
};

// Majority vote; ties go to the higher grade.
LabelVote aggregate_labels(std::span<const int> labels, int label_max);

struct BaselineContext {
  std::shared_ptr<const Generator> generator;  // for "centroid"
  const PcaModel* pca = nullptr;               // for "pca"
};

// "pixel": mean image. "pca": mean of the members' PCA reconstructions.
// "centroid": G(centroid(codes)). "ksalsa" is not a baseline.
Tensor baseline_average(std::span<const Tensor> images, std::span<const LatentCode> codes,
                        AverageMethod method, const BaselineContext& context);

struct ReleaseEntry {
  std::size_t cluster = 0;
  std::string image;  // relative to the release directory
  std::vector<std::string> views;
  int label = 0;
  std::vector<int> label_histogram;
  std::vector<std::uint64_t> members;
  std::string method;
};

struct ReleaseManifest {
  std::size_t k = 0;
  std::string method;
  std::string config_hash;
  nlohmann::json config;
  std::size_t n_records = 0;
  std::vector<std::uint64_t> dropped;
  std::vector<ReleaseEntry> entries;

  std::string to_json() const;
  static ReleaseManifest from_json(const std::string& text);
};

// Switches that change what gets written but not what gets computed.
struct PipelineOptions {
  std::size_t jobs = 0;  // 0 = available parallelism
  bool trace = false;           // trace.jsonl with per-iteration losses
  bool dump_styles = false;     // styles/record_<id>.kstn, p x c x c
  bool dump_alignment = false;  // alignment/cluster_<c>.json
};

std::vector<InversionResult> invert_records(const Generator& generator,
                                            const LabeledDataset& dataset,
                                            const InversionOptions& options, std::size_t jobs);

// Averages every cluster of `partition` with config.method and writes the
// release into out_dir: manifest.json, images/, latents/ and journal.jsonl.
// Clusters already recorded in a journal with the same config hash are
// reloaded instead of recomputed.
ReleaseManifest average_and_release(const LabeledDataset& dataset,
                                    std::span<const LatentCode> codes,
                                    const ClusterPartition& partition, const RunConfig& config,
                                    const std::filesystem::path& out_dir,
                                    const PipelineOptions& options = {});

// Inversion, clustering, averaging and release in one call. Also writes
// partition.json.
ReleaseManifest run_ksalsa(const LabeledDataset& dataset, const RunConfig& config,
                           const std::filesystem::path& out_dir,
                           const PipelineOptions& options = {});

}  // namespace ksalsa
