#include "ksalsa/pipeline.hpp"

#include <cstdio>
#include <fstream>
#include <map>
#include <mutex>

#include "ksalsa/codec.hpp"
#include "ksalsa/errors.hpp"
#include "ksalsa/parallel.hpp"

namespace ksalsa {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

LabelVote aggregate_labels(std::span<const int> labels, int label_max) {
  if (labels.empty()) throw ArgumentError("aggregate_labels: no labels");
  if (label_max < 0) throw ArgumentError("aggregate_labels: label_max must be >= 0");
  LabelVote vote;
  vote.histogram.assign(std::size_t(label_max) + 1, 0);
  for (int label : labels) {
    if (label < 0 || label > label_max) {
      throw ArgumentError("label " + std::to_string(label) + " outside [0, " +
                          std::to_string(label_max) + "]");
    }
    ++vote.histogram[std::size_t(label)];
  }
  int best = -1;
  for (int g = 0; g <= label_max; ++g) {
    if (vote.histogram[std::size_t(g)] >= best) {  // >= lets the higher grade win ties
      best = vote.histogram[std::size_t(g)];
      vote.grade = g;
    }
  }
  return vote;
}

Tensor baseline_average(std::span<const Tensor> images, std::span<const LatentCode> codes,
                        AverageMethod method, const BaselineContext& context) {
  switch (method) {
    case AverageMethod::kPixel:
    case AverageMethod::kPca: {
      if (images.empty()) throw ArgumentError("baseline_average: empty cluster");
      if (method == AverageMethod::kPca && context.pca == nullptr) {
        throw StateError("baseline_average: the pca method needs a fitted PcaModel");
      }
      std::vector<double> sum(images.front().size(), 0.0);
      for (const auto& image : images) {
        require_same_shape(image, images.front(), "baseline_average");
        const Tensor member =
            method == AverageMethod::kPca ? context.pca->reconstruct(image) : image;
        for (std::size_t i = 0; i < sum.size(); ++i) sum[i] += member[i];
      }
      for (double& s : sum) s /= double(images.size());
      return Tensor(images.front().dims(), std::move(sum));
    }
    case AverageMethod::kCentroid:
      if (!context.generator) throw StateError("baseline_average: centroid needs a generator");
      return context.generator->generate(centroid(codes));
    case AverageMethod::kKsalsa:
      break;
  }
  throw ArgumentError("baseline_average: '" + to_string(method) + "' is not a baseline method");
}

std::string ReleaseManifest::to_json() const {
  ordered_json j;
  j["k"] = k;
  j["method"] = method;
  j["config_hash"] = config_hash;
  j["config"] = config;
  j["n_records"] = n_records;
  j["n_entries"] = entries.size();
  j["dropped"] = dropped;
  auto& arr = j["entries"] = ordered_json::array();
  for (const auto& e : entries) {
    arr.push_back({{"cluster", e.cluster},
                   {"image", e.image},
                   {"views", e.views},
                   {"label", e.label},
                   {"label_histogram", e.label_histogram},
                   {"member_count", e.members.size()},
                   {"members", e.members},
                   {"method", e.method}});
  }
  return j.dump(2) + "\n";
}

ReleaseManifest ReleaseManifest::from_json(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  ReleaseManifest m;
  m.k = j.at("k").get<std::size_t>();
  m.method = j.at("method").get<std::string>();
  m.config_hash = j.at("config_hash").get<std::string>();
  m.config = j.at("config");
  m.n_records = j.at("n_records").get<std::size_t>();
  m.dropped = j.at("dropped").get<std::vector<std::uint64_t>>();
  for (const auto& e : j.at("entries")) {
    m.entries.push_back({e.at("cluster").get<std::size_t>(), e.at("image").get<std::string>(),
                         e.at("views").get<std::vector<std::string>>(), e.at("label").get<int>(),
                         e.at("label_histogram").get<std::vector<int>>(),
                         e.at("members").get<std::vector<std::uint64_t>>(),
                         e.at("method").get<std::string>()});
  }
  return m;
}

std::vector<InversionResult> invert_records(const Generator& generator,
                                            const LabeledDataset& dataset,
                                            const InversionOptions& options, std::size_t jobs) {
  std::vector<InversionResult> out(dataset.records.size());
  parallel_for(out.size(), jobs == 0 ? default_jobs() : jobs,
               [&](std::size_t i) { out[i] = invert(generator, dataset.records[i].image, options); });
  return out;
}

namespace {

std::string cluster_name(std::size_t cluster) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "cluster_%04zu", cluster);
  return buf;
}

struct ClusterOutcome {
  std::string image;
  std::vector<std::string> views;
  std::vector<TraceEntry> trace;
  std::vector<Correspondence> alignment;
};

ordered_json journal_line(const std::string& hash, std::size_t cluster,
                          const std::vector<std::uint64_t>& members, const ClusterOutcome& o) {
  ordered_json trace = ordered_json::array();
  for (const auto& t : o.trace) trace.push_back({t.iteration, t.total, t.content, t.style});
  return {{"config_hash", hash}, {"cluster", cluster}, {"members", members},
          {"image", o.image},    {"views", o.views},    {"trace", trace},
          {"alignment", o.alignment}};
}

// Completed clusters from earlier runs with the same hash, keyed by index.
std::map<std::size_t, nlohmann::json> read_journal(const fs::path& path, const std::string& hash) {
  std::map<std::size_t, nlohmann::json> done;
  std::ifstream in(path);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception&) {
      continue;  // torn final line from an interrupted run
    }
    if (j.value("config_hash", "") == hash) done[j.at("cluster").get<std::size_t>()] = j;
  }
  return done;
}

}  // namespace

ReleaseManifest average_and_release(const LabeledDataset& dataset,
                                    std::span<const LatentCode> codes,
                                    const ClusterPartition& partition, const RunConfig& config,
                                    const fs::path& out_dir, const PipelineOptions& options) {
  validate(dataset);
  const std::size_t n = dataset.records.size();
  if (codes.size() != n) throw ArgumentError("need one latent code per record");
  validate(partition, n);
  if (partition.k != config.k) {
    throw ArgumentError("partition was built for k=" + std::to_string(partition.k) +
                        " but the config says k=" + std::to_string(config.k));
  }
  const bool latent_method =
      config.method == AverageMethod::kKsalsa || config.method == AverageMethod::kCentroid;
  if (config.augment_count > 0 && !latent_method) {
    throw ArgumentError("augmentation needs a latent-space method (ksalsa or centroid)");
  }

  const std::string hash = config_hash(config);
  const LossConfig loss = loss_config(config);
  const ObjectiveModels models = build_models(config);
  const auto seeds = model_seeds(config.seed);

  std::optional<PcaModel> pca;
  if (config.method == AverageMethod::kPca) {
    const std::size_t dim = dataset.records.front().image.size();
    const std::size_t r = config.pca_components ? config.pca_components
                                                : std::min<std::size_t>({n - 1, dim, 16});
    pca = fit_pca(dataset.images(), r, {config.seed});
  }
  const BaselineContext baseline{models.generator, pca ? &*pca : nullptr};

  fs::create_directories(out_dir / "images");
  const fs::path journal_path = out_dir / "journal.jsonl";
  const auto done = read_journal(journal_path, hash);
  std::ofstream journal(journal_path, std::ios::app);
  std::mutex journal_mutex;

  const std::size_t m = partition.clusters.size();
  std::vector<ClusterOutcome> outcomes(m);
  std::vector<std::vector<std::uint64_t>> member_ids(m);
  for (std::size_t c = 0; c < m; ++c) {
    for (std::size_t idx : partition.clusters[c]) member_ids[c].push_back(dataset.records[idx].id);
  }

  auto resume = [&](std::size_t c) -> bool {
    auto it = done.find(c);
    if (it == done.end()) return false;
    const auto& j = it->second;
    if (j.at("members").get<std::vector<std::uint64_t>>() != member_ids[c]) return false;
    ClusterOutcome o;
    o.image = j.at("image").get<std::string>();
    o.views = j.at("views").get<std::vector<std::string>>();
    if (!fs::exists(out_dir / o.image)) return false;
    for (const auto& v : o.views) {
      if (!fs::exists(out_dir / v)) return false;
    }
    for (const auto& t : j.at("trace")) {
      o.trace.push_back({t[0].get<int>(), t[1].get<double>(), t[2].get<double>(), t[3].get<double>()});
    }
    o.alignment = j.at("alignment").get<std::vector<Correspondence>>();
    outcomes[c] = std::move(o);
    return true;
  };

  auto compute = [&](std::size_t c) {
    if (resume(c)) return;
    std::vector<Tensor> images;
    std::vector<LatentCode> members;
    for (std::size_t idx : partition.clusters[c]) {
      images.push_back(dataset.records[idx].image);
      members.push_back(codes[idx]);
    }
    ClusterOutcome o;
    const std::string name = cluster_name(c);
    std::optional<LatentCode> latent;
    Tensor image;
    if (config.method == AverageMethod::kKsalsa) {
      AverageResult avg = optimize_average(members, images, models, loss);
      image = models.generator->generate(avg.code);
      latent = std::move(avg.code);
      o.trace = std::move(avg.trace);
      o.alignment = std::move(avg.final_correspondences);
    } else {
      image = baseline_average(images, members, config.method, baseline);
      if (config.method == AverageMethod::kCentroid) latent = centroid(members);
    }
    o.image = "images/" + name + ".kstn";
    save_tensor(out_dir / o.image, image);
    if (latent) {
      save_latent(out_dir / "latents" / (name + ".kstn"), *latent, name);
      if (config.augment_count > 0) {
        Rng rng = Rng(seeds.augment).split(c);
        const auto views = augment(*latent, config.augment_scale, config.augment_count, rng);
        for (std::size_t v = 0; v < views.size(); ++v) {
          o.views.push_back("images/" + name + "_view_" + std::to_string(v) + ".kstn");
          save_tensor(out_dir / o.views.back(), models.generator->generate(views[v]));
        }
      }
    }
    {
      std::lock_guard lock(journal_mutex);
      journal << journal_line(hash, c, member_ids[c], o).dump() << "\n" << std::flush;
    }
    outcomes[c] = std::move(o);
  };
  parallel_for(m, options.jobs == 0 ? default_jobs() : options.jobs, compute);

  ReleaseManifest manifest;
  manifest.k = config.k;
  manifest.method = to_string(config.method);
  manifest.config_hash = hash;
  manifest.config = canonical_json(config);
  manifest.n_records = n;
  for (std::size_t idx : partition.dropped) manifest.dropped.push_back(dataset.records[idx].id);
  for (std::size_t c = 0; c < m; ++c) {
    std::vector<int> labels;
    for (std::size_t idx : partition.clusters[c]) labels.push_back(dataset.records[idx].label);
    const LabelVote vote = aggregate_labels(labels, dataset.label_max);
    manifest.entries.push_back({c, outcomes[c].image, outcomes[c].views, vote.grade,
                                vote.histogram, member_ids[c], manifest.method});
  }
  write_file(out_dir / "manifest.json", manifest.to_json());

  if (options.trace) {
    std::string lines;
    for (std::size_t c = 0; c < m; ++c) {
      for (const auto& t : outcomes[c].trace) {
        ordered_json j = {{"config_hash", hash}, {"cluster", c},      {"iteration", t.iteration},
                          {"total", t.total},    {"content", t.content}, {"style", t.style}};
        lines += j.dump() + "\n";
      }
    }
    write_file(out_dir / "trace.jsonl", lines);
  }
  if (options.dump_alignment) {
    for (std::size_t c = 0; c < m; ++c) {
      write_file(out_dir / "alignment" / (cluster_name(c) + ".json"),
                 nlohmann::json(outcomes[c].alignment).dump() + "\n");
    }
  }
  if (options.dump_styles) {
    for (const auto& r : dataset.records) {
      const StyleSet styles = local_style_features(models.extractor->forward(r.image), loss.style);
      save_tensor(out_dir / "styles" / ("record_" + std::to_string(r.id) + ".kstn"), styles.tensor());
    }
  }
  return manifest;
}

ReleaseManifest run_ksalsa(const LabeledDataset& dataset, const RunConfig& config,
                           const fs::path& out_dir, const PipelineOptions& options) {
  validate(dataset);
  const ObjectiveModels models = build_models(config);
  const auto inverted =
      invert_records(*models.generator, dataset, inversion_options(config), options.jobs);
  std::vector<LatentCode> codes;
  codes.reserve(inverted.size());
  for (const auto& r : inverted) codes.push_back(r.code);
  const ClusterPartition partition = same_size_clustering(codes, config.k, config.policy);
  fs::create_directories(out_dir);
  const auto ids = dataset.ids();
  write_file(out_dir / "partition.json", partition_to_json(partition, ids));
  return average_and_release(dataset, codes, partition, config, out_dir, options);
}

}  // namespace ksalsa
