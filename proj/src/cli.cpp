#include "ksalsa/cli.hpp"

#include <CLI11.hpp>
#include <functional>
#include <iostream>
#include <memory>
#include <unordered_map>

#include "ksalsa/codec.hpp"
#include "ksalsa/errors.hpp"
#include "ksalsa/evaluation.hpp"
#include "ksalsa/gradcheck.hpp"
#include "ksalsa/parallel.hpp"
#include "ksalsa/pipeline.hpp"
#include "ksalsa/toy_data.hpp"

namespace ksalsa::cli {
namespace {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

// Registers RunConfig flags on a subcommand. Values given on the command line
// override those from --config, which override the defaults.
class RunOptions {
 public:
  explicit RunOptions(CLI::App* app) : app_(app) {
    app_->add_option("--config", config_path_, "JSON config file; flags override its values");
  }

  template <typename T, typename Setter>
  CLI::Option* add(const std::string& name, const std::string& description, Setter setter) {
    auto value = std::make_shared<T>();
    CLI::Option* opt = app_->add_option(name, *value, description);
    appliers_.push_back([opt, value, setter](RunConfig& c) {
      if (opt->count() > 0) setter(c, *value);
    });
    return opt;
  }

  void add_common() {
    add<std::string>("--profile", "Generator profile: toy-16 or toy-32 (default toy-16)",
                     [](RunConfig& c, const std::string& v) { c.profile = v; });
    add<std::uint64_t>("--seed", "Master seed for the frozen models (default 0)",
                       [](RunConfig& c, std::uint64_t v) { c.seed = v; });
    add<std::size_t>("--jobs", "Worker threads (default: available parallelism)",
                     [](RunConfig& c, std::size_t v) { c.jobs = v; });
  }

  void add_inversion() {
    add<int>("--invert-iters", "Max gradient steps per inversion (default 2000)",
             [](RunConfig& c, int v) { c.invert_iters = v; });
    add<double>("--invert-step", "Initial line-search step for inversion (default 0.5)",
                [](RunConfig& c, double v) { c.invert_step = v; });
    add<double>("--invert-tolerance", "Stop inversion once MSE <= this (default 1e-12)",
                [](RunConfig& c, double v) { c.invert_tolerance = v; });
  }

  void add_clustering() {
    add<std::size_t>("--k", "Cluster size (default 5)", [](RunConfig& c, std::size_t v) { c.k = v; });
    add<std::string>("--policy", "Leftover handling: error or truncate (default error)",
                     [](RunConfig& c, const std::string& v) { c.policy = parse_leftover_policy(v); });
  }

  void add_averaging() {
    add<std::string>("--lambda", "Content weight in [0,1], or auto for the per-k schedule",
                     [](RunConfig& c, const std::string& v) {
                       if (v == "auto") {
                         c.lambda.reset();
                         return;
                       }
                       try {
                         std::size_t used = 0;
                         c.lambda = std::stod(v, &used);
                         if (used != v.size()) throw std::invalid_argument(v);
                       } catch (const std::exception&) {
                         throw ArgumentError("--lambda expects a number or auto, got '" + v + "'");
                       }
                     });
    add<std::string>("--lambda-schedule", "Schedule for --lambda auto: aptos or eyepacs",
                     [](RunConfig& c, const std::string& v) { c.lambda_schedule = v; });
    add<int>("--T", "Optimizer iterations per cluster (default 50)",
             [](RunConfig& c, int v) { c.iterations = v; });
    add<std::size_t>("--grid", "Style patch grid g, p = g*g patches (default 4)",
                     [](RunConfig& c, std::size_t v) { c.grid = v; });
    add<bool>("--normalize-grams", "Divide Grams by patch pixel count (default false)",
              [](RunConfig& c, bool v) { c.normalize_grams = v; });
    add<std::string>("--alignment", "Patch alignment: cosine-argmax or none",
                     [](RunConfig& c, const std::string& v) { c.alignment = parse_alignment_mode(v); });
    add<std::string>("--method", "Averaging method: ksalsa, centroid, pixel or pca",
                     [](RunConfig& c, const std::string& v) { c.method = parse_method(v); });
    add<double>("--lr", "Adam learning rate (default 0.1)",
                [](RunConfig& c, double v) { c.adam.lr = v; });
    add<double>("--beta1", "Adam beta1 (default 0.9)", [](RunConfig& c, double v) { c.adam.beta1 = v; });
    add<double>("--beta2", "Adam beta2 (default 0.99)", [](RunConfig& c, double v) { c.adam.beta2 = v; });
    add<int>("--augment-count", "Noisy views released per cluster (default 0)",
             [](RunConfig& c, int v) { c.augment_count = v; });
    add<double>("--augment-scale", "Latent noise stddev for views (default 0)",
                [](RunConfig& c, double v) { c.augment_scale = v; });
    add<std::size_t>("--pca-components", "Components for the pca method (0 = min(n-1, 16))",
                     [](RunConfig& c, std::size_t v) { c.pca_components = v; });
    add<std::size_t>("--feature-channels", "Style extractor channels (default 8)",
                     [](RunConfig& c, std::size_t v) { c.feature_channels = v; });
    add<std::size_t>("--embedding-dim", "Content embedding dimension (default 16)",
                     [](RunConfig& c, std::size_t v) { c.embedding_dim = v; });
    app_->add_flag("--trace", pipeline_.trace, "Write per-iteration losses to trace.jsonl");
    app_->add_flag("--dump-styles", pipeline_.dump_styles, "Write each record's StyleSet to styles/");
    app_->add_flag("--dump-alignment", pipeline_.dump_alignment,
                   "Write final correspondences to alignment/");
  }

  void add_paths(const std::string& in_help, const std::string& out_help) {
    add<std::string>("--in", in_help, [](RunConfig& c, const std::string& v) { c.in_dir = v; });
    add<std::string>("--out", out_help, [](RunConfig& c, const std::string& v) { c.out_dir = v; });
  }

  RunConfig resolve() const {
    RunConfig config;
    if (!config_path_.empty()) apply_json(config, nlohmann::json::parse(read_file(config_path_)));
    for (const auto& apply : appliers_) apply(config);
    return config;
  }

  PipelineOptions pipeline(const RunConfig& config) const {
    PipelineOptions p = pipeline_;
    p.jobs = config.jobs;
    return p;
  }

 private:
  CLI::App* app_;
  std::string config_path_;
  std::vector<std::function<void(RunConfig&)>> appliers_;
  PipelineOptions pipeline_;
};

std::size_t jobs_of(const RunConfig& config) {
  return config.jobs == 0 ? default_jobs() : config.jobs;
}

void require_path(const std::string& value, const char* flag) {
  if (value.empty()) throw ArgumentError(std::string(flag) + " is required");
}

// Writes to --out when given, otherwise to stdout.
void emit(const std::string& text, const std::string& out_path, std::ostream& out) {
  if (out_path.empty()) {
    out << text;
  } else {
    write_file(out_path, text);
  }
}

struct LatentSet {
  std::vector<std::uint64_t> ids;
  std::vector<LatentCode> codes;
};

LatentSet read_latent_dir(const fs::path& dir) {
  const auto index = nlohmann::json::parse(read_file(dir / "latents.json"));
  LatentSet set;
  for (const auto& r : index.at("records")) {
    set.ids.push_back(r.at("id").get<std::uint64_t>());
    set.codes.push_back(load_latent(dir / r.at("file").get<std::string>()));
  }
  return set;
}

LatentSet invert_dataset(const LabeledDataset& dataset, const RunConfig& config) {
  const auto models = build_models(config);
  const auto results =
      invert_records(*models.generator, dataset, inversion_options(config), jobs_of(config));
  LatentSet set{dataset.ids(), {}};
  for (const auto& r : results) set.codes.push_back(r.code);
  return set;
}

// Latents from an `invert` output directory, or by inverting a dataset.
LatentSet latents_for(const fs::path& dir, const RunConfig& config) {
  if (fs::exists(dir / "latents.json")) return read_latent_dir(dir);
  if (fs::exists(dir / "dataset.json")) return invert_dataset(load_dataset(dir), config);
  throw ArgumentError(dir.string() + " holds neither latents.json nor dataset.json");
}

std::vector<LatentCode> codes_in_dataset_order(const LabeledDataset& dataset, const LatentSet& set) {
  std::unordered_map<std::uint64_t, std::size_t> where;
  for (std::size_t i = 0; i < set.ids.size(); ++i) where.emplace(set.ids[i], i);
  std::vector<LatentCode> codes;
  for (const auto& r : dataset.records) {
    auto it = where.find(r.id);
    if (it == where.end()) throw ArgumentError("no latent code for record " + std::to_string(r.id));
    codes.push_back(set.codes[it->second]);
  }
  return codes;
}

std::vector<Tensor> release_images(const fs::path& dir, const ReleaseManifest& manifest,
                                   bool with_views) {
  std::vector<Tensor> images;
  for (const auto& e : manifest.entries) {
    images.push_back(load_tensor(dir / e.image));
    if (with_views) {
      for (const auto& v : e.views) images.push_back(load_tensor(dir / v));
    }
  }
  return images;
}

std::string summary_json(const ReleaseManifest& manifest, const fs::path& out_dir) {
  ordered_json j = {{"manifest", (out_dir / "manifest.json").string()},
                    {"config_hash", manifest.config_hash},
                    {"method", manifest.method},
                    {"k", manifest.k},
                    {"entries", manifest.entries.size()},
                    {"dropped", manifest.dropped.size()}};
  return j.dump() + "\n";
}

}  // namespace

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"k-anonymous synthetic averaging over a toy differentiable generator", "ksalsa"};
  app.require_subcommand(1);
  std::function<void()> action;

  // gen-toy-data
  auto* gen = app.add_subcommand("gen-toy-data", "Write a labeled toy dataset with planted textures");
  ToyDataOptions toy;
  std::string gen_out;
  gen->add_option("--profile", toy.profile, "Generator profile: toy-16 or toy-32");
  gen->add_option("--seed", toy.seed, "Seed for the generator and the records");
  gen->add_option("--n", toy.members, "Number of member records (default 60)");
  gen->add_option("--nonmembers", toy.nonmembers,
                  "Held-out records written to <out>/nonmembers (default 0)");
  gen->add_option("--groups", toy.groups, "Latent prototypes / texture groups (default 6)");
  gen->add_option("--label-max", toy.label_max, "Largest grade label (default 4)");
  gen->add_option("--out", gen_out, "Output dataset directory")->required();
  gen->callback([&] {
    action = [&] {
      RunConfig cfg;
      cfg.profile = toy.profile;
      cfg.seed = toy.seed;
      const auto models = build_models(cfg);
      const ToyData data = generate_toy_data(*models.generator, toy);
      save_dataset(gen_out, data.members);
      if (toy.nonmembers > 0) save_dataset(fs::path(gen_out) / "nonmembers", data.nonmembers);
      out << ordered_json{{"out", gen_out}, {"members", data.members.records.size()},
                          {"nonmembers", data.nonmembers.records.size()}}
                 .dump()
          << "\n";
    };
  });

  // invert
  auto* inv = app.add_subcommand("invert", "Invert dataset images into latent codes");
  RunOptions inv_opts(inv);
  inv_opts.add_common();
  inv_opts.add_inversion();
  inv_opts.add_paths("Dataset directory", "Directory for latent codes and latents.json");
  inv->callback([&] {
    action = [&] {
      const RunConfig cfg = inv_opts.resolve();
      require_path(cfg.in_dir, "--in");
      require_path(cfg.out_dir, "--out");
      const LabeledDataset dataset = load_dataset(cfg.in_dir);
      const auto models = build_models(cfg);
      const auto results =
          invert_records(*models.generator, dataset, inversion_options(cfg), jobs_of(cfg));
      ordered_json index;
      index["profile"] = cfg.profile;
      index["seed"] = cfg.seed;
      auto& records = index["records"] = ordered_json::array();
      double worst = 0.0;
      for (std::size_t i = 0; i < results.size(); ++i) {
        const auto& r = dataset.records[i];
        const std::string file = "record_" + std::to_string(r.id) + ".kstn";
        save_latent(fs::path(cfg.out_dir) / file, results[i].code, std::to_string(r.id));
        records.push_back({{"id", r.id}, {"label", r.label}, {"file", file},
                           {"mse", results[i].mse}, {"iterations", results[i].iterations}});
        worst = std::max(worst, results[i].mse);
      }
      write_file(fs::path(cfg.out_dir) / "latents.json", index.dump(1) + "\n");
      out << ordered_json{{"records", results.size()}, {"max_mse", worst}}.dump() << "\n";
    };
  });

  // cluster
  auto* clu = app.add_subcommand("cluster", "Group latent codes into clusters of exactly k");
  RunOptions clu_opts(clu);
  clu_opts.add_common();
  clu_opts.add_inversion();
  clu_opts.add_clustering();
  clu_opts.add_paths("latents directory from invert, or a dataset directory",
                     "Partition JSON file (default: stdout)");
  clu->callback([&] {
    action = [&] {
      const RunConfig cfg = clu_opts.resolve();
      require_path(cfg.in_dir, "--in");
      const LatentSet set = latents_for(cfg.in_dir, cfg);
      const auto partition = same_size_clustering(set.codes, cfg.k, cfg.policy);
      emit(partition_to_json(partition, set.ids), cfg.out_dir, out);
    };
  });

  // average
  auto* avg = app.add_subcommand("average", "Average a given partition and write a release");
  RunOptions avg_opts(avg);
  std::string latents_dir, partition_file;
  avg_opts.add_common();
  avg_opts.add_clustering();
  avg_opts.add_averaging();
  avg_opts.add_paths("Dataset directory", "Release directory");
  avg->add_option("--latents", latents_dir, "latents directory from invert")->required();
  avg->add_option("--partition", partition_file, "Partition JSON from cluster")->required();
  avg->callback([&] {
    action = [&] {
      RunConfig cfg = avg_opts.resolve();
      require_path(cfg.in_dir, "--in");
      require_path(cfg.out_dir, "--out");
      const LabeledDataset dataset = load_dataset(cfg.in_dir);
      const auto codes = codes_in_dataset_order(dataset, read_latent_dir(latents_dir));
      const auto ids = dataset.ids();
      const auto partition = partition_from_json(read_file(partition_file), ids);
      cfg.k = partition.k;
      const auto manifest = average_and_release(dataset, codes, partition, cfg, cfg.out_dir,
                                                avg_opts.pipeline(cfg));
      out << summary_json(manifest, cfg.out_dir);
    };
  });

  // release
  auto* rel = app.add_subcommand("release", "Invert, cluster, average and write a release");
  RunOptions rel_opts(rel);
  rel_opts.add_common();
  rel_opts.add_inversion();
  rel_opts.add_clustering();
  rel_opts.add_averaging();
  rel_opts.add_paths("Dataset directory", "Release directory");
  rel->callback([&] {
    action = [&] {
      const RunConfig cfg = rel_opts.resolve();
      require_path(cfg.in_dir, "--in");
      require_path(cfg.out_dir, "--out");
      const LabeledDataset dataset = load_dataset(cfg.in_dir);
      const auto manifest = run_ksalsa(dataset, cfg, cfg.out_dir, rel_opts.pipeline(cfg));
      out << summary_json(manifest, cfg.out_dir);
    };
  });

  // eval-fd
  auto* fd = app.add_subcommand("eval-fd", "Frechet distance between real and released images");
  RunOptions fd_opts(fd);
  std::string real_dir, synthetic_dir, fd_out;
  fd_opts.add_common();
  fd_opts.add<std::size_t>("--embedding-dim", "Content embedding dimension (default 16)",
                           [](RunConfig& c, std::size_t v) { c.embedding_dim = v; });
  fd->add_option("--real", real_dir, "Dataset directory with the real images")->required();
  fd->add_option("--synthetic", synthetic_dir, "Release directory (manifest.json)")->required();
  fd->add_option("--out", fd_out, "Report file (default: stdout)");
  fd->callback([&] {
    action = [&] {
      const RunConfig cfg = fd_opts.resolve();
      const auto models = build_models(cfg);
      const LabeledDataset real = load_dataset(real_dir);
      const auto manifest = ReleaseManifest::from_json(read_file(fs::path(synthetic_dir) / "manifest.json"));
      const auto synthetic = release_images(synthetic_dir, manifest, true);
      const auto real_images = real.images();
      const double distance =
          frechet_distance(fit_gaussian(embed_images(*models.encoder, real_images)),
                           fit_gaussian(embed_images(*models.encoder, synthetic)));
      ordered_json report = {{"frechet", distance},
                             {"mia_topk", nullptr},
                             {"k", manifest.k},
                             {"method", manifest.method},
                             {"n_clusters", manifest.entries.size()},
                             {"n_real", real_images.size()},
                             {"n_synthetic", synthetic.size()},
                             {"seeds", {{"model", cfg.seed}}}};
      emit(report.dump(2) + "\n", fd_out, out);
    };
  });

  // eval-mia
  auto* mia = app.add_subcommand("eval-mia", "Top-k membership inference against a release");
  RunOptions mia_opts(mia);
  std::string release_dir, nonmember_dir, scorer_name = "cosine", mia_out;
  int trials = 1;
  mia_opts.add_common();
  mia_opts.add<std::size_t>("--embedding-dim", "Content embedding dimension (default 16)",
                            [](RunConfig& c, std::size_t v) { c.embedding_dim = v; });
  mia_opts.add<std::string>("--in", "Member dataset directory",
                            [](RunConfig& c, const std::string& v) { c.in_dir = v; });
  mia->add_option("--release", release_dir, "Release directory (manifest.json)")->required();
  mia->add_option("--nonmembers", nonmember_dir, "Dataset directory of non-member records")->required();
  mia->add_option("--scorer", scorer_name, "Attacker: cosine (embedding similarity) or random");
  mia->add_option("--trials", trials, "Repetitions averaged for the random scorer (default 1)");
  mia->add_option("--out", mia_out, "Report file (default: stdout)");
  mia->callback([&] {
    action = [&] {
      const RunConfig cfg = mia_opts.resolve();
      require_path(cfg.in_dir, "--in");
      if (trials < 1) throw ArgumentError("--trials must be >= 1");
      const auto models = build_models(cfg);
      const LabeledDataset members = load_dataset(cfg.in_dir);
      const LabeledDataset outsiders = load_dataset(nonmember_dir);
      const auto manifest = ReleaseManifest::from_json(read_file(fs::path(release_dir) / "manifest.json"));
      std::unordered_map<std::uint64_t, const Record*> by_id;
      for (const auto& r : members.records) by_id.emplace(r.id, &r);
      MiaInstance instance;
      instance.k = manifest.k;
      instance.averages = release_images(release_dir, manifest, false);
      for (std::size_t c = 0; c < manifest.entries.size(); ++c) {
        for (std::uint64_t id : manifest.entries[c].members) {
          auto it = by_id.find(id);
          if (it == by_id.end()) throw ArgumentError("release member " + std::to_string(id) + " not in --in");
          instance.pool.push_back({id, it->second->image, true, c});
        }
      }
      for (const auto& r : outsiders.records) {
        if (by_id.count(r.id)) throw ArgumentError("non-member id " + std::to_string(r.id) + " is also a member");
        instance.pool.push_back({r.id, r.image, false, std::nullopt});
      }
      double accuracy = 0.0;
      if (scorer_name == "cosine") {
        accuracy = mia_topk_accuracy(instance, cosine_scorer(models.encoder));
      } else if (scorer_name == "random") {
        Rng rng(cfg.seed);
        Scorer scorer = [&rng](const MiaQuery&, const Candidate&) { return rng.uniform(); };
        for (int t = 0; t < trials; ++t) accuracy += mia_topk_accuracy(instance, scorer);
        accuracy /= trials;
      } else {
        throw ArgumentError("unknown scorer '" + scorer_name + "' (expected cosine or random)");
      }
      std::size_t n_members = 0;
      for (const auto& c : instance.pool) n_members += c.is_member;
      ordered_json report = {{"frechet", nullptr},
                             {"mia_topk", accuracy},
                             {"k", manifest.k},
                             {"method", manifest.method},
                             {"n_clusters", manifest.entries.size()},
                             {"scorer", scorer_name},
                             {"pool_members", n_members},
                             {"pool_nonmembers", instance.pool.size() - n_members},
                             {"seeds", {{"model", cfg.seed}}}};
      emit(report.dump(2) + "\n", mia_out, out);
    };
  });

  // grad-check
  auto* gc = app.add_subcommand("grad-check", "Audit the analytic gradient against finite differences");
  RunOptions gc_opts(gc);
  int instances = 5;
  double step = 1e-5;
  gc_opts.add_common();
  gc_opts.add<std::size_t>("--k", "Cluster size of each audit instance (default 5)",
                           [](RunConfig& c, std::size_t v) { c.k = v; });
  gc_opts.add<double>("--lambda", "Content weight (default 0.05)",
                      [](RunConfig& c, double v) { c.lambda = v; });
  gc_opts.add<std::size_t>("--grid", "Style patch grid (default 4)",
                           [](RunConfig& c, std::size_t v) { c.grid = v; });
  gc_opts.add<std::string>("--alignment", "Patch alignment: cosine-argmax or none",
                           [](RunConfig& c, const std::string& v) { c.alignment = parse_alignment_mode(v); });
  gc->add_option("--instances", instances, "Number of seeded instances (default 5)");
  gc->add_option("--step", step, "Finite-difference step h (default 1e-5)");
  gc->callback([&] {
    action = [&] {
      RunConfig cfg = gc_opts.resolve();
      if (!cfg.lambda) cfg.lambda = 0.05;
      if (instances < 1) throw ArgumentError("--instances must be >= 1");
      const auto models = build_models(cfg);
      const LossConfig loss = loss_config(cfg);
      std::vector<double> errors(std::size_t(instances), 0.0);
      parallel_for(errors.size(), jobs_of(cfg), [&](std::size_t i) {
        errors[i] = audit_total_loss_gradient(models, loss, cfg.k, Rng(cfg.seed).split(i).seed(), step)
                        .relative_error;
      });
      const double worst = *std::max_element(errors.begin(), errors.end());
      constexpr double kTolerance = 1e-4;
      out << ordered_json{{"max_relative_error", worst}, {"instances", instances},
                          {"tolerance", kTolerance}, {"pass", worst <= kTolerance}}
                 .dump()
          << "\n";
      if (worst > kTolerance) throw NumericError("gradient audit failed: relative error " + std::to_string(worst));
    };
  });

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    app.exit(e, out, err);
    return kExitOk;
  } catch (const CLI::CallForAllHelp& e) {
    app.exit(e, out, err);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    const auto subs = app.get_subcommands();
    err << (subs.empty() ? app.help() : subs.front()->help());
    return kExitUsage;
  }

  try {
    action();
    return kExitOk;
  } catch (const ArgumentError& e) {
    err << "error: " << e.what() << "\n";
    const auto subs = app.get_subcommands();
    if (!subs.empty()) err << subs.front()->help();
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
}

int dispatch(int argc, char** argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return dispatch(args, std::cout, std::cerr);
}

}  // namespace ksalsa::cli
