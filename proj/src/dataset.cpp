#include "ksalsa/dataset.hpp"

#include <cstdio>
#include <json.hpp>
#include <unordered_set>

#include "ksalsa/codec.hpp"
#include "ksalsa/errors.hpp"

namespace ksalsa {

std::vector<std::uint64_t> LabeledDataset::ids() const {
  std::vector<std::uint64_t> out;
  out.reserve(records.size());
  for (const auto& r : records) out.push_back(r.id);
  return out;
}

std::vector<Tensor> LabeledDataset::images() const {
  std::vector<Tensor> out;
  out.reserve(records.size());
  for (const auto& r : records) out.push_back(r.image);
  return out;
}

void validate(const LabeledDataset& dataset) {
  if (dataset.label_max < 0) throw ArgumentError("label_max must be >= 0");
  std::unordered_set<std::uint64_t> seen;
  for (const auto& r : dataset.records) {
    if (!seen.insert(r.id).second) throw ArgumentError("duplicate record id " + std::to_string(r.id));
    if (r.label < 0 || r.label > dataset.label_max) {
      throw ArgumentError("record " + std::to_string(r.id) + " has label " +
                          std::to_string(r.label) + " outside [0, " +
                          std::to_string(dataset.label_max) + "]");
    }
    if (!r.image.same_shape(dataset.records.front().image) || r.image.rank() != 3) {
      throw ArgumentError("record " + std::to_string(r.id) + " has image dims " +
                          dims_to_string(r.image.dims()) + "; all images must share one C x H x W shape");
    }
  }
}

void save_dataset(const std::filesystem::path& dir, const LabeledDataset& dataset) {
  validate(dataset);
  std::filesystem::create_directories(dir);
  nlohmann::ordered_json index;
  index["profile"] = dataset.profile;
  index["label_max"] = dataset.label_max;
  auto& records = index["records"] = nlohmann::ordered_json::array();
  for (const auto& r : dataset.records) {
    char name[48];
    std::snprintf(name, sizeof name, "img_%06llu.kstn", static_cast<unsigned long long>(r.id));
    save_tensor(dir / name, r.image);
    records.push_back({{"id", r.id}, {"label", r.label}, {"file", name}});
  }
  write_file(dir / "dataset.json", index.dump(1) + "\n");
}

LabeledDataset load_dataset(const std::filesystem::path& dir) {
  const auto index_path = dir / "dataset.json";
  if (!std::filesystem::exists(index_path)) {
    throw ArgumentError("no dataset.json in " + dir.string());
  }
  const auto index = nlohmann::json::parse(read_file(index_path));
  LabeledDataset ds;
  ds.profile = index.value("profile", "");
  ds.label_max = index.value("label_max", 4);
  for (const auto& entry : index.at("records")) {
    ds.records.push_back({entry.at("id").get<std::uint64_t>(),
                          load_tensor(dir / entry.at("file").get<std::string>()),
                          entry.at("label").get<int>()});
  }
  validate(ds);
  return ds;
}

}  // namespace ksalsa
