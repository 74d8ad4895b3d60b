#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "ksalsa/tensor.hpp"

namespace ksalsa {

struct Record {
  std::uint64_t id = 0;
  Tensor image;  // C x H x W, values in [-1, 1]
  int label = 0;
};

struct LabeledDataset {
  std::string profile;
  int label_max = 4;
  std::vector<Record> records;

  std::vector<std::uint64_t> ids() const;
  std::vector<Tensor> images() const;
};

// Unique ids, one image shape, labels within [0, label_max].
void validate(const LabeledDataset& dataset);

// Directory layout: dataset.json listing {"id", "label", "file"} per record,
// with each image stored as a KSTN file next to it.
void save_dataset(const std::filesystem::path& dir, const LabeledDataset& dataset);
LabeledDataset load_dataset(const std::filesystem::path& dir);

}  // namespace ksalsa
