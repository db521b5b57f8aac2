#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <utility>
#include <vector>

#include "binreg/rational.hpp"

namespace binreg {

// Grayscale instance as read from an IDX file; values are in [0, 255].
struct RawInstance {
  std::vector<uint8_t> values;
  int label = 0;
};

struct RawDataset {
  std::vector<RawInstance> instances;
  size_t feature_count = 0;
  int class_count = 0;
};

// One training or test row: a bit vector and its class.
struct Instance {
  std::vector<uint8_t> x;  // each entry is 0 or 1
  int label = 0;

  friend bool operator==(const Instance&, const Instance&) = default;
};

struct BinaryDataset {
  std::vector<Instance> instances;
  size_t feature_count = 0;
  int class_count = 2;

  size_t size() const { return instances.size(); }
  bool empty() const { return instances.empty(); }

  // Throws if any row breaks the bit/label invariants.
  void validate() const;
};

struct SplitSpec {
  size_t train_count = 0;
  uint64_t seed = 0;
};

struct CorruptionSpec {
  Rational fraction{0};
  uint64_t seed = 0;
};

// Reads an IDX image file (magic 0x00000803) and label file (0x00000801).
// Gzip-compressed files are detected by their header and inflated.
RawDataset load_idx(const std::filesystem::path& images, const std::filesystem::path& labels,
                    int class_count = 10);

// Rows of `x_1,...,x_F,label` with x in {0,1}. The feature count comes from
// the first row; the class count is max(label)+1 (at least 2) unless given.
BinaryDataset load_csv(const std::filesystem::path& path,
                       std::optional<int> class_count = std::nullopt);

void write_csv(const BinaryDataset& ds, const std::filesystem::path& path);

// bit = 1 iff value > threshold.
BinaryDataset binarize(const RawDataset& raw, Rational threshold = Rational(255, 2));

// Seeded shuffle, then the first k instances train and the rest test.
std::pair<BinaryDataset, BinaryDataset> split(const BinaryDataset& ds, const SplitSpec& spec);

// Number of labels corrupt_labels changes: fraction * k rounded half up.
size_t corruption_count(const Rational& fraction, size_t k);

// Reassigns exactly corruption_count() labels, chosen uniformly without
// replacement, each to a uniformly drawn different class.
BinaryDataset corrupt_labels(const BinaryDataset& train, const CorruptionSpec& spec);

}  // namespace binreg
