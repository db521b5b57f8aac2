#include "binreg/dataset.hpp"

#include <zlib.h>

#include <algorithm>
#include <fstream>
#include <numeric>
#include <sstream>
#include <string>

#include "binreg/error.hpp"
#include "binreg/rng.hpp"

namespace binreg {
namespace {

constexpr uint32_t kImageMagic = 0x00000803;
constexpr uint32_t kLabelMagic = 0x00000801;

// Whole-file read; transparently inflates gzip input.
std::vector<uint8_t> read_bytes(const std::filesystem::path& path) {
  gzFile file = gzopen(path.c_str(), "rb");
  if (file == nullptr) throw Error("cannot open " + path.string());
  std::vector<uint8_t> bytes;
  uint8_t buffer[1 << 16];
  int n;
  while ((n = gzread(file, buffer, sizeof(buffer))) > 0) {
    bytes.insert(bytes.end(), buffer, buffer + n);
  }
  const bool failed = n < 0;
  gzclose(file);
  if (failed) throw Error("read error in " + path.string());
  return bytes;
}

class IdxReader {
 public:
  IdxReader(std::vector<uint8_t> bytes, std::string name)
      : bytes_(std::move(bytes)), name_(std::move(name)) {}

  uint32_t u32() {
    require(4);
    const uint32_t v = (uint32_t{bytes_[pos_]} << 24) | (uint32_t{bytes_[pos_ + 1]} << 16) |
                       (uint32_t{bytes_[pos_ + 2]} << 8) | uint32_t{bytes_[pos_ + 3]};
    pos_ += 4;
    return v;
  }

  const uint8_t* take(size_t n) {
    require(n);
    const uint8_t* p = bytes_.data() + pos_;
    pos_ += n;
    return p;
  }

 private:
  void require(size_t n) const {
    if (bytes_.size() - pos_ < n) throw Error("truncated IDX file " + name_);
  }

  std::vector<uint8_t> bytes_;
  std::string name_;
  size_t pos_ = 0;
};

}  // namespace

void BinaryDataset::validate() const {
  if (class_count < 2) throw Error("dataset needs at least 2 classes");
  for (const Instance& inst : instances) {
    if (inst.x.size() != feature_count) throw Error("instance has wrong feature count");
    if (inst.label < 0 || inst.label >= class_count) throw Error("label out of range");
    for (uint8_t bit : inst.x) {
      if (bit > 1) throw Error("non-binary feature value");
    }
  }
}

RawDataset load_idx(const std::filesystem::path& images, const std::filesystem::path& labels,
                    int class_count) {
  if (class_count < 1 || class_count > 256) throw Error("class count must be in [1, 256]");
  IdxReader img(read_bytes(images), images.string());
  IdxReader lab(read_bytes(labels), labels.string());

  if (img.u32() != kImageMagic) throw Error("bad IDX image magic in " + images.string());
  if (lab.u32() != kLabelMagic) throw Error("bad IDX label magic in " + labels.string());
  const uint32_t image_count = img.u32();
  const size_t rows = img.u32();
  const size_t cols = img.u32();
  const uint32_t label_count = lab.u32();
  if (image_count != label_count) {
    throw Error("IDX image/label count mismatch: " + std::to_string(image_count) + " vs " +
                std::to_string(label_count));
  }

  RawDataset raw;
  raw.feature_count = rows * cols;
  raw.class_count = class_count;
  raw.instances.reserve(image_count);
  for (uint32_t i = 0; i < image_count; ++i) {
    const uint8_t* pixels = img.take(raw.feature_count);
    const int label = *lab.take(1);
    if (label >= class_count) {
      throw Error("IDX label " + std::to_string(label) + " outside " +
                  std::to_string(class_count) + " classes");
    }
    raw.instances.push_back({{pixels, pixels + raw.feature_count}, label});
  }
  return raw;
}

BinaryDataset load_csv(const std::filesystem::path& path, std::optional<int> class_count) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  BinaryDataset ds;
  int max_label = -1;
  std::string line;
  size_t line_no = 0;
  bool first = true;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<long> fields;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      try {
        size_t used = 0;
        fields.push_back(std::stol(cell, &used));
        if (cell.find_first_not_of(" \t", used) != std::string::npos) throw Error("");
      } catch (const std::exception&) {
        throw Error(path.string() + ":" + std::to_string(line_no) + ": bad value '" + cell + "'");
      }
    }
    if (fields.size() < 2) {
      throw Error(path.string() + ":" + std::to_string(line_no) + ": need features and a label");
    }
    if (first) {
      ds.feature_count = fields.size() - 1;
      first = false;
    } else if (fields.size() - 1 != ds.feature_count) {
      throw Error(path.string() + ":" + std::to_string(line_no) + ": ragged row");
    }
    Instance inst;
    inst.x.reserve(ds.feature_count);
    for (size_t f = 0; f < ds.feature_count; ++f) {
      if (fields[f] != 0 && fields[f] != 1) {
        throw Error(path.string() + ":" + std::to_string(line_no) + ": non-binary feature value " +
                    std::to_string(fields[f]));
      }
      inst.x.push_back(static_cast<uint8_t>(fields[f]));
    }
    if (fields.back() < 0) {
      throw Error(path.string() + ":" + std::to_string(line_no) + ": negative label");
    }
    inst.label = static_cast<int>(fields.back());
    max_label = std::max(max_label, inst.label);
    ds.instances.push_back(std::move(inst));
  }
  if (class_count) {
    if (max_label >= *class_count) throw Error(path.string() + ": label exceeds class count");
    ds.class_count = *class_count;
  } else {
    ds.class_count = std::max(2, max_label + 1);
  }
  return ds;
}

void write_csv(const BinaryDataset& ds, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  for (const Instance& inst : ds.instances) {
    for (uint8_t bit : inst.x) out << static_cast<int>(bit) << ',';
    out << inst.label << '\n';
  }
  if (!out) throw Error("write failed for " + path.string());
}

BinaryDataset binarize(const RawDataset& raw, Rational threshold) {
  if (threshold < Rational(0) || Rational(255) < threshold) {
    throw Error("threshold must lie in [0, 255]");
  }
  BinaryDataset ds;
  ds.feature_count = raw.feature_count;
  ds.class_count = raw.class_count;
  ds.instances.reserve(raw.instances.size());
  for (const RawInstance& r : raw.instances) {
    Instance inst;
    inst.label = r.label;
    inst.x.reserve(r.values.size());
    // value > num/den  <=>  value*den > num (den > 0)
    for (uint8_t v : r.values) inst.x.push_back(int64_t{v} * threshold.den > threshold.num);
    ds.instances.push_back(std::move(inst));
  }
  return ds;
}

std::pair<BinaryDataset, BinaryDataset> split(const BinaryDataset& ds, const SplitSpec& spec) {
  if (spec.train_count >= ds.size()) {
    throw Error("train count " + std::to_string(spec.train_count) +
                " must be smaller than the dataset size " + std::to_string(ds.size()));
  }
  std::vector<size_t> order(ds.size());
  std::iota(order.begin(), order.end(), size_t{0});
  Rng rng(spec.seed);
  rng.shuffle(std::span(order));

  BinaryDataset train{{}, ds.feature_count, ds.class_count};
  BinaryDataset test{{}, ds.feature_count, ds.class_count};
  train.instances.reserve(spec.train_count);
  test.instances.reserve(ds.size() - spec.train_count);
  for (size_t n = 0; n < order.size(); ++n) {
    (n < spec.train_count ? train : test).instances.push_back(ds.instances[order[n]]);
  }
  return {std::move(train), std::move(test)};
}

size_t corruption_count(const Rational& fraction, size_t k) {
  if (fraction < Rational(0) || Rational(1) < fraction) {
    throw Error("corruption fraction must lie in [0, 1]");
  }
  // floor(fraction*k + 1/2) = floor((2*num*k + den) / (2*den))
  const __int128 numerator = 2 * static_cast<__int128>(fraction.num) * k + fraction.den;
  return static_cast<size_t>(numerator / (2 * static_cast<__int128>(fraction.den)));
}

BinaryDataset corrupt_labels(const BinaryDataset& train, const CorruptionSpec& spec) {
  const size_t count = corruption_count(spec.fraction, train.size());
  if (spec.fraction.num > 0 && train.class_count < 2) {
    throw Error("label corruption needs at least 2 classes");
  }
  BinaryDataset out = train;
  if (count == 0) return out;

  Rng rng(spec.seed);
  std::vector<size_t> order(train.size());
  std::iota(order.begin(), order.end(), size_t{0});
  // Partial Fisher-Yates: the first `count` slots are a uniform sample.
  for (size_t i = 0; i < count; ++i) {
    const size_t j = i + rng.below(order.size() - i);
    std::swap(order[i], order[j]);
  }
  const auto others = static_cast<uint64_t>(train.class_count - 1);
  for (size_t i = 0; i < count; ++i) {
    Instance& inst = out.instances[order[i]];
    const int draw = static_cast<int>(rng.below(others));
    inst.label = draw < inst.label ? draw : draw + 1;
  }
  return out;
}

}  // namespace binreg
