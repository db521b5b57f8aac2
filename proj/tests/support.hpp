#pragma once

#include <array>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "binreg/dataset.hpp"
#include "binreg/encoder.hpp"
#include "binreg/rng.hpp"

namespace binreg::testing {

inline std::filesystem::path source_dir() { return BINREG_SOURCE_DIR; }

inline std::filesystem::path fresh_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("binreg_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline BinaryDataset make_dataset(size_t features, int classes,
                                  std::vector<std::pair<std::vector<uint8_t>, int>> rows) {
  BinaryDataset ds;
  ds.feature_count = features;
  ds.class_count = classes;
  for (auto& [x, label] : rows) ds.instances.push_back({std::move(x), label});
  return ds;
}

inline BinaryDataset random_dataset(Rng& rng, size_t features, int classes, size_t rows) {
  BinaryDataset ds;
  ds.feature_count = features;
  ds.class_count = classes;
  for (size_t i = 0; i < rows; ++i) {
    Instance row;
    for (size_t f = 0; f < features; ++f) row.x.push_back(static_cast<uint8_t>(rng.below(2)));
    row.label = static_cast<int>(rng.below(classes));
    ds.instances.push_back(std::move(row));
  }
  return ds;
}

inline const std::array<Hyperparams, 3>& suite_hyperparams() {
  static const std::array<Hyperparams, 3> hp{Hyperparams{1, 2}, Hyperparams{2, 5},
                                             Hyperparams{5, 10}};
  return hp;
}

struct TinyCase {
  BinaryDataset train;
  Hyperparams hp;
};

// Seeded instances with |F| <= 3, 2 <= |C| <= 3, 1 <= |I| <= 4.
inline std::vector<TinyCase> tiny_suite(size_t count = 24, uint64_t seed = 20240611) {
  Rng rng(seed);
  std::vector<TinyCase> cases;
  for (size_t n = 0; n < count; ++n) {
    const size_t features = 1 + rng.below(3);
    const int classes = 2 + static_cast<int>(rng.below(2));
    const size_t rows = 1 + rng.below(4);
    cases.push_back({random_dataset(rng, features, classes, rows), suite_hyperparams()[n % 3]});
  }
  return cases;
}

// The 2-feature, 2-class, 3-instance example.
inline BinaryDataset toy_2x2x3() {
  return make_dataset(2, 2, {{{1, 0}, 0}, {{0, 1}, 1}, {{1, 1}, 1}});
}

// Independent optimum of the training objective for beta > alpha: every
// W in {-1,0,1}^{FxC} and b in [-F,F]^C is scored from margins directly,
// cost(m) = -alpha * max(0, m) + beta * max(0, -m), plus the weight count,
// all scaled by the common denominator.
struct DirectOptimum {
  int64_t objective = std::numeric_limits<int64_t>::max();
  TrainedModel model;
};

inline DirectOptimum direct_optimum(const BinaryDataset& ds, const Hyperparams& hp) {
  const size_t F = ds.feature_count;
  const size_t C = static_cast<size_t>(ds.class_count);
  const int64_t scale = lcm_checked(hp.alpha.den, hp.beta.den);
  const int64_t a = hp.alpha.num * (scale / hp.alpha.den);
  const int64_t b = hp.beta.num * (scale / hp.beta.den);
  const auto bias_range = static_cast<int64_t>(F);

  DirectOptimum best;
  TrainedModel m = TrainedModel::zeros(F, C);
  std::function<void(size_t)> weights;
  std::function<void(size_t)> biases = [&](size_t c) {
    if (c == C) {
      int64_t total = 0;
      for (int8_t w : m.weights) total += scale * (w != 0);
      for (const Instance& row : ds.instances) {
        std::vector<int64_t> y(C);
        for (size_t k = 0; k < C; ++k) {
          y[k] = m.bias[k];
          for (size_t f = 0; f < F; ++f) y[k] += m.weight(f, k) * row.x[f];
        }
        int64_t rival = std::numeric_limits<int64_t>::min();
        for (size_t k = 0; k < C; ++k) {
          if (static_cast<int>(k) != row.label) rival = std::max(rival, y[k]);
        }
        const int64_t margin = y[row.label] - rival;
        total += margin >= 0 ? -a * margin : b * -margin;
      }
      if (total < best.objective) {
        best.objective = total;
        best.model = m;
      }
      return;
    }
    for (int64_t v = -bias_range; v <= bias_range; ++v) {
      m.bias[c] = v;
      biases(c + 1);
    }
  };
  weights = [&](size_t k) {
    if (k == m.weights.size()) {
      biases(0);
      return;
    }
    for (int w = -1; w <= 1; ++w) {
      m.weights[k] = static_cast<int8_t>(w);
      weights(k + 1);
    }
  };
  weights(0);
  return best;
}

}  // namespace binreg::testing
