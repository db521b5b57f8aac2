#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "binreg/dataset.hpp"
#include "binreg/encoder.hpp"

namespace binreg {

struct EvalReport {
  size_t correct = 0;
  size_t total = 0;
  double accuracy = 0.0;
  // Sums are exact; these are the quotients.
  int64_t margin_sum = 0;
  double mean_margin = 0.0;
  double reduction_pct = 0.0;

  friend bool operator==(const EvalReport&, const EvalReport&) = default;
};

// score[c] = sum_f W[f][c] * x[f] + b[c].
std::vector<int64_t> predict_scores(const TrainedModel& model, std::span<const uint8_t> x);

// Argmax of the scores; ties go to the lowest class index.
int predict_label(const TrainedModel& model, std::span<const uint8_t> x);

// y_label - max_{c != label} y_c.
int64_t margin(const TrainedModel& model, std::span<const uint8_t> x, int label);

EvalReport accuracy(const TrainedModel& model, const BinaryDataset& ds);

// Percentage of weight positions that are exactly zero.
double model_size_reduction(const TrainedModel& model);

}  // namespace binreg
