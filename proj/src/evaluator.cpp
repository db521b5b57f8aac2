#include "binreg/evaluator.hpp"

#include <algorithm>
#include <limits>
#include <string>

#include "binreg/error.hpp"

namespace binreg {

std::vector<int64_t> predict_scores(const TrainedModel& model, std::span<const uint8_t> x) {
  if (x.size() != model.feature_count) {
    throw Error("feature vector has " + std::to_string(x.size()) + " entries, model expects " +
                std::to_string(model.feature_count));
  }
  std::vector<int64_t> scores(model.bias.begin(), model.bias.end());
  for (size_t f = 0; f < model.feature_count; ++f) {
    if (x[f] == 0) continue;
    for (size_t c = 0; c < model.class_count; ++c) scores[c] += model.weight(f, c);
  }
  return scores;
}

int predict_label(const TrainedModel& model, std::span<const uint8_t> x) {
  const auto scores = predict_scores(model, x);
  // max_element returns the first maximum.
  return static_cast<int>(std::max_element(scores.begin(), scores.end()) - scores.begin());
}

int64_t margin(const TrainedModel& model, std::span<const uint8_t> x, int label) {
  if (model.class_count < 2) throw Error("margin needs at least two classes");
  if (label < 0 || static_cast<size_t>(label) >= model.class_count) {
    throw Error("label " + std::to_string(label) + " out of range");
  }
  const auto scores = predict_scores(model, x);
  int64_t rival = std::numeric_limits<int64_t>::min();
  for (size_t c = 0; c < scores.size(); ++c) {
    if (static_cast<int>(c) != label) rival = std::max(rival, scores[c]);
  }
  return scores[label] - rival;
}

EvalReport accuracy(const TrainedModel& model, const BinaryDataset& ds) {
  if (ds.empty()) throw Error("cannot evaluate on an empty dataset");
  EvalReport report;
  report.total = ds.size();
  for (const Instance& row : ds.instances) {
    if (predict_label(model, row.x) == row.label) ++report.correct;
    report.margin_sum += margin(model, row.x, row.label);
  }
  report.accuracy = static_cast<double>(report.correct) / static_cast<double>(report.total);
  report.mean_margin = static_cast<double>(report.margin_sum) / static_cast<double>(report.total);
  report.reduction_pct = model_size_reduction(model);
  return report;
}

double model_size_reduction(const TrainedModel& model) {
  if (model.weights.empty()) return 0.0;
  const auto zeros = std::count(model.weights.begin(), model.weights.end(), int8_t{0});
  return 100.0 * static_cast<double>(zeros) / static_cast<double>(model.weights.size());
}

}  // namespace binreg
