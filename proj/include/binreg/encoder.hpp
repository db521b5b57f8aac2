#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "binreg/dataset.hpp"
#include "binreg/model_ir.hpp"
#include "binreg/rational.hpp"

namespace binreg {

// Weights of the margin terms in the training objective.
struct Hyperparams {
  Rational alpha{1};  // reward per unit of margin on correctly classified rows
  Rational beta{2};   // penalty per unit of margin on misclassified rows

  // beta = 2 * alpha.
  static Hyperparams with_default_beta(Rational alpha);
  void validate() const;
};

// Bounds of one integer variable and the number of bits that represent it:
// bits = ceil(log2(upper - lower + 1)). bits == 0 means the value is the
// constant `lower`.
struct QuantizationScheme {
  int64_t lower = 0;
  int64_t upper = 0;
  int bits = 0;

  static QuantizationScheme for_range(int64_t lower, int64_t upper);
};

// Bounds shared by every bias, prediction and margin variable.
struct BoundsPolicy {
  QuantizationScheme bias;        // b_c
  QuantizationScheme prediction;  // y_{c,i}
  QuantizationScheme margin;      // e+_i and e-_i
};

// b in [-|F|, |F|], y in [-2|F|, 2|F|], e in [0, 4|F|].
BoundsPolicy default_bounds(const BinaryDataset& train);

// Integer quantity expressed over model variables: offset + sum(coef * var).
// A plain integer variable is {{var, 1}}, 0; a quantized one is
// {{bit_1, 1}, {bit_2, 2}, ...}, lower.
struct EncodedValue {
  std::vector<Term> terms;
  int64_t offset = 0;

  int64_t value(std::span<const int64_t> assignment) const;
  double value(std::span<const double> assignment) const;
  // Writes `v` into the underlying variables. Throws if not representable.
  void store(Assignment& assignment, int64_t v) const;
};

// Where each logical quantity of the training model lives in a ModelIR.
struct EncodingLayout {
  size_t feature_count = 0;
  size_t class_count = 0;
  size_t instance_count = 0;
  std::vector<int> labels;  // training labels, one per instance

  std::vector<VarId> w_plus;   // index f * C + c
  std::vector<VarId> w_minus;  // index f * C + c
  std::vector<EncodedValue> bias;          // index c
  std::vector<EncodedValue> prediction;    // index c * I + i
  std::vector<EncodedValue> margin_plus;   // index i
  std::vector<EncodedValue> margin_minus;  // index i

  size_t weight_index(size_t f, size_t c) const { return f * class_count + c; }
  const EncodedValue& y(size_t c, size_t i) const { return prediction[c * instance_count + i]; }
};

struct Encoding {
  ModelIR model;
  EncodingLayout layout;
  // Objective = scale * (sum |w|) - alpha_scaled * sum e+ + beta_scaled * sum e-,
  // where scale is the least common denominator of alpha and beta.
  int64_t scale = 1;
  int64_t alpha_scaled = 1;
  int64_t beta_scaled = 2;
  BoundsPolicy bounds;
};

// Learned weights in {-1, 0, 1} and integer biases.
struct TrainedModel {
  size_t feature_count = 0;
  size_t class_count = 0;
  std::vector<int8_t> weights;  // index f * class_count + c
  std::vector<int64_t> bias;

  int weight(size_t f, size_t c) const { return weights[f * class_count + c]; }
  void set_weight(size_t f, size_t c, int w) { weights[f * class_count + c] = static_cast<int8_t>(w); }
  static TrainedModel zeros(size_t feature_count, size_t class_count);
  void validate() const;

  friend bool operator==(const TrainedModel&, const TrainedModel&) = default;
};

Encoding build_mip(const BinaryDataset& train, const Hyperparams& hp);
Encoding build_mip(const BinaryDataset& train, const Hyperparams& hp, const BoundsPolicy& bounds);

// Same model with every integer variable replaced by its binary expansion.
Encoding build_pbo(const BinaryDataset& train, const Hyperparams& hp, const BoundsPolicy& bounds);

struct QuantizedModel {
  ModelIR model;
  std::vector<EncodedValue> original;  // per variable of the input model
};

// Replaces each Integer variable x by lower + sum_{q=1..Q} 2^(q-1) x_q over
// fresh binaries, substitutes it everywhere and adds
// lower + sum 2^(q-1) x_q <= upper. Binary variables are carried over.
QuantizedModel quantize_integers(const ModelIR& model);

// W = w+ - w-, b read through the layout. Throws on partial or infeasible
// assignments.
TrainedModel decode_solution(const ModelIR& model, const EncodingLayout& layout,
                             std::span<const int64_t> assignment);

// Full assignment for the given weights and biases: predictions from the
// weighted sums and the cheapest margin pair for each instance. With
// beta > alpha this is e+ = max(0, m), e- = max(0, -m).
Assignment complete_assignment(const Encoding& enc, const TrainedModel& params);

// Fills predictions and margins in place from the weights and biases
// already present in `assignment`. Used by the exhaustive oracle.
std::function<void(Assignment&)> completion_from_weights(const Encoding& enc);

// Variables the exhaustive oracle has to enumerate: weights and bias bits.
std::vector<VarId> enumerable_variables(const Encoding& enc);

// Objective of `params` computed straight from margins and weight counts,
// in the scaled units of the encoding.
int64_t training_objective(const Encoding& enc, const TrainedModel& params);

// Rounds an LP point to the nearest weights in {-1,0,1}, rounds the biases,
// completes predictions and margins, then improves the result by single
// weight/bias moves. Returns nothing if the completion is infeasible.
std::function<std::optional<Assignment>(std::span<const double>)> make_rounding_heuristic(
    const Encoding& enc);

}  // namespace binreg
