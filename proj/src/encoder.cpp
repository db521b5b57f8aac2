#include "binreg/encoder.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <string>

#include "binreg/error.hpp"

namespace binreg {
namespace {

std::string idx(size_t a) { return std::to_string(a); }
std::string idx(size_t a, size_t b) { return std::to_string(a) + "_" + std::to_string(b); }

EncodedValue direct(VarId v) { return {{{v, 1}}, 0}; }

// Cheapest (e+, e-) for margin m: minimize -alpha*e+ + beta*e- subject to
// e+ - e- <= m and both in [lo, hi]. The cost is convex piecewise linear in
// e+ with one breakpoint, so three candidates suffice.
struct MarginChoice {
  int64_t plus = 0;
  int64_t minus = 0;
  int64_t cost = 0;
  bool feasible = false;
};

MarginChoice best_margin_pair(int64_t m, int64_t alpha, int64_t beta, const QuantizationScheme& e) {
  MarginChoice best;
  const int64_t top = std::min(e.upper, e.upper + m);
  if (top < e.lower) return best;
  const int64_t candidates[] = {e.lower, std::clamp(m + e.lower, e.lower, top), top};
  for (int64_t plus : candidates) {
    const int64_t minus = std::max(e.lower, plus - m);
    const int64_t cost = -alpha * plus + beta * minus;
    if (!best.feasible || cost < best.cost || (cost == best.cost && plus < best.plus)) {
      best = {plus, minus, cost, true};
    }
  }
  return best;
}

int64_t instance_margin(std::span<const int64_t> scores, int label) {
  int64_t rival = std::numeric_limits<int64_t>::min();
  for (size_t c = 0; c < scores.size(); ++c) {
    if (static_cast<int>(c) != label) rival = std::max(rival, scores[c]);
  }
  return scores[label] - rival;
}

// Scores and margins of a weight/bias choice on the training rows, with
// incremental single-move updates for the local search.
class MarginState {
 public:
  MarginState(const Encoding& enc, const std::vector<std::vector<uint32_t>>& active,
              TrainedModel params)
      : enc_(enc), active_(active), params_(std::move(params)) {
    const auto& lay = enc_.layout;
    scores_.assign(lay.instance_count * lay.class_count, 0);
    for (size_t f = 0; f < lay.feature_count; ++f) {
      for (size_t c = 0; c < lay.class_count; ++c) {
        const int w = params_.weight(f, c);
        if (w == 0) continue;
        nonzero_ += 1;
        for (uint32_t i : active_[f]) score(i, c) += w;
      }
    }
    for (size_t i = 0; i < lay.instance_count; ++i) {
      for (size_t c = 0; c < lay.class_count; ++c) score(i, c) += params_.bias[c];
    }
    cost_.resize(lay.instance_count);
    all_.resize(lay.instance_count);
    for (size_t i = 0; i < lay.instance_count; ++i) {
      cost_[i] = instance_cost(i);
      all_[i] = static_cast<uint32_t>(i);
    }
  }

  const TrainedModel& params() const { return params_; }

  std::optional<int64_t> objective() const {
    int64_t total = enc_.scale * nonzero_;
    for (const auto& c : cost_) {
      if (!c) return std::nullopt;
      total += *c;
    }
    return total;
  }

  // Tries w[f][c] := w; keeps it if the objective strictly drops.
  bool try_weight(size_t f, size_t c, int w) {
    const int old = params_.weight(f, c);
    if (old == w) return false;
    const int delta = w - old;
    apply_column(active_[f], c, delta);
    const auto change = accumulate_change(active_[f], enc_.scale * ((w != 0) - (old != 0)));
    if (change && *change < 0) {
      params_.set_weight(f, c, w);
      nonzero_ += (w != 0) - (old != 0);
      commit(active_[f]);
      return true;
    }
    apply_column(active_[f], c, -delta);
    return false;
  }

  bool try_bias(size_t c, int delta) {
    const auto& q = enc_.bounds.bias;
    const int64_t target = params_.bias[c] + delta;
    if (target < q.lower || target > q.upper) return false;
    apply_column(all_, c, delta);
    const auto change = accumulate_change(all_, 0);
    if (change && *change < 0) {
      params_.bias[c] = target;
      commit(all_);
      return true;
    }
    apply_column(all_, c, -delta);
    return false;
  }

 private:
  int64_t& score(size_t i, size_t c) { return scores_[i * enc_.layout.class_count + c]; }

  std::optional<int64_t> instance_cost(size_t i) const {
    const size_t C = enc_.layout.class_count;
    const std::span<const int64_t> s(scores_.data() + i * C, C);
    const auto& y = enc_.bounds.prediction;
    for (int64_t v : s) {
      if (v < y.lower || v > y.upper) return std::nullopt;
    }
    const MarginChoice pick = best_margin_pair(instance_margin(s, enc_.layout.labels[i]),
                                               enc_.alpha_scaled, enc_.beta_scaled,
                                               enc_.bounds.margin);
    if (!pick.feasible) return std::nullopt;
    return pick.cost;
  }

  void apply_column(const std::vector<uint32_t>& rows, size_t c, int delta) {
    for (uint32_t i : rows) score(i, c) += delta;
  }

  // Cost change of the rows after a tentative score update; nothing if a row
  // loses its feasible completion.
  std::optional<int64_t> accumulate_change(const std::vector<uint32_t>& rows, int64_t change) {
    pending_.clear();
    for (uint32_t i : rows) {
      auto next = instance_cost(i);
      if (!next || !cost_[i]) return std::nullopt;
      pending_.push_back(next);
      change += *next - *cost_[i];
    }
    return change;
  }

  void commit(const std::vector<uint32_t>& rows) {
    for (size_t k = 0; k < rows.size(); ++k) cost_[rows[k]] = pending_[k];
  }

  const Encoding& enc_;
  const std::vector<std::vector<uint32_t>>& active_;
  TrainedModel params_;
  std::vector<int64_t> scores_;
  std::vector<std::optional<int64_t>> cost_;
  std::vector<std::optional<int64_t>> pending_;
  std::vector<uint32_t> all_;
  int64_t nonzero_ = 0;
};

void check_training_set(const BinaryDataset& train) {
  if (train.empty()) throw Error("training set is empty");
  if (train.class_count < 2) throw Error("training needs at least 2 classes");
  train.validate();
}

}  // namespace

Hyperparams Hyperparams::with_default_beta(Rational alpha) {
  return {alpha, alpha * Rational(2)};
}

void Hyperparams::validate() const {
  if (!(Rational(0) < alpha)) throw Error("alpha must be positive");
  if (!(Rational(0) < beta)) throw Error("beta must be positive");
}

QuantizationScheme QuantizationScheme::for_range(int64_t lower, int64_t upper) {
  if (lower > upper) throw Error("quantization range is empty");
  const auto span = static_cast<uint64_t>(static_cast<__int128>(upper) - lower);
  // ceil(log2(span + 1)) is the bit width of span.
  return {lower, upper, static_cast<int>(std::bit_width(span))};
}

BoundsPolicy default_bounds(const BinaryDataset& train) {
  const auto f = static_cast<int64_t>(train.feature_count);
  return {QuantizationScheme::for_range(-f, f), QuantizationScheme::for_range(-2 * f, 2 * f),
          QuantizationScheme::for_range(0, 4 * f)};
}

int64_t EncodedValue::value(std::span<const int64_t> assignment) const {
  int64_t v = offset;
  for (const Term& t : terms) v += t.coef * assignment[t.var.index];
  return v;
}

double EncodedValue::value(std::span<const double> assignment) const {
  double v = static_cast<double>(offset);
  for (const Term& t : terms) v += static_cast<double>(t.coef) * assignment[t.var.index];
  return v;
}

void EncodedValue::store(Assignment& assignment, int64_t v) const {
  if (terms.size() == 1 && terms[0].coef == 1) {
    assignment[terms[0].var.index] = v - offset;
    return;
  }
  int64_t rest = v - offset;
  if (rest < 0) throw Error("value below the encoded range");
  for (const Term& t : terms) {  // bits with coefficients 1, 2, 4, ...
    assignment[t.var.index] = (rest & t.coef) ? 1 : 0;
    rest &= ~t.coef;
  }
  if (rest != 0) throw Error("value above the encoded range");
}

TrainedModel TrainedModel::zeros(size_t feature_count, size_t class_count) {
  return {feature_count, class_count, std::vector<int8_t>(feature_count * class_count, 0),
          std::vector<int64_t>(class_count, 0)};
}

void TrainedModel::validate() const {
  if (weights.size() != feature_count * class_count) throw Error("weight matrix has wrong size");
  if (bias.size() != class_count) throw Error("bias vector has wrong size");
  for (int8_t w : weights) {
    if (w < -1 || w > 1) throw Error("weight outside {-1, 0, 1}");
  }
}

Encoding build_mip(const BinaryDataset& train, const Hyperparams& hp) {
  return build_mip(train, hp, default_bounds(train));
}

Encoding build_mip(const BinaryDataset& train, const Hyperparams& hp, const BoundsPolicy& bounds) {
  check_training_set(train);
  hp.validate();

  Encoding enc;
  enc.bounds = bounds;
  enc.scale = lcm_checked(hp.alpha.den, hp.beta.den);
  enc.alpha_scaled = hp.alpha.num * (enc.scale / hp.alpha.den);
  enc.beta_scaled = hp.beta.num * (enc.scale / hp.beta.den);

  const size_t F = train.feature_count;
  const size_t C = static_cast<size_t>(train.class_count);
  const size_t I = train.size();
  EncodingLayout& lay = enc.layout;
  lay.feature_count = F;
  lay.class_count = C;
  lay.instance_count = I;
  for (const Instance& inst : train.instances) lay.labels.push_back(inst.label);

  ModelIR& m = enc.model;
  lay.w_plus.resize(F * C);
  lay.w_minus.resize(F * C);
  for (size_t f = 0; f < F; ++f) {
    for (size_t c = 0; c < C; ++c) {
      lay.w_plus[f * C + c] = m.add_variable("w+_" + idx(f, c), Domain::kBinary, 0, 1);
      lay.w_minus[f * C + c] = m.add_variable("w-_" + idx(f, c), Domain::kBinary, 0, 1);
    }
  }
  for (size_t c = 0; c < C; ++c) {
    lay.bias.push_back(direct(
        m.add_variable("b_" + idx(c), Domain::kInteger, bounds.bias.lower, bounds.bias.upper)));
  }
  for (size_t c = 0; c < C; ++c) {
    for (size_t i = 0; i < I; ++i) {
      lay.prediction.push_back(direct(m.add_variable("y_" + idx(c, i), Domain::kInteger,
                                                     bounds.prediction.lower,
                                                     bounds.prediction.upper)));
    }
  }
  for (size_t i = 0; i < I; ++i) {
    lay.margin_plus.push_back(direct(m.add_variable("ep_" + idx(i), Domain::kInteger,
                                                    bounds.margin.lower, bounds.margin.upper)));
    lay.margin_minus.push_back(direct(m.add_variable("em_" + idx(i), Domain::kInteger,
                                                     bounds.margin.lower, bounds.margin.upper)));
  }

  // A weight cannot be both positive and negative.
  for (size_t f = 0; f < F; ++f) {
    for (size_t c = 0; c < C; ++c) {
      LinearExpr e;
      e.add(lay.w_plus[f * C + c], 1).add(lay.w_minus[f * C + c], 1);
      m.add_constraint(e, Sense::kLessEqual, 1, "sign_" + idx(f, c));
    }
  }
  // Prediction = weighted sum of active features + bias.
  for (size_t c = 0; c < C; ++c) {
    for (size_t i = 0; i < I; ++i) {
      LinearExpr e;
      const auto& x = train.instances[i].x;
      for (size_t f = 0; f < F; ++f) {
        if (x[f] == 0) continue;
        e.add(lay.w_plus[f * C + c], 1).add(lay.w_minus[f * C + c], -1);
      }
      e.add(lay.bias[c].terms[0].var, 1).add(lay.y(c, i).terms[0].var, -1);
      m.add_constraint(e, Sense::kEqual, 0, "pred_" + idx(c, i));
    }
  }
  // True-class prediction beats every rival by at least e+ - e-.
  for (size_t i = 0; i < I; ++i) {
    const auto label = static_cast<size_t>(lay.labels[i]);
    for (size_t c = 0; c < C; ++c) {
      if (c == label) continue;
      LinearExpr e;
      e.add(lay.y(label, i).terms[0].var, 1)
          .add(lay.y(c, i).terms[0].var, -1)
          .add(lay.margin_plus[i].terms[0].var, -1)
          .add(lay.margin_minus[i].terms[0].var, 1);
      m.add_constraint(e, Sense::kGreaterEqual, 0, "margin_" + idx(i, c));
    }
  }

  LinearExpr objective;
  for (size_t k = 0; k < F * C; ++k) {
    objective.add(lay.w_plus[k], enc.scale).add(lay.w_minus[k], enc.scale);
  }
  for (size_t i = 0; i < I; ++i) {
    objective.add(lay.margin_plus[i].terms[0].var, -enc.alpha_scaled);
    objective.add(lay.margin_minus[i].terms[0].var, enc.beta_scaled);
  }
  m.set_objective(std::move(objective));
  return enc;
}

QuantizedModel quantize_integers(const ModelIR& model) {
  QuantizedModel out;
  ModelIR& q = out.model;
  struct Range {
    std::string name;
    int64_t span;
  };
  std::vector<std::pair<size_t, Range>> ranges;
  for (const Variable& v : model.variables()) {
    if (v.domain == Domain::kBinary) {
      out.original.push_back(direct(q.add_variable(v.name, Domain::kBinary, 0, 1)));
      continue;
    }
    const QuantizationScheme s = QuantizationScheme::for_range(v.lower, v.upper);
    if (s.bits > 62) throw Error("variable '" + v.name + "' needs too many bits");
    EncodedValue enc{{}, v.lower};
    for (int bit = 1; bit <= s.bits; ++bit) {
      const VarId b = q.add_variable(v.name + ".q" + std::to_string(bit), Domain::kBinary, 0, 1);
      enc.terms.push_back({b, int64_t{1} << (bit - 1)});
    }
    if (s.bits > 0) ranges.push_back({out.original.size(), {v.name, v.upper - v.lower}});
    out.original.push_back(std::move(enc));
  }

  auto substitute = [&](const LinearExpr& e) {
    LinearExpr r;
    r.add_constant(e.constant());
    for (const Term& t : e.terms()) {
      const EncodedValue& ev = out.original[t.var.index];
      for (const Term& bit : ev.terms) {
        const __int128 c = static_cast<__int128>(t.coef) * bit.coef;
        if (c > INT64_MAX || c < INT64_MIN) throw Error("coefficient overflow while quantizing");
        r.add(bit.var, static_cast<int64_t>(c));
      }
      r.add_constant(t.coef * ev.offset);
    }
    return r;
  };

  for (const Constraint& row : model.constraints()) {
    q.add_constraint(substitute(row.expr), row.sense, row.rhs, row.name);
  }
  for (const auto& [index, range] : ranges) {
    LinearExpr e;
    for (const Term& bit : out.original[index].terms) e.add(bit.var, bit.coef);
    q.add_constraint(e, Sense::kLessEqual, range.span, "range_" + range.name);
  }
  q.set_objective(substitute(model.objective()));
  return out;
}

Encoding build_pbo(const BinaryDataset& train, const Hyperparams& hp, const BoundsPolicy& bounds) {
  Encoding mip = build_mip(train, hp, bounds);
  QuantizedModel quantized = quantize_integers(mip.model);

  auto remap = [&](const EncodedValue& v) {
    EncodedValue r{{}, v.offset};
    for (const Term& t : v.terms) {
      const EncodedValue& inner = quantized.original[t.var.index];
      r.offset += t.coef * inner.offset;
      for (const Term& bit : inner.terms) r.terms.push_back({bit.var, t.coef * bit.coef});
    }
    return r;
  };
  auto remap_all = [&](std::vector<EncodedValue>& values) {
    for (EncodedValue& v : values) v = remap(v);
  };
  auto remap_binary = [&](std::vector<VarId>& vars) {
    for (VarId& v : vars) v = quantized.original[v.index].terms.at(0).var;
  };

  Encoding enc = std::move(mip);
  enc.model = std::move(quantized.model);
  remap_binary(enc.layout.w_plus);
  remap_binary(enc.layout.w_minus);
  remap_all(enc.layout.bias);
  remap_all(enc.layout.prediction);
  remap_all(enc.layout.margin_plus);
  remap_all(enc.layout.margin_minus);
  return enc;
}

TrainedModel decode_solution(const ModelIR& model, const EncodingLayout& layout,
                             std::span<const int64_t> assignment) {
  const Evaluation eval = evaluate(model, assignment);
  if (!eval.feasible) throw Error("cannot decode an infeasible assignment");
  TrainedModel out = TrainedModel::zeros(layout.feature_count, layout.class_count);
  for (size_t k = 0; k < layout.w_plus.size(); ++k) {
    out.weights[k] = static_cast<int8_t>(assignment[layout.w_plus[k].index] -
                                         assignment[layout.w_minus[k].index]);
  }
  for (size_t c = 0; c < layout.class_count; ++c) out.bias[c] = layout.bias[c].value(assignment);
  return out;
}

namespace {

// Shared by complete_assignment and the oracle completion.
void fill_predictions_and_margins(const Encoding& enc, const std::vector<int64_t>& scores,
                                  Assignment& a) {
  const auto& lay = enc.layout;
  const size_t C = lay.class_count;
  for (size_t i = 0; i < lay.instance_count; ++i) {
    const std::span<const int64_t> s(scores.data() + i * C, C);
    for (size_t c = 0; c < C; ++c) {
      const auto& y = lay.y(c, i);
      const auto& q = enc.bounds.prediction;
      // Out-of-range predictions are written clamped; the row then fails the
      // equality and evaluate() rejects the point.
      y.store(a, std::clamp(s[c], q.lower, q.upper));
    }
    const MarginChoice pick = best_margin_pair(instance_margin(s, lay.labels[i]),
                                               enc.alpha_scaled, enc.beta_scaled,
                                               enc.bounds.margin);
    const auto& e = enc.bounds.margin;
    lay.margin_plus[i].store(a, pick.feasible ? pick.plus : e.lower);
    lay.margin_minus[i].store(a, pick.feasible ? pick.minus : e.lower);
  }
}

std::vector<int64_t> scores_of(const Encoding& enc, const std::vector<std::vector<uint32_t>>& active,
                               const std::vector<int>& weights, const std::vector<int64_t>& bias) {
  const auto& lay = enc.layout;
  const size_t C = lay.class_count;
  std::vector<int64_t> scores(lay.instance_count * C, 0);
  for (size_t i = 0; i < lay.instance_count; ++i) {
    for (size_t c = 0; c < C; ++c) scores[i * C + c] = bias[c];
  }
  for (size_t f = 0; f < lay.feature_count; ++f) {
    for (size_t c = 0; c < C; ++c) {
      const int w = weights[f * C + c];
      if (w == 0) continue;
      for (uint32_t i : active[f]) scores[i * C + c] += w;
    }
  }
  return scores;
}

// Rows with x_f = 1, recovered from the prediction rows of the model: the
// training data itself is not stored in the encoding.
std::vector<std::vector<uint32_t>> active_rows(const Encoding& enc) {
  const auto& lay = enc.layout;
  const size_t C = lay.class_count;
  std::vector<std::vector<uint32_t>> active(lay.feature_count);
  std::vector<int32_t> feature_of(enc.model.num_variables(), -1);
  for (size_t f = 0; f < lay.feature_count; ++f) {
    feature_of[lay.w_plus[f * C].index] = static_cast<int32_t>(f);
  }
  // Prediction rows for class 0 come right after the F*C sign rows.
  const auto& rows = enc.model.constraints();
  const size_t first = lay.feature_count * C;
  for (size_t i = 0; i < lay.instance_count; ++i) {
    for (const Term& t : rows.at(first + i).expr.terms()) {
      const int32_t f = feature_of[t.var.index];
      if (f >= 0) active[f].push_back(static_cast<uint32_t>(i));
    }
  }
  return active;
}

}  // namespace

Assignment complete_assignment(const Encoding& enc, const TrainedModel& params) {
  const auto& lay = enc.layout;
  if (params.feature_count != lay.feature_count || params.class_count != lay.class_count) {
    throw Error("model shape does not match the encoding");
  }
  Assignment a(enc.model.num_variables(), 0);
  std::vector<int> weights(params.weights.begin(), params.weights.end());
  for (size_t k = 0; k < weights.size(); ++k) {
    a[lay.w_plus[k].index] = weights[k] > 0;
    a[lay.w_minus[k].index] = weights[k] < 0;
  }
  for (size_t c = 0; c < lay.class_count; ++c) lay.bias[c].store(a, params.bias[c]);
  fill_predictions_and_margins(enc, scores_of(enc, active_rows(enc), weights, params.bias), a);
  return a;
}

std::function<void(Assignment&)> completion_from_weights(const Encoding& enc) {
  auto active = std::make_shared<std::vector<std::vector<uint32_t>>>(active_rows(enc));
  return [&enc, active](Assignment& a) {
    const auto& lay = enc.layout;
    std::vector<int> weights(lay.w_plus.size());
    for (size_t k = 0; k < weights.size(); ++k) {
      weights[k] = static_cast<int>(a[lay.w_plus[k].index] - a[lay.w_minus[k].index]);
    }
    std::vector<int64_t> bias(lay.class_count);
    for (size_t c = 0; c < lay.class_count; ++c) bias[c] = lay.bias[c].value(a);
    fill_predictions_and_margins(enc, scores_of(enc, *active, weights, bias), a);
  };
}

std::vector<VarId> enumerable_variables(const Encoding& enc) {
  std::vector<VarId> vars;
  for (size_t k = 0; k < enc.layout.w_plus.size(); ++k) {
    vars.push_back(enc.layout.w_plus[k]);
    vars.push_back(enc.layout.w_minus[k]);
  }
  for (const EncodedValue& b : enc.layout.bias) {
    for (const Term& t : b.terms) vars.push_back(t.var);
  }
  return vars;
}

int64_t training_objective(const Encoding& enc, const TrainedModel& params) {
  const auto active = active_rows(enc);
  MarginState state(enc, active, params);
  auto obj = state.objective();
  if (!obj) throw Error("model has no feasible margin completion");
  return *obj;
}

std::function<std::optional<Assignment>(std::span<const double>)> make_rounding_heuristic(
    const Encoding& enc) {
  auto active = std::make_shared<std::vector<std::vector<uint32_t>>>(active_rows(enc));
  return [&enc, active](std::span<const double> lp) -> std::optional<Assignment> {
    const auto& lay = enc.layout;
    TrainedModel params = TrainedModel::zeros(lay.feature_count, lay.class_count);
    for (size_t k = 0; k < lay.w_plus.size(); ++k) {
      const double w = lp[lay.w_plus[k].index] - lp[lay.w_minus[k].index];
      params.weights[k] = static_cast<int8_t>(w > 0.5 ? 1 : (w < -0.5 ? -1 : 0));
    }
    const auto& qb = enc.bounds.bias;
    for (size_t c = 0; c < lay.class_count; ++c) {
      params.bias[c] = std::clamp(static_cast<int64_t>(std::llround(lay.bias[c].value(lp))),
                                  qb.lower, qb.upper);
    }

    MarginState state(enc, *active, std::move(params));
    if (!state.objective()) return std::nullopt;
    for (int pass = 0; pass < 100; ++pass) {
      bool improved = false;
      for (size_t f = 0; f < lay.feature_count; ++f) {
        for (size_t c = 0; c < lay.class_count; ++c) {
          for (int w = -1; w <= 1; ++w) improved |= state.try_weight(f, c, w);
        }
      }
      for (size_t c = 0; c < lay.class_count; ++c) {
        improved |= state.try_bias(c, 1);
        improved |= state.try_bias(c, -1);
      }
      if (!improved) break;
    }
    Assignment a = complete_assignment(enc, state.params());
    if (!evaluate(enc.model, a).feasible) return std::nullopt;
    return a;
  };
}

}  // namespace binreg
