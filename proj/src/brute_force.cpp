#include "binreg/branch_bound.hpp"

#include <algorithm>

#include "binreg/error.hpp"

namespace binreg {

std::optional<OracleResult> brute_force_oracle(const ModelIR& model,
                                               std::span<const VarId> enumerable,
                                               const std::function<void(Assignment&)>& complete,
                                               double cap) {
  double product = 1.0;
  for (VarId v : enumerable) {
    const Variable& var = model.variable(v);
    product *= static_cast<double>(var.upper - var.lower + 1);
  }
  if (product > cap) {
    throw Error("oracle search space of " + std::to_string(product) + " points exceeds the cap");
  }

  // Rows whose variables are all enumerated are checked as soon as their
  // last variable is fixed.
  std::vector<int> depth_of(model.num_variables(), -1);
  for (size_t k = 0; k < enumerable.size(); ++k) depth_of[enumerable[k].index] = static_cast<int>(k);
  std::vector<std::vector<size_t>> rows_at(enumerable.size());
  const auto& rows = model.constraints();
  for (size_t r = 0; r < rows.size(); ++r) {
    int last = -1;
    bool covered = !rows[r].expr.terms().empty();
    for (const Term& t : rows[r].expr.terms()) {
      if (depth_of[t.var.index] < 0) {
        covered = false;
        break;
      }
      last = std::max(last, depth_of[t.var.index]);
    }
    if (covered) rows_at[last].push_back(r);
  }

  Assignment point(model.num_variables());
  for (const Variable& v : model.variables()) point[v.id.index] = v.lower;

  std::optional<OracleResult> best;
  uint64_t points = 0;
  Assignment scratch;

  auto leaf = [&] {
    scratch = point;
    if (complete) complete(scratch);
    ++points;
    const Evaluation eval = evaluate(model, scratch);
    if (!eval.feasible) return;
    if (!best || eval.objective < best->objective) {
      best = OracleResult{eval.objective, scratch, 0};
    }
  };

  // Iterative depth-first enumeration.
  const size_t depth = enumerable.size();
  if (depth == 0) {
    leaf();
  } else {
    std::vector<int64_t> value(depth);
    size_t k = 0;
    value[0] = model.variable(enumerable[0]).lower;
    while (true) {
      const Variable& var = model.variable(enumerable[k]);
      if (value[k] > var.upper) {
        point[var.id.index] = var.lower;
        if (k == 0) break;
        --k;
        ++value[k];
        continue;
      }
      point[var.id.index] = value[k];
      bool ok = true;
      for (size_t r : rows_at[k]) {
        if (!rows[r].satisfied_by(rows[r].expr.value(point))) {
          ok = false;
          break;
        }
      }
      if (!ok) {
        ++value[k];
        continue;
      }
      if (k + 1 == depth) {
        leaf();
        ++value[k];
      } else {
        ++k;
        value[k] = model.variable(enumerable[k]).lower;
      }
    }
  }
  if (best) best->points = points;
  return best;
}

}  // namespace binreg
