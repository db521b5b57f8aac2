#include "binreg/model_ir.hpp"

#include <algorithm>

#include "binreg/error.hpp"

namespace binreg {

LinearExpr& LinearExpr::add(VarId var, int64_t coef) {
  if (coef == 0) return *this;
  if (terms_.empty() || terms_.back().var < var) {
    terms_.push_back({var, coef});
    return *this;
  }
  auto it = std::lower_bound(terms_.begin(), terms_.end(), var,
                             [](const Term& t, VarId v) { return t.var < v; });
  if (it != terms_.end() && it->var == var) {
    it->coef += coef;
    if (it->coef == 0) terms_.erase(it);
  } else {
    terms_.insert(it, {var, coef});
  }
  return *this;
}

LinearExpr& LinearExpr::add(const LinearExpr& other, int64_t scale) {
  for (const Term& t : other.terms()) add(t.var, t.coef * scale);
  constant_ += other.constant() * scale;
  return *this;
}

int64_t LinearExpr::value(std::span<const int64_t> assignment) const {
  int64_t total = constant_;
  for (const Term& t : terms_) total += t.coef * assignment[t.var.index];
  return total;
}

double LinearExpr::value(std::span<const double> assignment) const {
  double total = static_cast<double>(constant_);
  for (const Term& t : terms_) total += static_cast<double>(t.coef) * assignment[t.var.index];
  return total;
}

const char* to_string(Sense sense) {
  switch (sense) {
    case Sense::kLessEqual:
      return "<=";
    case Sense::kGreaterEqual:
      return ">=";
    case Sense::kEqual:
      return "=";
  }
  return "?";
}

bool Constraint::satisfied_by(int64_t activity) const {
  switch (sense) {
    case Sense::kLessEqual:
      return activity <= rhs;
    case Sense::kGreaterEqual:
      return activity >= rhs;
    case Sense::kEqual:
      return activity == rhs;
  }
  return false;
}

VarId ModelIR::add_variable(std::string name, Domain domain, int64_t lower, int64_t upper) {
  if (lower > upper) {
    throw Error("variable '" + name + "' has lower bound " + std::to_string(lower) +
                " above upper bound " + std::to_string(upper));
  }
  if (domain == Domain::kBinary && (lower != 0 || upper != 1)) {
    throw Error("binary variable '" + name + "' must have bounds [0, 1]");
  }
  const VarId id{static_cast<int32_t>(variables_.size())};
  if (!by_name_.emplace(name, id.index).second) {
    throw Error("duplicate variable name '" + name + "'");
  }
  variables_.push_back({id, std::move(name), domain, lower, upper});
  return id;
}

void ModelIR::check_terms(const LinearExpr& expr) const {
  for (const Term& t : expr.terms()) {
    if (t.var.index < 0 || static_cast<size_t>(t.var.index) >= variables_.size()) {
      throw Error("unknown variable id " + std::to_string(t.var.index));
    }
  }
}

size_t ModelIR::add_constraint(const LinearExpr& expr, Sense sense, int64_t rhs,
                               std::string name) {
  check_terms(expr);
  Constraint row;
  for (const Term& t : expr.terms()) row.expr.add(t.var, t.coef);
  row.sense = sense;
  row.rhs = rhs - expr.constant();
  row.name = std::move(name);
  constraints_.push_back(std::move(row));
  return constraints_.size() - 1;
}

void ModelIR::set_objective(LinearExpr objective) {
  check_terms(objective);
  objective_ = std::move(objective);
}

std::optional<VarId> ModelIR::find(const std::string& name) const {
  auto it = by_name_.find(name);
  if (it == by_name_.end()) return std::nullopt;
  return VarId{it->second};
}

bool ModelIR::all_binary() const {
  return std::all_of(variables_.begin(), variables_.end(),
                     [](const Variable& v) { return v.domain == Domain::kBinary; });
}

Evaluation evaluate(const ModelIR& model, std::span<const int64_t> assignment) {
  if (assignment.size() != model.num_variables()) {
    throw Error("assignment covers " + std::to_string(assignment.size()) + " of " +
                std::to_string(model.num_variables()) + " variables");
  }
  Evaluation eval;
  for (const Variable& v : model.variables()) {
    const int64_t x = assignment[v.id.index];
    if (x < v.lower || x > v.upper) eval.out_of_bounds.push_back(v.id);
  }
  const auto& rows = model.constraints();
  for (size_t r = 0; r < rows.size(); ++r) {
    if (!rows[r].satisfied_by(rows[r].expr.value(assignment))) eval.violated.push_back(r);
  }
  eval.feasible = eval.violated.empty() && eval.out_of_bounds.empty();
  eval.objective = model.objective().value(assignment);
  return eval;
}

}  // namespace binreg
