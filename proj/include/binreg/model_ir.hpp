#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace binreg {

// Dense, stable index of a variable inside one ModelIR.
struct VarId {
  int32_t index = -1;

  friend auto operator<=>(const VarId&, const VarId&) = default;
};

enum class Domain { kBinary, kInteger };

struct Variable {
  VarId id;
  std::string name;
  Domain domain = Domain::kInteger;
  int64_t lower = 0;
  int64_t upper = 0;
};

struct Term {
  VarId var;
  int64_t coef = 0;

  friend bool operator==(const Term&, const Term&) = default;
};

// Integer linear form sum(coef * var) + constant. Terms are kept sorted by
// VarId with duplicates merged and zero coefficients dropped.
class LinearExpr {
 public:
  LinearExpr() = default;

  LinearExpr& add(VarId var, int64_t coef);
  LinearExpr& add(const LinearExpr& other, int64_t scale = 1);
  LinearExpr& add_constant(int64_t value) {
    constant_ += value;
    return *this;
  }

  const std::vector<Term>& terms() const { return terms_; }
  int64_t constant() const { return constant_; }

  int64_t value(std::span<const int64_t> assignment) const;
  double value(std::span<const double> assignment) const;

 private:
  std::vector<Term> terms_;
  int64_t constant_ = 0;
};

enum class Sense { kLessEqual, kGreaterEqual, kEqual };

const char* to_string(Sense sense);

// expr (constant already folded into rhs) <sense> rhs.
struct Constraint {
  LinearExpr expr;
  Sense sense = Sense::kLessEqual;
  int64_t rhs = 0;
  std::string name;

  bool satisfied_by(int64_t activity) const;
};

// Bounded integer linear program, always minimized.
class ModelIR {
 public:
  VarId add_variable(std::string name, Domain domain, int64_t lower, int64_t upper);

  // Folds expr's constant into rhs. Names are advisory and may repeat.
  size_t add_constraint(const LinearExpr& expr, Sense sense, int64_t rhs, std::string name);

  void set_objective(LinearExpr objective);

  const std::vector<Variable>& variables() const { return variables_; }
  const std::vector<Constraint>& constraints() const { return constraints_; }
  const LinearExpr& objective() const { return objective_; }
  const Variable& variable(VarId id) const { return variables_.at(id.index); }
  size_t num_variables() const { return variables_.size(); }

  std::optional<VarId> find(const std::string& name) const;

  bool all_binary() const;

 private:
  void check_terms(const LinearExpr& expr) const;

  std::vector<Variable> variables_;
  std::vector<Constraint> constraints_;
  LinearExpr objective_;
  std::unordered_map<std::string, int32_t> by_name_;
};

// Integer assignment indexed by VarId::index.
using Assignment = std::vector<int64_t>;

struct Evaluation {
  int64_t objective = 0;
  bool feasible = true;
  std::vector<size_t> violated;        // constraint indices
  std::vector<VarId> out_of_bounds;
};

// Exact integer check of every bound and constraint. Throws on a partial
// assignment.
Evaluation evaluate(const ModelIR& model, std::span<const int64_t> assignment);

}  // namespace binreg
