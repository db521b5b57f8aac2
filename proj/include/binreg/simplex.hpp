#pragma once

#include <chrono>
#include <cstdint>
#include <map>
#include <optional>
#include <utility>
#include <vector>

#include "binreg/model_ir.hpp"

namespace binreg {

enum class LpStatus {
  kOptimal,
  kInfeasible,
  kUnbounded,
  kCutoff,          // proven objective >= cutoff; objective holds that bound
  kIterationLimit,  // also used for deadline expiry
  kError,           // numerical breakdown that refactoring did not cure
};

const char* to_string(LpStatus status);

struct LpOptions {
  double feasibility_tol = 1e-7;
  double optimality_tol = 1e-9;
  int refactor_interval = 100;
  int64_t max_iterations = 5'000'000;
  // Consecutive degenerate pivots before switching to Bland's rule.
  int bland_after = 50;
  std::optional<double> objective_cutoff;
  std::optional<std::chrono::steady_clock::time_point> deadline;
};

struct LpResult {
  LpStatus status = LpStatus::kError;
  std::vector<double> values;  // one per model variable
  double objective = 0.0;
  int64_t iterations = 0;
};

// Continuous relaxation solver for a ModelIR: integrality is dropped and
// every variable keeps its (possibly overridden) finite bounds.
//
// Bounded dual simplex over [A | I] with a product-form basis inverse. Each
// row gets a logical variable s = -a.x boxed by the row sense and the
// activity range of the row, so every variable is boxed and any basis can
// be made dual feasible by moving nonbasic variables to the bound that
// matches the sign of their reduced cost. The basis survives bound changes,
// which is what branch-and-bound uses for warm starts.
class DualSimplex {
 public:
  explicit DualSimplex(const ModelIR& model, LpOptions options = {});

  void set_bounds(VarId var, double lower, double upper);
  void reset_bounds();
  LpOptions& options() { return options_; }

  LpResult solve();

  // Status of every structural and logical variable; enough to rebuild the
  // factorization.
  struct Basis {
    std::vector<uint8_t> status;
  };
  Basis basis() const;
  void load_basis(const Basis& basis);

  size_t num_rows() const { return m_; }
  size_t num_columns() const { return n_; }

 private:
  enum : uint8_t { kBasic = 0, kAtLower = 1, kAtUpper = 2 };

  void refactor();
  void ftran(std::vector<double>& v) const;
  void btran(std::vector<double>& v) const;
  void add_eta(const std::vector<double>& column, int row);
  void load_column(int j, std::vector<double>& dense) const;
  void compute_duals();
  bool fix_dual_infeasibilities();
  void compute_primal();
  void place_nonbasic(int j);
  double objective_value() const;
  int choose_leaving_row(bool bland) const;
  double primal_infeasibility(int j) const;

  const ModelIR& model_;
  LpOptions options_;
  size_t n_ = 0;
  size_t m_ = 0;

  std::vector<int> col_start_, col_index_;
  std::vector<double> col_value_;
  std::vector<int> row_start_, row_index_;
  std::vector<double> row_value_;

  std::vector<double> cost_;
  std::vector<double> lower_, upper_;
  std::vector<double> root_lower_, root_upper_;
  bool bounds_inverted_ = false;

  std::vector<uint8_t> status_;
  std::vector<int> basic_;     // row position -> variable
  std::vector<int> position_;  // variable -> row position or -1
  std::vector<double> x_;
  std::vector<double> d_;
  bool factored_ = false;

  // Eta file: B^{-1} = E_k^{-1} ... E_1^{-1}.
  std::vector<int> eta_row_;
  std::vector<double> eta_pivot_;
  std::vector<int> eta_start_{0};
  std::vector<int> eta_index_;
  std::vector<double> eta_value_;
};

// One-shot relaxation solve with optional per-variable bound overrides.
LpResult solve_lp(const ModelIR& model,
                  const std::map<VarId, std::pair<int64_t, int64_t>>& overrides = {},
                  LpOptions options = {});

}  // namespace binreg
