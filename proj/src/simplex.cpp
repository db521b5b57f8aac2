#include "binreg/simplex.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "binreg/error.hpp"

namespace binreg {
namespace {

constexpr double kPivotTol = 1e-9;
constexpr double kDropTol = 1e-13;
constexpr double kSingularTol = 1e-9;

}  // namespace

const char* to_string(LpStatus status) {
  switch (status) {
    case LpStatus::kOptimal:
      return "optimal";
    case LpStatus::kInfeasible:
      return "infeasible";
    case LpStatus::kUnbounded:
      return "unbounded";
    case LpStatus::kCutoff:
      return "cutoff";
    case LpStatus::kIterationLimit:
      return "iteration_limit";
    case LpStatus::kError:
      return "error";
  }
  return "?";
}

DualSimplex::DualSimplex(const ModelIR& model, LpOptions options)
    : model_(model), options_(options) {
  n_ = model.num_variables();
  m_ = model.constraints().size();
  const size_t total = n_ + m_;

  // Column-wise and row-wise copies of the structural part.
  col_start_.assign(n_ + 1, 0);
  row_start_.assign(m_ + 1, 0);
  for (size_t i = 0; i < m_; ++i) {
    for (const Term& t : model.constraints()[i].expr.terms()) {
      ++col_start_[t.var.index + 1];
      ++row_start_[i + 1];
    }
  }
  std::partial_sum(col_start_.begin(), col_start_.end(), col_start_.begin());
  std::partial_sum(row_start_.begin(), row_start_.end(), row_start_.begin());
  const size_t nnz = static_cast<size_t>(row_start_.back());
  col_index_.resize(nnz);
  col_value_.resize(nnz);
  row_index_.resize(nnz);
  row_value_.resize(nnz);
  std::vector<int> fill(col_start_.begin(), col_start_.end() - 1);
  for (size_t i = 0; i < m_; ++i) {
    int k = row_start_[i];
    for (const Term& t : model.constraints()[i].expr.terms()) {
      row_index_[k] = t.var.index;
      row_value_[k] = static_cast<double>(t.coef);
      ++k;
      const int slot = fill[t.var.index]++;
      col_index_[slot] = static_cast<int>(i);
      col_value_[slot] = static_cast<double>(t.coef);
    }
  }

  cost_.assign(total, 0.0);
  for (const Term& t : model.objective().terms()) cost_[t.var.index] = static_cast<double>(t.coef);

  root_lower_.resize(total);
  root_upper_.resize(total);
  for (const Variable& v : model.variables()) {
    root_lower_[v.id.index] = static_cast<double>(v.lower);
    root_upper_[v.id.index] = static_cast<double>(v.upper);
  }
  // Logical s = -a.x, boxed by the row sense and the activity range.
  for (size_t i = 0; i < m_; ++i) {
    const Constraint& row = model.constraints()[i];
    double min_act = 0.0;
    double max_act = 0.0;
    for (const Term& t : row.expr.terms()) {
      const Variable& v = model.variable(t.var);
      const double a = static_cast<double>(t.coef);
      min_act += a > 0 ? a * v.lower : a * v.upper;
      max_act += a > 0 ? a * v.upper : a * v.lower;
    }
    const double rhs = static_cast<double>(row.rhs);
    double lo = 0.0;
    double hi = 0.0;
    switch (row.sense) {
      case Sense::kLessEqual:
        lo = -rhs;
        hi = -min_act;
        break;
      case Sense::kGreaterEqual:
        lo = -max_act;
        hi = -rhs;
        break;
      case Sense::kEqual:
        lo = hi = -rhs;
        break;
    }
    root_lower_[n_ + i] = lo;
    root_upper_[n_ + i] = hi;
  }
  lower_ = root_lower_;
  upper_ = root_upper_;

  status_.assign(total, kAtLower);
  position_.assign(total, -1);
  basic_.resize(m_);
  for (size_t i = 0; i < m_; ++i) {
    status_[n_ + i] = kBasic;
    basic_[i] = static_cast<int>(n_ + i);
    position_[n_ + i] = static_cast<int>(i);
  }
  x_.assign(total, 0.0);
  d_.assign(total, 0.0);
}

void DualSimplex::set_bounds(VarId var, double lower, double upper) {
  lower_.at(var.index) = lower;
  upper_.at(var.index) = upper;
}

void DualSimplex::reset_bounds() {
  std::copy(root_lower_.begin(), root_lower_.begin() + n_, lower_.begin());
  std::copy(root_upper_.begin(), root_upper_.begin() + n_, upper_.begin());
}

DualSimplex::Basis DualSimplex::basis() const { return {status_}; }

void DualSimplex::load_basis(const Basis& basis) {
  if (basis.status.size() != status_.size()) throw Error("basis does not match the model");
  status_ = basis.status;
  factored_ = false;
}

void DualSimplex::load_column(int j, std::vector<double>& dense) const {
  if (static_cast<size_t>(j) >= n_) {
    dense[j - n_] = 1.0;
    return;
  }
  for (int k = col_start_[j]; k < col_start_[j + 1]; ++k) dense[col_index_[k]] = col_value_[k];
}

void DualSimplex::add_eta(const std::vector<double>& column, int row) {
  eta_row_.push_back(row);
  eta_pivot_.push_back(column[row]);
  for (size_t i = 0; i < m_; ++i) {
    if (static_cast<int>(i) != row && std::abs(column[i]) > kDropTol) {
      eta_index_.push_back(static_cast<int>(i));
      eta_value_.push_back(column[i]);
    }
  }
  eta_start_.push_back(static_cast<int>(eta_index_.size()));
}

void DualSimplex::ftran(std::vector<double>& v) const {
  for (size_t k = 0; k < eta_row_.size(); ++k) {
    const int r = eta_row_[k];
    if (v[r] == 0.0) continue;
    const double xr = v[r] / eta_pivot_[k];
    v[r] = xr;
    for (int e = eta_start_[k]; e < eta_start_[k + 1]; ++e) v[eta_index_[e]] -= eta_value_[e] * xr;
  }
}

void DualSimplex::btran(std::vector<double>& v) const {
  for (size_t k = eta_row_.size(); k-- > 0;) {
    const int r = eta_row_[k];
    double sum = v[r];
    for (int e = eta_start_[k]; e < eta_start_[k + 1]; ++e) sum -= eta_value_[e] * v[eta_index_[e]];
    v[r] = sum / eta_pivot_[k];
  }
}

void DualSimplex::refactor() {
  eta_row_.clear();
  eta_pivot_.clear();
  eta_start_.assign(1, 0);
  eta_index_.clear();
  eta_value_.clear();

  const size_t total = n_ + m_;
  std::vector<char> taken(m_, 0);
  std::vector<int> structural;
  std::fill(position_.begin(), position_.end(), -1);
  for (size_t j = 0; j < total; ++j) {
    if (status_[j] != kBasic) continue;
    if (j >= n_) {
      const size_t r = j - n_;
      taken[r] = 1;
      basic_[r] = static_cast<int>(j);
      position_[j] = static_cast<int>(r);
    } else {
      structural.push_back(static_cast<int>(j));
    }
  }
  std::stable_sort(structural.begin(), structural.end(), [&](int a, int b) {
    return col_start_[a + 1] - col_start_[a] < col_start_[b + 1] - col_start_[b];
  });

  std::vector<double> work(m_, 0.0);
  for (int j : structural) {
    std::fill(work.begin(), work.end(), 0.0);
    load_column(j, work);
    ftran(work);
    int best = -1;
    double best_abs = 0.0;
    for (size_t r = 0; r < m_; ++r) {
      if (!taken[r] && std::abs(work[r]) > best_abs) {
        best_abs = std::abs(work[r]);
        best = static_cast<int>(r);
      }
    }
    if (best < 0 || best_abs < kSingularTol) {
      // Dependent column: drop it; its row keeps the logical.
      status_[j] = kAtLower;
      continue;
    }
    add_eta(work, best);
    taken[best] = 1;
    basic_[best] = j;
    position_[j] = best;
  }
  for (size_t r = 0; r < m_; ++r) {
    if (taken[r]) continue;
    const int j = static_cast<int>(n_ + r);
    status_[j] = kBasic;
    basic_[r] = j;
    position_[j] = static_cast<int>(r);
  }

  compute_duals();
  fix_dual_infeasibilities();
  compute_primal();
  factored_ = true;
}

void DualSimplex::compute_duals() {
  std::vector<double> y(m_);
  for (size_t r = 0; r < m_; ++r) y[r] = cost_[basic_[r]];
  btran(y);
  for (size_t j = 0; j < n_; ++j) {
    if (status_[j] == kBasic) {
      d_[j] = 0.0;
      continue;
    }
    double dj = cost_[j];
    for (int k = col_start_[j]; k < col_start_[j + 1]; ++k) dj -= y[col_index_[k]] * col_value_[k];
    d_[j] = dj;
  }
  for (size_t i = 0; i < m_; ++i) {
    d_[n_ + i] = status_[n_ + i] == kBasic ? 0.0 : -y[i];
  }
}

bool DualSimplex::fix_dual_infeasibilities() {
  bool changed = false;
  const double tol = options_.optimality_tol;
  for (size_t j = 0; j < n_ + m_; ++j) {
    if (status_[j] == kBasic || lower_[j] == upper_[j]) continue;
    if (status_[j] == kAtLower && d_[j] < -tol) {
      status_[j] = kAtUpper;
      changed = true;
    } else if (status_[j] == kAtUpper && d_[j] > tol) {
      status_[j] = kAtLower;
      changed = true;
    }
  }
  return changed;
}

void DualSimplex::place_nonbasic(int j) {
  x_[j] = (status_[j] == kAtUpper) ? upper_[j] : lower_[j];
}

void DualSimplex::compute_primal() {
  std::vector<double> rhs(m_, 0.0);
  for (size_t j = 0; j < n_ + m_; ++j) {
    if (status_[j] == kBasic) continue;
    place_nonbasic(static_cast<int>(j));
    const double xj = x_[j];
    if (xj == 0.0) continue;
    if (j >= n_) {
      rhs[j - n_] -= xj;
    } else {
      for (int k = col_start_[j]; k < col_start_[j + 1]; ++k) rhs[col_index_[k]] -= col_value_[k] * xj;
    }
  }
  ftran(rhs);
  for (size_t r = 0; r < m_; ++r) x_[basic_[r]] = rhs[r];
}

double DualSimplex::objective_value() const {
  double total = static_cast<double>(model_.objective().constant());
  for (size_t j = 0; j < n_; ++j) total += cost_[j] * x_[j];
  return total;
}

double DualSimplex::primal_infeasibility(int j) const {
  if (x_[j] < lower_[j]) return lower_[j] - x_[j];
  if (x_[j] > upper_[j]) return x_[j] - upper_[j];
  return 0.0;
}

int DualSimplex::choose_leaving_row(bool bland) const {
  int best = -1;
  double best_value = options_.feasibility_tol;
  for (size_t r = 0; r < m_; ++r) {
    const int j = basic_[r];
    const double inf = primal_infeasibility(j);
    if (inf <= options_.feasibility_tol) continue;
    if (bland) {
      if (best < 0 || j < basic_[best]) best = static_cast<int>(r);
    } else if (inf > best_value) {
      best_value = inf;
      best = static_cast<int>(r);
    }
  }
  return best;
}

LpResult DualSimplex::solve() {
  LpResult result;
  const size_t total = n_ + m_;
  for (size_t j = 0; j < total; ++j) {
    if (lower_[j] > upper_[j] + options_.feasibility_tol) {
      result.status = LpStatus::kInfeasible;
      return result;
    }
  }

  if (!factored_) {
    refactor();
  } else {
    fix_dual_infeasibilities();
    compute_primal();
  }

  std::vector<double> rho(m_);
  std::vector<double> column(m_);
  std::vector<double> flip_delta(m_);
  std::vector<double> alpha(total, 0.0);
  std::vector<char> marked(total, 0);
  std::vector<int> touched;
  struct Candidate {
    int j;
    double ratio;
    double magnitude;
  };
  std::vector<Candidate> candidates;
  std::vector<int> flips;

  int updates = 0;
  int degenerate = 0;
  int numerical_trouble = 0;
  int64_t iterations = 0;

  auto finish = [&](LpStatus status) {
    result.status = status;
    result.iterations = iterations;
    result.objective = objective_value();
    result.values.assign(x_.begin(), x_.begin() + n_);
    return result;
  };

  while (true) {
    if (iterations >= options_.max_iterations) return finish(LpStatus::kIterationLimit);
    if (options_.deadline && iterations % 64 == 0 &&
        std::chrono::steady_clock::now() > *options_.deadline) {
      return finish(LpStatus::kIterationLimit);
    }
    // Every iterate is dual feasible, so its objective bounds the optimum.
    if (options_.objective_cutoff && objective_value() >= *options_.objective_cutoff) {
      return finish(LpStatus::kCutoff);
    }

    const bool bland = degenerate >= options_.bland_after;
    const int r = choose_leaving_row(bland);
    if (r < 0) {
      if (updates > 0) {
        refactor();
        updates = 0;
        continue;
      }
      return finish(LpStatus::kOptimal);
    }
    const int p = basic_[r];
    const bool to_lower = x_[p] < lower_[p];
    const double sigma = to_lower ? 1.0 : -1.0;

    // Pivot row alpha_j = (e_r^T B^{-1}) A_j over nonbasic columns.
    std::fill(rho.begin(), rho.end(), 0.0);
    rho[r] = 1.0;
    btran(rho);
    for (int j : touched) {
      alpha[j] = 0.0;
      marked[j] = 0;
    }
    touched.clear();
    for (size_t i = 0; i < m_; ++i) {
      const double ri = rho[i];
      if (std::abs(ri) <= kDropTol) continue;
      for (int k = row_start_[i]; k < row_start_[i + 1]; ++k) {
        const int j = row_index_[k];
        if (!marked[j]) {
          marked[j] = 1;
          touched.push_back(j);
        }
        alpha[j] += ri * row_value_[k];
      }
      const int logical = static_cast<int>(n_ + i);
      marked[logical] = 1;
      touched.push_back(logical);
      alpha[logical] = ri;
    }

    candidates.clear();
    for (int j : touched) {
      if (status_[j] == kBasic || lower_[j] == upper_[j]) continue;
      const double a = sigma * alpha[j];
      if (status_[j] == kAtLower && a < -kPivotTol) {
        candidates.push_back({j, std::max(d_[j], 0.0) / -a, std::abs(a)});
      } else if (status_[j] == kAtUpper && a > kPivotTol) {
        candidates.push_back({j, std::max(-d_[j], 0.0) / a, std::abs(a)});
      }
    }

    // Bound-flipping ratio test: pass breakpoints while the dual slope stays
    // positive, then a Harris pass over the rest picks the entering column.
    std::sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
      if (a.ratio != b.ratio) return a.ratio < b.ratio;
      return a.j < b.j;
    });
    flips.clear();
    size_t first = 0;
    if (!bland) {
      double slope = to_lower ? lower_[p] - x_[p] : x_[p] - upper_[p];
      while (first < candidates.size()) {
        const Candidate& c = candidates[first];
        const double drop = c.magnitude * (upper_[c.j] - lower_[c.j]);
        if (slope - drop <= 0.0) break;
        slope -= drop;
        flips.push_back(c.j);
        ++first;
      }
    }
    int q = -1;
    if (first < candidates.size()) {
      if (bland) {
        const double best_ratio = candidates[0].ratio;
        for (const Candidate& c : candidates) {
          if (c.ratio <= best_ratio + 1e-12 && (q < 0 || c.j < q)) q = c.j;
        }
      } else {
        double harris = INFINITY;
        for (size_t k = first; k < candidates.size(); ++k) {
          const Candidate& c = candidates[k];
          harris = std::min(harris, (std::abs(d_[c.j]) + options_.optimality_tol) / c.magnitude);
        }
        double best_mag = 0.0;
        for (size_t k = first; k < candidates.size(); ++k) {
          const Candidate& c = candidates[k];
          if (c.ratio > harris) break;
          if (c.magnitude > best_mag) {
            best_mag = c.magnitude;
            q = c.j;
          }
        }
      }
    }
    if (q < 0) {
      if (updates > 0) {
        refactor();
        updates = 0;
        continue;
      }
      return finish(LpStatus::kInfeasible);
    }

    std::fill(column.begin(), column.end(), 0.0);
    load_column(q, column);
    ftran(column);
    const double pivot = column[r];
    if (std::abs(pivot - alpha[q]) > 1e-6 * (1.0 + std::abs(pivot)) || std::abs(pivot) < kPivotTol) {
      if (++numerical_trouble > 10 || updates == 0) return finish(LpStatus::kError);
      refactor();
      updates = 0;
      continue;
    }

    // Dual step.
    const double t = -d_[q] / alpha[q];
    for (int j : touched) {
      if (status_[j] != kBasic) d_[j] += t * alpha[j];
    }
    d_[p] = t;
    d_[q] = 0.0;
    degenerate = std::abs(t) <= 1e-12 ? degenerate + 1 : 0;

    // Bound flips move the basic variables.
    if (!flips.empty()) {
      std::fill(flip_delta.begin(), flip_delta.end(), 0.0);
      for (int j : flips) {
        const double old_value = x_[j];
        status_[j] = status_[j] == kAtLower ? kAtUpper : kAtLower;
        place_nonbasic(j);
        const double delta = x_[j] - old_value;
        if (static_cast<size_t>(j) >= n_) {
          flip_delta[j - n_] += delta;
        } else {
          for (int k = col_start_[j]; k < col_start_[j + 1]; ++k) {
            flip_delta[col_index_[k]] += col_value_[k] * delta;
          }
        }
      }
      ftran(flip_delta);
      for (size_t i = 0; i < m_; ++i) x_[basic_[i]] -= flip_delta[i];
    }

    // Primal step: p lands on its violated bound, q enters at row r.
    const double target = to_lower ? lower_[p] : upper_[p];
    const double theta = (x_[p] - target) / pivot;
    for (size_t i = 0; i < m_; ++i) {
      if (column[i] != 0.0) x_[basic_[i]] -= theta * column[i];
    }
    x_[q] += theta;
    x_[p] = target;
    status_[p] = to_lower ? kAtLower : kAtUpper;
    status_[q] = kBasic;
    position_[p] = -1;
    position_[q] = r;
    basic_[r] = q;
    add_eta(column, r);
    ++iterations;

    if (++updates >= options_.refactor_interval) {
      refactor();
      updates = 0;
    }
  }
}

LpResult solve_lp(const ModelIR& model,
                  const std::map<VarId, std::pair<int64_t, int64_t>>& overrides,
                  LpOptions options) {
  DualSimplex lp(model, options);
  for (const auto& [var, range] : overrides) {
    const Variable& v = model.variable(var);
    if (range.first < v.lower || range.second > v.upper) {
      throw Error("bound override for '" + v.name + "' leaves the original bounds");
    }
    lp.set_bounds(var, static_cast<double>(range.first), static_cast<double>(range.second));
  }
  return lp.solve();
}

}  // namespace binreg
