#include "binreg/simplex.hpp"

#include <gtest/gtest.h>

#include <cmath>

#include "binreg/branch_bound.hpp"
#include "binreg/error.hpp"
#include "support.hpp"

namespace binreg {
namespace {

TEST(SolveLp, SingleLowerRow) {
  ModelIR m;
  const VarId x = m.add_variable("x", Domain::kInteger, 0, 10);
  m.add_constraint(LinearExpr().add(x, 1), Sense::kGreaterEqual, 1, "c0");
  m.set_objective(LinearExpr().add(x, 1));
  const LpResult r = solve_lp(m);
  ASSERT_EQ(r.status, LpStatus::kOptimal);
  EXPECT_NEAR(r.objective, 1.0, 1e-9);
  EXPECT_NEAR(r.values[0], 1.0, 1e-9);
}

TEST(SolveLp, Facet) {
  ModelIR m;
  const VarId x = m.add_variable("x", Domain::kBinary, 0, 1);
  const VarId y = m.add_variable("y", Domain::kBinary, 0, 1);
  m.add_constraint(LinearExpr().add(x, 1).add(y, 1), Sense::kLessEqual, 1, "c0");
  m.set_objective(LinearExpr().add(x, -1).add(y, -1));
  const LpResult r = solve_lp(m);
  ASSERT_EQ(r.status, LpStatus::kOptimal);
  EXPECT_NEAR(r.objective, -1.0, 1e-9);
  EXPECT_NEAR(r.values[0] + r.values[1], 1.0, 1e-9);
}

TEST(SolveLp, Infeasible) {
  ModelIR m;
  const VarId x = m.add_variable("x", Domain::kInteger, 0, 5);
  m.add_constraint(LinearExpr().add(x, 1), Sense::kGreaterEqual, 2, "lo");
  m.add_constraint(LinearExpr().add(x, 1), Sense::kLessEqual, 1, "hi");
  EXPECT_EQ(solve_lp(m).status, LpStatus::kInfeasible);
}

TEST(SolveLp, OverridesMustStayInsideBounds) {
  ModelIR m;
  const VarId x = m.add_variable("x", Domain::kInteger, 0, 5);
  m.set_objective(LinearExpr().add(x, -1));
  EXPECT_NEAR(solve_lp(m, {{x, {0, 3}}}).objective, -3.0, 1e-9);
  EXPECT_THROW(solve_lp(m, {{x, {0, 6}}}), Error);
}

TEST(SolveLp, CutoffStopsEarly) {
  ModelIR m;
  const VarId x = m.add_variable("x", Domain::kInteger, 0, 10);
  m.add_constraint(LinearExpr().add(x, 1), Sense::kGreaterEqual, 4, "c0");
  m.set_objective(LinearExpr().add(x, 1));
  LpOptions opt;
  opt.objective_cutoff = 2.0;
  const LpResult r = solve_lp(m, {}, opt);
  EXPECT_EQ(r.status, LpStatus::kCutoff);
  EXPECT_GE(r.objective, 2.0 - 1e-9);
}

// Dense vertex enumeration: every choice of n tight constraints or bounds
// that gives a nonsingular system is a candidate vertex.
std::optional<double> vertex_optimum(const ModelIR& m) {
  const size_t n = m.num_variables();
  struct Plane {
    std::vector<double> a;
    double b;
  };
  std::vector<Plane> planes;
  for (const Constraint& c : m.constraints()) {
    Plane p{std::vector<double>(n, 0.0), static_cast<double>(c.rhs)};
    for (const Term& t : c.expr.terms()) p.a[t.var.index] = static_cast<double>(t.coef);
    planes.push_back(p);
  }
  for (const Variable& v : m.variables()) {
    for (int64_t bound : {v.lower, v.upper}) {
      Plane p{std::vector<double>(n, 0.0), static_cast<double>(bound)};
      p.a[v.id.index] = 1.0;
      planes.push_back(p);
    }
  }
  std::optional<double> best;
  std::vector<size_t> pick(n);
  std::function<void(size_t, size_t)> choose = [&](size_t depth, size_t from) {
    if (depth == n) {
      std::vector<std::vector<double>> A(n, std::vector<double>(n + 1));
      for (size_t r = 0; r < n; ++r) {
        for (size_t j = 0; j < n; ++j) A[r][j] = planes[pick[r]].a[j];
        A[r][n] = planes[pick[r]].b;
      }
      for (size_t col = 0; col < n; ++col) {
        size_t piv = col;
        for (size_t r = col; r < n; ++r) {
          if (std::abs(A[r][col]) > std::abs(A[piv][col])) piv = r;
        }
        if (std::abs(A[piv][col]) < 1e-12) return;
        std::swap(A[piv], A[col]);
        for (size_t r = 0; r < n; ++r) {
          if (r == col) continue;
          const double f = A[r][col] / A[col][col];
          for (size_t j = col; j <= n; ++j) A[r][j] -= f * A[col][j];
        }
      }
      std::vector<double> x(n);
      for (size_t j = 0; j < n; ++j) x[j] = A[j][n] / A[j][j];
      for (const Variable& v : m.variables()) {
        if (x[v.id.index] < v.lower - 1e-9 || x[v.id.index] > v.upper + 1e-9) return;
      }
      for (const Constraint& c : m.constraints()) {
        const double act = c.expr.value(std::span<const double>(x));
        const double rhs = static_cast<double>(c.rhs);
        if ((c.sense != Sense::kGreaterEqual && act > rhs + 1e-9) ||
            (c.sense != Sense::kLessEqual && act < rhs - 1e-9)) {
          return;
        }
      }
      const double obj = m.objective().value(std::span<const double>(x));
      if (!best || obj < *best) best = obj;
      return;
    }
    for (size_t p = from; p < planes.size(); ++p) {
      pick[depth] = p;
      choose(depth + 1, p + 1);
    }
  };
  choose(0, 0);
  return best;
}

TEST(SolveLp, MatchesVertexEnumeration) {
  Rng rng(2024);
  int optimal = 0, infeasible = 0;
  for (int trial = 0; trial < 300; ++trial) {
    ModelIR m;
    const size_t n = 1 + rng.below(3);
    for (size_t j = 0; j < n; ++j) {
      const int64_t lo = static_cast<int64_t>(rng.below(7)) - 3;
      m.add_variable("x" + std::to_string(j), Domain::kInteger, lo, lo + static_cast<int64_t>(rng.below(6)));
    }
    const size_t rows = rng.below(5);
    for (size_t r = 0; r < rows; ++r) {
      LinearExpr e;
      for (size_t j = 0; j < n; ++j) e.add(VarId{static_cast<int32_t>(j)}, static_cast<int64_t>(rng.below(9)) - 4);
      m.add_constraint(e, static_cast<Sense>(rng.below(3)), static_cast<int64_t>(rng.below(13)) - 6, "r");
    }
    LinearExpr obj;
    for (size_t j = 0; j < n; ++j) obj.add(VarId{static_cast<int32_t>(j)}, static_cast<int64_t>(rng.below(11)) - 5);
    m.set_objective(obj);

    const auto expected = vertex_optimum(m);
    const LpResult r = solve_lp(m);
    if (expected) {
      ++optimal;
      ASSERT_EQ(r.status, LpStatus::kOptimal) << "trial " << trial;
      EXPECT_NEAR(r.objective, *expected, 1e-6) << "trial " << trial;
    } else {
      ++infeasible;
      EXPECT_EQ(r.status, LpStatus::kInfeasible) << "trial " << trial;
    }
  }
  EXPECT_GT(optimal, 50);
  EXPECT_GT(infeasible, 10);
}

TEST(DualSimplex, WarmStartMatchesColdSolve) {
  Rng rng(77);
  for (int trial = 0; trial < 20; ++trial) {
    const auto ds = testing::random_dataset(rng, 2 + rng.below(6), 2 + static_cast<int>(rng.below(3)),
                                            2 + rng.below(6));
    const Encoding enc = build_mip(ds, testing::suite_hyperparams()[trial % 3]);
    DualSimplex lp(enc.model);
    ASSERT_EQ(lp.solve().status, LpStatus::kOptimal);
    std::map<VarId, std::pair<int64_t, int64_t>> fixed;
    for (int step = 0; step < 6; ++step) {
      const VarId w = enc.layout.w_plus[rng.below(enc.layout.w_plus.size())];
      const int64_t v = static_cast<int64_t>(rng.below(2));
      fixed[w] = {v, v};
      lp.set_bounds(w, static_cast<double>(v), static_cast<double>(v));
      const LpResult warm = lp.solve();
      const LpResult cold = solve_lp(enc.model, fixed);
      ASSERT_EQ(warm.status, cold.status);
      if (warm.status == LpStatus::kOptimal) EXPECT_NEAR(warm.objective, cold.objective, 1e-6);
    }
  }
}

TEST(DualSimplex, RootBoundBelowIntegerOptimum) {
  for (const auto& tc : testing::tiny_suite(12)) {
    const Encoding enc = build_mip(tc.train, tc.hp);
    const LpResult root = solve_lp(enc.model);
    ASSERT_EQ(root.status, LpStatus::kOptimal);
    EXPECT_LE(root.objective, static_cast<double>(testing::direct_optimum(tc.train, tc.hp).objective) + 1e-6);
    const LpResult again = solve_lp(enc.model);
    EXPECT_EQ(again.objective, root.objective);
    EXPECT_EQ(again.iterations, root.iterations);
  }
}

}  // namespace
}  // namespace binreg
