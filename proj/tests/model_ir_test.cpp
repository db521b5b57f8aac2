#include "binreg/model_ir.hpp"

#include <gtest/gtest.h>

#include "binreg/branch_bound.hpp"
#include "binreg/encoder.hpp"
#include "binreg/error.hpp"
#include "support.hpp"

namespace binreg {
namespace {

TEST(ModelIR, AddVariable) {
  ModelIR m;
  const VarId w = m.add_variable("w+_0_0", Domain::kBinary, 0, 1);
  const VarId b = m.add_variable("b_0", Domain::kInteger, -784, 784);
  EXPECT_EQ(w.index, 0);
  EXPECT_EQ(b.index, 1);
  EXPECT_EQ(m.variable(b).lower, -784);
  EXPECT_EQ(m.variable(b).upper, 784);
  EXPECT_EQ(m.find("w+_0_0"), w);
  EXPECT_FALSE(m.find("nope").has_value());
}

TEST(ModelIR, AddVariableErrors) {
  ModelIR m;
  m.add_variable("x", Domain::kInteger, 0, 3);
  EXPECT_THROW(m.add_variable("y", Domain::kInteger, 2, 1), Error);
  EXPECT_THROW(m.add_variable("x", Domain::kInteger, 0, 1), Error);
  EXPECT_THROW(m.add_variable("z", Domain::kBinary, 0, 2), Error);
}

TEST(ModelIR, ConstraintFoldsConstant) {
  ModelIR m;
  const VarId x = m.add_variable("x", Domain::kBinary, 0, 1);
  const VarId y = m.add_variable("y", Domain::kBinary, 0, 1);
  m.add_constraint(LinearExpr().add(x, 1).add(y, 1), Sense::kLessEqual, 1, "c");
  m.add_constraint(LinearExpr().add(x, 1).add_constant(3), Sense::kLessEqual, 5, "c");
  EXPECT_EQ(m.constraints()[0].expr.terms().size(), 2u);
  EXPECT_EQ(m.constraints()[1].rhs, 2);
  EXPECT_EQ(m.constraints()[1].expr.constant(), 0);
  EXPECT_THROW(m.add_constraint(LinearExpr().add(VarId{7}, 1), Sense::kEqual, 0, "bad"), Error);
}

TEST(LinearExpr, MergesAndDropsZeros) {
  LinearExpr e;
  e.add(VarId{2}, 3).add(VarId{0}, 1).add(VarId{2}, -3).add(VarId{1}, 4).add(VarId{0}, 2);
  ASSERT_EQ(e.terms().size(), 2u);
  EXPECT_EQ(e.terms()[0], (Term{VarId{0}, 3}));
  EXPECT_EQ(e.terms()[1], (Term{VarId{1}, 4}));
  LinearExpr f;
  f.add(e, -2).add_constant(5);
  const std::vector<int64_t> point{1, 2, 9};
  EXPECT_EQ(f.value(std::span<const int64_t>(point)), -2 * (3 + 8) + 5);
}

TEST(Evaluate, SignFamilyAtZeroIsFeasible) {
  const Encoding enc = build_mip(testing::toy_2x2x3(), Hyperparams{1, 2});
  Assignment zero(enc.model.num_variables(), 0);
  const Evaluation ev = evaluate(enc.model, zero);
  EXPECT_TRUE(ev.feasible);
  EXPECT_EQ(ev.objective, 0);
}

TEST(Evaluate, ReportsViolatedEquality) {
  ModelIR m;
  const VarId x = m.add_variable("x", Domain::kInteger, 0, 5);
  const VarId y = m.add_variable("y", Domain::kInteger, 0, 5);
  m.add_constraint(LinearExpr().add(x, 1).add(y, 1), Sense::kLessEqual, 8, "le");
  m.add_constraint(LinearExpr().add(x, 1).add(y, -1), Sense::kEqual, 0, "eq");
  m.set_objective(LinearExpr().add(x, 2).add(y, -1));
  const Evaluation ev = evaluate(m, Assignment{3, 1});
  EXPECT_FALSE(ev.feasible);
  EXPECT_EQ(ev.violated, std::vector<size_t>{1});
  EXPECT_EQ(ev.objective, 5);
  EXPECT_EQ(evaluate(m, Assignment{6, 6}).out_of_bounds.size(), 2u);
  EXPECT_THROW(evaluate(m, Assignment{1}), Error);
}

TEST(Evaluate, OracleOptimumOnToy) {
  const auto ds = testing::toy_2x2x3();
  const Hyperparams hp{1, 2};
  const Encoding enc = build_mip(ds, hp);
  const auto vars = enumerable_variables(enc);
  const auto oracle = brute_force_oracle(enc.model, vars, completion_from_weights(enc));
  ASSERT_TRUE(oracle.has_value());
  const Evaluation ev = evaluate(enc.model, oracle->assignment);
  EXPECT_TRUE(ev.feasible);
  EXPECT_EQ(ev.objective, oracle->objective);
  EXPECT_EQ(ev.objective, testing::direct_optimum(ds, hp).objective);
}

}  // namespace
}  // namespace binreg
