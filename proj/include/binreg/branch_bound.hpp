#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "binreg/model_ir.hpp"

namespace binreg {

enum class MipStatus { kOptimal, kFeasibleTimeout, kInfeasibleProven, kNoSolutionTimeout };

const char* to_string(MipStatus status);

// Maps a node's LP point to a candidate integer assignment. Candidates are
// checked with evaluate() before they can become incumbents.
using PrimalHeuristic = std::function<std::optional<Assignment>(std::span<const double>)>;

struct SolveConfig {
  double time_limit_secs = 3600.0;
  double gap_tolerance = 0.0;
  std::optional<int64_t> node_limit;
  // Kept for reproducibility records; the search itself has no random choices.
  uint64_t seed = 0;
  // Seconds between progress lines on stderr; <= 0 disables them.
  double log_interval_secs = 10.0;
  PrimalHeuristic heuristic;
};

// One point of the anytime progress record.
struct BoundSample {
  double time_secs = 0.0;
  int64_t nodes = 0;
  std::optional<int64_t> incumbent;
  double bound = 0.0;
};

struct MipResult {
  MipStatus status = MipStatus::kNoSolutionTimeout;
  std::optional<Assignment> incumbent;
  std::optional<int64_t> objective;
  double bound = 0.0;
  double gap = 0.0;
  double runtime_secs = 0.0;
  int64_t nodes = 0;
  int64_t lp_iterations = 0;
  int64_t lp_failures = 0;  // node LPs abandoned after a numerical breakdown
  std::vector<BoundSample> trace;
};

// |incumbent - bound| / max(1, |incumbent|).
double relative_gap(int64_t incumbent, double bound);

// Exact LP-based branch-and-bound.
//
// Node selection is best-bound with depth-first plunging: after a node
// branches, the child on the side of the LP value is processed next and its
// sibling is queued. Branching takes the most fractional binary (then
// integer) variable, lowest index on ties. The objective is integral, so
// node bounds are rounded up before pruning.
MipResult solve_mip(const ModelIR& model, const SolveConfig& config);

struct OracleResult {
  int64_t objective = 0;
  Assignment assignment;
  uint64_t points = 0;  // complete assignments evaluated
};

// Exhaustive minimization over the domains of `enumerable`. Every other
// variable starts at its lower bound and may be rewritten by `complete`
// for each enumerated point; the completed point is scored with evaluate().
// Constraints that only involve enumerable variables prune partial points.
// Throws when the product of the domain sizes exceeds `cap`. Returns nothing
// if no enumerated point is feasible.
std::optional<OracleResult> brute_force_oracle(const ModelIR& model,
                                               std::span<const VarId> enumerable,
                                               const std::function<void(Assignment&)>& complete = {},
                                               double cap = 1e8);

}  // namespace binreg
