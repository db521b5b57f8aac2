#include "binreg/branch_bound.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <memory>
#include <queue>

#include "binreg/logging.hpp"
#include "binreg/simplex.hpp"

namespace binreg {
namespace {

constexpr double kIntegralityTol = 1e-6;
constexpr double kBoundGuard = 1e-6;

using Clock = std::chrono::steady_clock;

// Bound tightenings from the root to a node, shared between siblings.
struct BranchStep {
  VarId var;
  int64_t lower;
  int64_t upper;
  std::shared_ptr<const BranchStep> parent;
};

struct Node {
  std::shared_ptr<const BranchStep> path;
  double bound;  // rounded-up LP bound inherited from the parent
  int64_t id;
  std::shared_ptr<const DualSimplex::Basis> basis;
};

struct WorseNode {
  bool operator()(const Node& a, const Node& b) const {
    if (a.bound != b.bound) return a.bound > b.bound;
    return a.id > b.id;
  }
};

class BranchAndBound {
 public:
  BranchAndBound(const ModelIR& model, const SolveConfig& config)
      : model_(model), config_(config), lp_(model), start_(Clock::now()) {
    deadline_ = start_ + std::chrono::duration_cast<Clock::duration>(
                             std::chrono::duration<double>(config.time_limit_secs));
    lp_.options().deadline = deadline_;
  }

  MipResult run();

 private:
  double elapsed() const { return std::chrono::duration<double>(Clock::now() - start_).count(); }
  bool out_of_budget() const {
    return Clock::now() >= deadline_ || (config_.node_limit && nodes_ >= *config_.node_limit);
  }

  double global_bound(const std::optional<Node>& current) const;
  void record(double bound);
  void try_candidate(const Assignment& candidate);
  std::optional<Assignment> round_if_integral(std::span<const double> values) const;
  int branching_variable(std::span<const double> values) const;
  void apply_path(const std::shared_ptr<const BranchStep>& path);
  void log_progress(double bound);

  const ModelIR& model_;
  const SolveConfig& config_;
  DualSimplex lp_;
  Clock::time_point start_;
  Clock::time_point deadline_;
  Clock::time_point last_log_ = Clock::time_point::min();

  std::priority_queue<Node, std::vector<Node>, WorseNode> open_;
  std::optional<int64_t> incumbent_value_;
  std::optional<Assignment> incumbent_;
  double reported_bound_ = -INFINITY;
  double dropped_bound_ = INFINITY;
  int64_t nodes_ = 0;
  int64_t next_id_ = 0;
  int64_t lp_iterations_ = 0;
  int64_t lp_failures_ = 0;
  std::vector<BoundSample> trace_;
};

double BranchAndBound::global_bound(const std::optional<Node>& current) const {
  double bound = INFINITY;
  if (current) bound = std::min(bound, current->bound);
  if (!open_.empty()) bound = std::min(bound, open_.top().bound);
  bound = std::min(bound, dropped_bound_);
  if (incumbent_value_) bound = std::min(bound, static_cast<double>(*incumbent_value_));
  return bound;
}

void BranchAndBound::record(double bound) {
  bound = std::max(bound, reported_bound_);
  const bool changed =
      trace_.empty() || bound != reported_bound_ || trace_.back().incumbent != incumbent_value_;
  reported_bound_ = bound;
  if (changed) trace_.push_back({elapsed(), nodes_, incumbent_value_, bound});
}

void BranchAndBound::log_progress(double bound) {
  if (config_.log_interval_secs <= 0) return;
  const auto now = Clock::now();
  if (now - last_log_ < std::chrono::duration<double>(config_.log_interval_secs)) return;
  last_log_ = now;
  const double gap = incumbent_value_ ? relative_gap(*incumbent_value_, bound) : INFINITY;
  log().info("nodes={} inc={} bnd={} gap={} t={:.2f}", nodes_,
             incumbent_value_ ? std::to_string(*incumbent_value_) : std::string("none"), bound,
             gap, elapsed());
}

void BranchAndBound::try_candidate(const Assignment& candidate) {
  const Evaluation eval = evaluate(model_, candidate);
  if (!eval.feasible) return;
  if (!incumbent_value_ || eval.objective < *incumbent_value_) {
    incumbent_value_ = eval.objective;
    incumbent_ = candidate;
    log().debug("new incumbent {} at node {}", eval.objective, nodes_);
  }
}

std::optional<Assignment> BranchAndBound::round_if_integral(std::span<const double> values) const {
  Assignment rounded(values.size());
  for (size_t j = 0; j < values.size(); ++j) {
    const double r = std::round(values[j]);
    if (std::abs(values[j] - r) > kIntegralityTol) return std::nullopt;
    rounded[j] = static_cast<int64_t>(r);
  }
  return rounded;
}

int BranchAndBound::branching_variable(std::span<const double> values) const {
  int best = -1;
  double best_frac = kIntegralityTol;
  bool best_binary = false;
  for (const Variable& v : model_.variables()) {
    const double x = values[v.id.index];
    const double frac = std::abs(x - std::round(x));
    if (frac <= kIntegralityTol) continue;
    const bool binary = v.domain == Domain::kBinary;
    if (best < 0 || (binary && !best_binary) || (binary == best_binary && frac > best_frac)) {
      best = v.id.index;
      best_frac = frac;
      best_binary = binary;
    }
  }
  return best;
}

void BranchAndBound::apply_path(const std::shared_ptr<const BranchStep>& path) {
  lp_.reset_bounds();
  std::vector<char> seen(model_.num_variables(), 0);
  for (const BranchStep* step = path.get(); step != nullptr; step = step->parent.get()) {
    if (seen[step->var.index]) continue;
    seen[step->var.index] = 1;
    lp_.set_bounds(step->var, static_cast<double>(step->lower), static_cast<double>(step->upper));
  }
}

MipResult BranchAndBound::run() {
  std::optional<Node> current = Node{nullptr, -INFINITY, next_id_++, nullptr};
  bool proven = true;

  while (true) {
    if (!current) {
      if (open_.empty()) break;
      current = open_.top();
      open_.pop();
      apply_path(current->path);
      if (current->basis) lp_.load_basis(*current->basis);
    }
    if (incumbent_value_ && current->bound >= static_cast<double>(*incumbent_value_)) {
      current.reset();
      continue;
    }
    const double bound_now = global_bound(current);
    record(bound_now);
    log_progress(reported_bound_);
    if (incumbent_value_ &&
        relative_gap(*incumbent_value_, reported_bound_) <= config_.gap_tolerance) {
      break;
    }
    if (out_of_budget()) {
      proven = false;
      break;
    }

    ++nodes_;
    if (incumbent_value_) {
      lp_.options().objective_cutoff = static_cast<double>(*incumbent_value_) - 1.0 + kBoundGuard;
    }
    LpResult lp = lp_.solve();
    lp_iterations_ += lp.iterations;
    if (lp.status == LpStatus::kError) {
      // One retry from a fresh factorization of the slack basis.
      DualSimplex::Basis slack = lp_.basis();
      std::fill(slack.status.begin(), slack.status.begin() + model_.num_variables(), uint8_t{1});
      std::fill(slack.status.begin() + model_.num_variables(), slack.status.end(), uint8_t{0});
      lp_.load_basis(slack);
      lp = lp_.solve();
      lp_iterations_ += lp.iterations;
    }
    if (lp.status == LpStatus::kIterationLimit && Clock::now() >= deadline_) {
      open_.push(*current);
      proven = false;
      break;
    }
    if (lp.status == LpStatus::kError || lp.status == LpStatus::kIterationLimit ||
        lp.status == LpStatus::kUnbounded) {
      ++lp_failures_;
      dropped_bound_ = std::min(dropped_bound_, current->bound);
      log().warn("node LP failed ({}); node abandoned", to_string(lp.status));
      current.reset();
      continue;
    }
    if (lp.status == LpStatus::kInfeasible || lp.status == LpStatus::kCutoff) {
      current.reset();
      continue;
    }

    const double node_bound = std::max(current->bound, std::ceil(lp.objective - kBoundGuard));
    current->bound = node_bound;

    if (auto rounded = round_if_integral(lp.values)) {
      try_candidate(*rounded);
      current.reset();
      continue;
    }
    if (config_.heuristic) {
      if (auto candidate = config_.heuristic(lp.values)) try_candidate(*candidate);
    }
    if (incumbent_value_ && node_bound >= static_cast<double>(*incumbent_value_)) {
      current.reset();
      continue;
    }

    const int branch = branching_variable(lp.values);
    const Variable& var = model_.variables()[branch];
    const double x = lp.values[branch];
    const auto down = static_cast<int64_t>(std::floor(x));
    // Current bounds of the branching variable at this node.
    int64_t lo = var.lower;
    int64_t hi = var.upper;
    for (const BranchStep* s = current->path.get(); s != nullptr; s = s->parent.get()) {
      if (s->var.index == branch) {
        lo = s->lower;
        hi = s->upper;
        break;
      }
    }
    auto down_step = std::make_shared<const BranchStep>(BranchStep{var.id, lo, down, current->path});
    auto up_step = std::make_shared<const BranchStep>(BranchStep{var.id, down + 1, hi, current->path});
    const bool up_first = x - static_cast<double>(down) >= 0.5;
    auto basis = std::make_shared<const DualSimplex::Basis>(lp_.basis());
    Node queued{up_first ? down_step : up_step, node_bound, next_id_++, basis};
    Node next{up_first ? up_step : down_step, node_bound, next_id_++, nullptr};
    open_.push(std::move(queued));
    // Plunge: the LP keeps its basis, only the branching bound changes.
    const BranchStep& step = *next.path;
    lp_.set_bounds(step.var, static_cast<double>(step.lower), static_cast<double>(step.upper));
    current = std::move(next);
  }

  MipResult result;
  const bool exhausted = proven && !current && open_.empty();
  if (exhausted && incumbent_value_) {
    record(dropped_bound_ < INFINITY ? dropped_bound_ : static_cast<double>(*incumbent_value_));
  } else {
    record(global_bound(current));
  }
  result.incumbent = incumbent_;
  result.objective = incumbent_value_;
  result.nodes = nodes_;
  result.lp_iterations = lp_iterations_;
  result.lp_failures = lp_failures_;
  result.runtime_secs = elapsed();

  if (incumbent_value_) {
    result.bound = std::min(reported_bound_, static_cast<double>(*incumbent_value_));
    result.gap = relative_gap(*incumbent_value_, result.bound);
    result.status = result.gap <= config_.gap_tolerance ? MipStatus::kOptimal
                                                        : MipStatus::kFeasibleTimeout;
  } else if (exhausted && dropped_bound_ == INFINITY) {
    result.bound = INFINITY;
    result.gap = 0.0;
    result.status = MipStatus::kInfeasibleProven;
  } else {
    result.bound = reported_bound_;
    result.gap = INFINITY;
    result.status = MipStatus::kNoSolutionTimeout;
  }
  trace_.push_back({result.runtime_secs, nodes_, incumbent_value_, result.bound});
  result.trace = std::move(trace_);
  if (config_.log_interval_secs > 0) {
    log().info("nodes={} inc={} bnd={} gap={} t={:.2f}", nodes_,
               incumbent_value_ ? std::to_string(*incumbent_value_) : std::string("none"),
               result.bound, result.gap, result.runtime_secs);
  }
  return result;
}

}  // namespace

const char* to_string(MipStatus status) {
  switch (status) {
    case MipStatus::kOptimal:
      return "Optimal";
    case MipStatus::kFeasibleTimeout:
      return "FeasibleTimeout";
    case MipStatus::kInfeasibleProven:
      return "InfeasibleProven";
    case MipStatus::kNoSolutionTimeout:
      return "NoSolutionTimeout";
  }
  return "?";
}

double relative_gap(int64_t incumbent, double bound) {
  const double inc = static_cast<double>(incumbent);
  return std::abs(inc - bound) / std::max(1.0, std::abs(inc));
}

MipResult solve_mip(const ModelIR& model, const SolveConfig& config) {
  BranchAndBound search(model, config);
  return search.run();
}

}  // namespace binreg
