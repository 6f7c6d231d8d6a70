#pragma once

// Conditional planning with a per-execution-path limit on human requests.
// Each request splits a branch into a success and a failure substate.

#include <functional>
#include <string>
#include <vector>

#include "capmap/mapmm.hpp"

namespace capmap {

struct Substate {
  enum class Status { Open, Goal, Abandoned };

  PlanningState state;
  double mass = 1.0;
  std::size_t requests_used = 0;  // along this execution path
  std::size_t depth = 0;          // plan nodes along this execution path
  Status status = Status::Open;
};

struct CondSearchState {
  std::vector<Substate> substates;
};

/// State after a failed request: A, B and the disturbed ancestors all
/// become unknown, nothing becomes known.
PlanningState apply_failed_operation(const GroundOperation& op, const PlanningState& s);

struct RequestOutcome {
  Substate success;
  Substate failure;
};

/// Splits `sub` on a request for `op`: masses w*p and w*(1-p), request count
/// and depth advanced by one. Throws UsageError when the budget is spent or
/// the operation is not applicable.
RequestOutcome expand_request(const GroundOperation& op, const Substate& sub, std::size_t budget);

/// Upper bound on the success probability reachable from an open substate.
///
/// With q = exp(-h) from GoalHeuristic and r requests left, any execution
/// makes at most r attempts at the hardest human-only goal, each succeeding
/// with probability at most q, so success is bounded by 1 - (1 - q)^r. For
/// r = 1 this is the plain exp(-h); a failed request can be retried, which
/// is why exp(-h) alone is not a bound once r > 1.
double optimistic_success(const Substate& sub, const CompiledProblem& problem,
                          const GoalHeuristic& heuristic, std::size_t budget);

/// -log(sum over substates of mass * optimistic success); goal substates
/// count with their full mass, abandoned ones not at all.
double heuristic_cond(const CondSearchState& s, const CompiledProblem& problem,
                      const GoalHeuristic& heuristic, std::size_t budget);

struct CondPlanNode {
  enum class Kind { Robot, Request, Goal, Abandoned };

  Kind kind = Kind::Abandoned;
  std::string agent;
  std::string action;          // robot nodes
  CapabilitySpec spec;         // request nodes
  double probability = 1.0;    // request success probability
  double mass = 0.0;           // probability of reaching this node
  int child = -1;              // robot nodes
  int success = -1;            // request nodes
  int failure = -1;            // request nodes
  bool depth_exceeded = false; // abandoned because the depth cap was reached
};

/// Tree stored flat; node 0 is the root.
struct ConditionalPlan {
  std::vector<CondPlanNode> nodes;
  double success_probability = 0.0;
  bool depth_exceeded = false;
};

struct CondOptions {
  std::size_t max_depth = 20;
  bool auto_ops = false;
  std::size_t max_expansions = 1'000'000;
  /// Called with the parent substate and the two children of every request
  /// split generated during search.
  std::function<void(const Substate&, const RequestOutcome&)> on_split;
};

enum class CondStatus { Complete, BudgetExceeded };

struct CondResult {
  CondStatus status = CondStatus::Complete;
  ConditionalPlan plan;
  std::size_t expansions = 0;
};

/// Best-first search over sets of substates for the conditional plan with
/// the highest total goal mass, using at most `budget` requests on any path.
CondResult plan_conditional(const CompiledProblem& problem, std::size_t budget,
                            const CondOptions& options = {});
CondResult plan_conditional(const MapMmProblem& problem, std::size_t budget,
                            const CondOptions& options = {});

/// Indented text rendering of the tree.
std::string render_conditional_plan(const ConditionalPlan& plan);

/// Largest number of request nodes on any root-to-leaf path.
std::size_t max_requests_on_path(const ConditionalPlan& plan);

}  // namespace capmap
