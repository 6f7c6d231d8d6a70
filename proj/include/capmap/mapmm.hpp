#pragma once

// Mixed-model multi-agent planning: STRIPS robots plus capability-modelled
// humans, searching for the plan with the highest success probability.

#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "capmap/inference.hpp"
#include "capmap/model.hpp"
#include "capmap/strips.hpp"

namespace capmap {

struct Robot {
  std::string id;
  std::vector<StripsAction> actions;

  bool operator==(const Robot&) const = default;
};

struct Human {
  std::string id;
  CapabilityModel model;
  std::vector<CapabilitySpec> operations;  // the planner's menu for this agent
  std::optional<std::string> model_path;   // set when the model was loaded by reference

  bool operator==(const Human&) const = default;
};

struct MapMmProblem {
  std::vector<VarId> propositions;
  std::vector<Robot> robots;
  std::vector<Human> humans;
  std::vector<VarId> init_true;
  std::vector<VarId> init_unknown;
  std::vector<VarId> goal;
  std::optional<std::size_t> communication_threshold;

  bool operator==(const MapMmProblem&) const = default;
};

/// Cross-checks every id; `node` fields carry document paths such as
/// `humans[0].operations[1].A`.
std::vector<Violation> validate_problem(const MapMmProblem& problem);

/// A human operation resolved against the problem vocabulary.
struct GroundOperation {
  std::size_t agent = 0;
  CapabilitySpec spec;
  std::vector<int> c, d, a, b;
  std::vector<int> disturbed;  // ancestors of A and B, minus A and B
  double probability = 0.0;
  std::string step_id;
};

/// Problem with interned propositions, grounded actions and compiled models.
/// Immutable after construction.
class CompiledProblem {
 public:
  struct RobotAction {
    std::size_t robot = 0;
    GroundAction action;
    std::string step_id;
  };
  struct Agent {
    std::string id;
    const CapabilityModel* model = nullptr;
    std::shared_ptr<const PointEstimates> estimates;
    std::vector<int> vars;  // problem index of each model variable, declared order
  };

  explicit CompiledProblem(const MapMmProblem& problem);  // validates; keeps a reference

  const MapMmProblem& source() const { return *source_; }
  const PropositionIndex& props() const { return props_; }
  const std::vector<RobotAction>& robot_actions() const { return robot_actions_; }
  const std::vector<Agent>& agents() const { return agents_; }
  const std::vector<GroundOperation>& menu() const { return menu_; }
  const PlanningState& initial() const { return initial_; }
  const std::vector<int>& goal() const { return goal_; }
  bool is_goal(const PlanningState& s) const;

  /// Grounds `spec` for agent `agent`, computing its success probability.
  GroundOperation ground_operation(std::size_t agent, const CapabilitySpec& spec) const;

 private:
  const MapMmProblem* source_;
  PropositionIndex props_;
  std::vector<RobotAction> robot_actions_;
  std::vector<Agent> agents_;
  std::vector<GroundOperation> menu_;
  PlanningState initial_;
  std::vector<int> goal_;
};

/// C is contained in T(s) and D in N(s).
bool applicable(const GroundOperation& op, const PlanningState& s);

/// State after a successful operation: A becomes true, B false, and the
/// disturbed ancestors become unknown. Throws UsageError if not applicable.
PlanningState apply_human_operation(const GroundOperation& op, const PlanningState& s);

/// Convenience overload grounding `spec` on the fly; returns the successor
/// state and the operation's success probability.
std::pair<PlanningState, double> apply_human_operation(const CapabilityModel& model,
                                                       const CapabilitySpec& spec,
                                                       const PlanningState& s,
                                                       const PropositionIndex& props);

inline constexpr double kInfiniteCost = std::numeric_limits<double>::infinity();

/// Goal-driven admissible estimate of the remaining -log success probability.
///
/// For every goal proposition that is not yet true and that no robot action
/// adds, the cheapest agent able to produce it is charged
/// -log P(e:p | every other model variable true); the estimate is the most
/// expensive such proposition. The cheapest agent is used (not the most
/// expensive) since only the minimum keeps the bound admissible.
class GoalHeuristic {
 public:
  explicit GoalHeuristic(const CompiledProblem& problem);

  double operator()(const PlanningState& s) const;
  /// Some goal is neither true nor addable by a robot.
  bool needs_human(const PlanningState& s) const;
  /// Cost charged for goal index `k` (position in CompiledProblem::goal()),
  /// or nullopt when a robot can add it.
  std::optional<double> goal_cost(std::size_t k) const { return costs_[k]; }

 private:
  const CompiledProblem* problem_;
  std::vector<std::optional<double>> costs_;
};

double heuristic_h(const PlanningState& s, const CompiledProblem& problem);

/// Menu and auto-generated operations applicable in a state, memoized per
/// (agent, spec) for the lifetime of one search.
class OperationSource {
 public:
  OperationSource(const CompiledProblem& problem, bool auto_ops);

  std::vector<const GroundOperation*> applicable_in(const PlanningState& s);

 private:
  const CompiledProblem* problem_;
  bool auto_ops_;
  std::map<std::pair<std::size_t, CapabilitySpec>, GroundOperation> cache_;
};

struct PlanStep {
  enum class Kind { Robot, Human };
  Kind kind = Kind::Robot;
  std::string agent;   // robot or human id
  std::string action;  // robot action id (robot steps)
  CapabilitySpec spec; // human steps
  double probability = 1.0;

  bool operator==(const PlanStep&) const = default;
};

struct Plan {
  std::vector<PlanStep> steps;
  double success_probability = 1.0;
};

enum class SearchStatus { Found, NoPlan, BudgetExceeded };

struct SearchOptions {
  bool auto_ops = false;
  std::size_t max_expansions = 1'000'000;
  /// Called when a state is expanded.
  std::function<void(const PlanningState& s, double g, double h)> on_expand;
  /// Called for each generated edge with its step cost.
  std::function<void(const PlanningState& from, const PlanningState& to, double cost)> on_edge;
};

struct SearchResult {
  SearchStatus status = SearchStatus::NoPlan;
  std::optional<Plan> plan;
  std::size_t expansions = 0;
};

/// A* over (T, N, U) states with step cost -log p (robot steps cost 0).
/// Ties on f break by lower g, fewer human steps, then step id.
SearchResult astar_plan(const CompiledProblem& problem, const SearchOptions& options = {});
SearchResult astar_plan(const MapMmProblem& problem, const SearchOptions& options = {});

/// One line per step plus the success probability.
std::string render_plan(const Plan& plan);

}  // namespace capmap
