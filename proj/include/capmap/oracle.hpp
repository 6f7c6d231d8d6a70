#pragma once

// Brute-force reference implementations for cross-checking inference and
// both planners. They share only type definitions with the main code paths:
// states are plain string sets, probabilities come from full-joint
// enumeration, and searches are exhaustive (memoized) enumerations.

#include <set>
#include <string>
#include <vector>

#include "capmap/mapmm.hpp"
#include "capmap/model.hpp"

namespace capmap::oracle {

inline constexpr std::size_t kMaxEnumerationNodes = 20;
inline constexpr std::size_t kMaxPlanPropositions = 8;
inline constexpr std::size_t kMaxPlanDepth = 16;
inline constexpr std::size_t kMaxConditionalPropositions = 6;
inline constexpr std::size_t kMaxConditionalBudget = 4;
inline constexpr std::size_t kMaxConditionalDepth = 24;

/// Sums the full joint over fact assignments in increasing binary order.
/// Throws UsageError for models with more than 20 nodes.
double joint_enumeration_query(const CapabilityModel& model, const CapabilitySpec& spec);

/// Known-true and known-false propositions; the rest are unknown.
struct OracleState {
  std::set<VarId> true_set;
  std::set<VarId> false_set;

  auto operator<=>(const OracleState&) const = default;
};

OracleState initial_state(const MapMmProblem& problem);

struct OraclePlan {
  double probability = 0.0;        // 0 when no plan within the depth bound
  std::vector<std::string> steps;  // one optimal sequence
};

/// Best success probability over every robot/operation sequence of at most
/// `max_depth` steps from the initial state.
OraclePlan brute_force_optimal_plan(const MapMmProblem& problem, std::size_t max_depth,
                                    bool auto_ops = false);

/// Same search from an arbitrary state.
OraclePlan brute_force_optimal_plan_from(const MapMmProblem& problem, const OracleState& start,
                                         std::size_t max_depth, bool auto_ops = false);

/// Best total goal probability over all conditional policies with at most
/// `budget` requests and `max_depth` plan nodes on any execution path.
double brute_force_conditional(const MapMmProblem& problem, std::size_t budget,
                               std::size_t max_depth, bool auto_ops = false);

}  // namespace capmap::oracle
