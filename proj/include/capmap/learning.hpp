#pragma once

// Online parameter learning from incomplete plan-execution traces.

#include <cstdint>
#include <set>
#include <span>
#include <utility>
#include <vector>

#include "capmap/model.hpp"

namespace capmap {

/// One (possibly partial) snapshot; unlisted variables are unknown.
struct StateObservation {
  std::vector<VarId> true_vars;
  std::vector<VarId> false_vars;

  bool operator==(const StateObservation&) const = default;
};

/// Discontinuous observation sequence; at least the initial and final states.
struct Trace {
  std::vector<StateObservation> observations;

  bool operator==(const Trace&) const = default;
};

using TransitionPair = std::pair<StateObservation, StateObservation>;

/// Complete assignment over the model's variables, in declared order (0/1).
using Assignment = std::vector<std::uint8_t>;

struct WeightedTransition {
  Assignment initial;
  Assignment final;
  double weight = 1.0;
};

/// Consecutive observation pairs of a trace. Throws ValidationError when the
/// trace has fewer than two observations.
std::vector<TransitionPair> split_trace(const Trace& trace);

struct Completion {
  std::vector<WeightedTransition> transitions;  // empty when skipped
  std::size_t unknown = 0;                      // unknown values across both ends
  bool skipped = false;
};

inline constexpr std::size_t kDefaultMaxUnknown = 8;

/// Enumerates all 2^u completions of the unknown values, each weighted
/// 2^-u. When u exceeds `max_unknown` the result is marked skipped instead.
/// Throws ValidationError for variables outside the model or contradictory
/// observations.
Completion complete_transition(const TransitionPair& pair, const CapabilityModel& model,
                               std::size_t max_unknown = kDefaultMaxUnknown);

struct SkippedTransition {
  std::size_t trace = 0;  // index in the input list
  std::size_t pair = 0;   // index of the pair within the trace
  std::size_t unknown = 0;
};

struct TrainingSet {
  std::vector<WeightedTransition> transitions;
  std::vector<SkippedTransition> skipped;
};

/// Splits and completes every trace, collecting skips.
TrainingSet prepare_training_set(const CapabilityModel& model, std::span<const Trace> traces,
                                 std::size_t max_unknown = kDefaultMaxUnknown);

/// Beta update: every fact row gains (w, 0) or (0, w) from the initial
/// assignment, every e-node row from the final value of its fact, with the
/// row picked by the parents' initial values. Returns a new model.
CapabilityModel update(const CapabilityModel& model, std::span<const WeightedTransition> data);

/// Samples `count` two-observation traces from a ground-truth model. Each
/// value is hidden independently with probability 1 - observability.
/// Deterministic in `seed` and independent of the thread count.
std::vector<Trace> simulate_traces(const CapabilityModel& truth, std::size_t count,
                                   std::uint64_t seed, double observability);

}  // namespace capmap
