#include "capmap/learning.hpp"

#include <cmath>

#include "capmap/errors.hpp"
#include "capmap/kernels.hpp"

namespace capmap {

std::vector<TransitionPair> split_trace(const Trace& trace) {
  if (trace.observations.size() < 2) {
    throw ValidationError("trace needs at least 2 observations, got " +
                          std::to_string(trace.observations.size()));
  }
  std::vector<TransitionPair> pairs;
  for (std::size_t i = 0; i + 1 < trace.observations.size(); ++i) {
    pairs.emplace_back(trace.observations[i], trace.observations[i + 1]);
  }
  return pairs;
}

namespace {

// -1 unknown, 0 false, 1 true.
std::vector<int> observe(const StateObservation& obs, const CapabilityModel& model) {
  std::vector<int> values(model.graph.variables.size(), -1);
  for (const auto& v : obs.true_vars) values[model.variable_index(v)] = 1;
  for (const auto& v : obs.false_vars) {
    auto& slot = values[model.variable_index(v)];
    if (slot == 1) throw ValidationError("'" + v + "' observed both true and false");
    slot = 0;
  }
  return values;
}

}  // namespace

Completion complete_transition(const TransitionPair& pair, const CapabilityModel& model,
                               std::size_t max_unknown) {
  const auto first = observe(pair.first, model);
  const auto second = observe(pair.second, model);
  const std::size_t n = first.size();

  // Unknown slots: initial values occupy [0, n), final values [n, 2n).
  std::vector<std::size_t> holes;
  for (std::size_t v = 0; v < n; ++v) {
    if (first[v] < 0) holes.push_back(v);
  }
  for (std::size_t v = 0; v < n; ++v) {
    if (second[v] < 0) holes.push_back(n + v);
  }

  Completion out;
  out.unknown = holes.size();
  if (holes.size() > max_unknown || holes.size() >= 63) {
    out.skipped = true;
    return out;
  }

  WeightedTransition base;
  base.initial.resize(n);
  base.final.resize(n);
  for (std::size_t v = 0; v < n; ++v) {
    base.initial[v] = static_cast<std::uint8_t>(first[v] == 1);
    base.final[v] = static_cast<std::uint8_t>(second[v] == 1);
  }
  base.weight = std::ldexp(1.0, -static_cast<int>(holes.size()));

  const std::size_t combos = std::size_t{1} << holes.size();
  out.transitions.reserve(combos);
  for (std::size_t bits = 0; bits < combos; ++bits) {
    WeightedTransition t = base;
    for (std::size_t h = 0; h < holes.size(); ++h) {
      const auto value = static_cast<std::uint8_t>((bits >> (holes.size() - 1 - h)) & 1U);
      if (holes[h] < n) {
        t.initial[holes[h]] = value;
      } else {
        t.final[holes[h] - n] = value;
      }
    }
    out.transitions.push_back(std::move(t));
  }
  return out;
}

TrainingSet prepare_training_set(const CapabilityModel& model, std::span<const Trace> traces,
                                 std::size_t max_unknown) {
  TrainingSet set;
  for (std::size_t i = 0; i < traces.size(); ++i) {
    const auto pairs = split_trace(traces[i]);
    for (std::size_t k = 0; k < pairs.size(); ++k) {
      auto completion = complete_transition(pairs[k], model, max_unknown);
      if (completion.skipped) {
        set.skipped.push_back({i, k, completion.unknown});
        continue;
      }
      for (auto& t : completion.transitions) set.transitions.push_back(std::move(t));
    }
  }
  return set;
}

CapabilityModel update(const CapabilityModel& model, std::span<const WeightedTransition> data) {
  throw_if_errors(validate_model(model), "model '" + model.agent + "'");
  const std::size_t n = model.graph.variables.size();
  for (const auto& t : data) {
    if (t.initial.size() != n || t.final.size() != n) {
      throw ValidationError("transition does not assign every model variable");
    }
    if (!(t.weight > 0.0) || !std::isfinite(t.weight)) {
      throw ValidationError("transition weight must be positive");
    }
  }
  const CountLayout layout = make_count_layout(model);
  const RowCounts counts = parallel::accumulate_counts(layout, data);

  CapabilityModel out = model;
  for (std::size_t k = 0; k < layout.nodes.size(); ++k) {
    auto& rows = out.cpt(layout.nodes[k].id).rows;
    for (std::size_t j = 0; j < rows.size(); ++j) {
      rows[j].a += counts.s[k][j];
      rows[j].b += counts.t[k][j];
    }
  }
  return out;
}

std::vector<Trace> simulate_traces(const CapabilityModel& truth, std::size_t count,
                                   std::uint64_t seed, double observability) {
  return parallel::simulate(SimulationPlan(truth), count, seed, observability);
}

}  // namespace capmap
