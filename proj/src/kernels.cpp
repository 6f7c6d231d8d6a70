#include "capmap/kernels.hpp"

#include <exception>
#include <random>

#include "capmap/errors.hpp"

namespace capmap {

CountLayout make_count_layout(const CapabilityModel& model) {
  CountLayout layout;
  for (const auto& [id, cpt] : model.cpts) {
    CountLayout::Node node;
    node.id = id;
    node.eventual = is_enode_id(id);
    node.var = static_cast<int>(model.variable_index(fact_of(id)));
    for (const auto& p : cpt.parents) node.parents.push_back(static_cast<int>(model.variable_index(p)));
    layout.nodes.push_back(std::move(node));
  }
  return layout;
}

SimulationPlan::SimulationPlan(const CapabilityModel& truth) : tables(truth) {
  // Kahn's algorithm, always taking the earliest declared ready fact.
  const std::size_t n = tables.num_facts();
  std::vector<int> pending(n);
  std::vector<std::vector<int>> children(n);
  for (std::size_t v = 0; v < n; ++v) {
    for (int p : tables.causal_parents(v)) {
      children[p].push_back(static_cast<int>(v));
      ++pending[v];
    }
  }
  std::vector<char> done(n, 0);
  while (topo_order.size() < n) {
    for (std::size_t v = 0; v < n; ++v) {
      if (done[v] || pending[v] != 0) continue;
      done[v] = 1;
      topo_order.push_back(static_cast<int>(v));
      for (int c : children[v]) --pending[c];
      break;
    }
  }
}

namespace {

void count_node(const CountLayout::Node& node, std::span<const WeightedTransition> data,
                std::vector<double>& s, std::vector<double>& t) {
  const std::size_t width = node.parents.size();
  s.assign(std::size_t{1} << width, 0.0);
  t.assign(std::size_t{1} << width, 0.0);
  for (const auto& tr : data) {
    std::size_t row = 0;
    for (std::size_t q = 0; q < width; ++q) {
      row |= static_cast<std::size_t>(tr.initial[node.parents[q]] != 0) << (width - 1 - q);
    }
    const auto& source = node.eventual ? tr.final : tr.initial;
    if (source[node.var]) {
      s[row] += tr.weight;
    } else {
      t[row] += tr.weight;
    }
  }
}

// Uniform double in [0, 1) from the top 53 bits.
double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

Trace simulate_one(const SimulationPlan& plan, std::uint64_t seed, std::size_t index,
                   double observability) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
  std::mt19937_64 rng(seq);
  const auto& tables = plan.tables;
  const std::size_t n = tables.num_facts();

  auto row_of = [&](const PointEstimates::Table& t, const std::vector<std::uint8_t>& values) {
    std::size_t row = 0;
    const std::size_t width = t.parents.size();
    for (std::size_t q = 0; q < width; ++q) {
      row |= static_cast<std::size_t>(values[t.parents[q]]) << (width - 1 - q);
    }
    return row;
  };

  std::vector<std::uint8_t> initial(n), final(n);
  for (int v : plan.topo_order) {
    const auto& t = tables.fact_table(v);
    initial[v] = uniform01(rng) < t.theta[row_of(t, initial)] ? 1 : 0;
  }
  for (std::size_t v = 0; v < n; ++v) {
    const auto& t = tables.eventual_table(v);
    final[v] = uniform01(rng) < t.theta[row_of(t, initial)] ? 1 : 0;
  }

  Trace trace;
  for (const auto* values : {&initial, &final}) {
    StateObservation obs;
    for (std::size_t v = 0; v < n; ++v) {
      if (!(uniform01(rng) < observability)) continue;
      ((*values)[v] ? obs.true_vars : obs.false_vars).push_back(tables.name(v));
    }
    trace.observations.push_back(std::move(obs));
  }
  return trace;
}

// Runs body(i) for i in [0, n) across threads, rethrowing the exception of
// the lowest failing index.
template <typename Body>
void parallel_for(std::size_t n, Body&& body) {
  std::vector<std::exception_ptr> errors(n);
  const auto count = static_cast<std::int64_t>(n);
#pragma omp parallel for schedule(dynamic)
  for (std::int64_t i = 0; i < count; ++i) {
    try {
      body(static_cast<std::size_t>(i));
    } catch (...) {
      errors[static_cast<std::size_t>(i)] = std::current_exception();
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

void check_observability(double observability) {
  if (!(observability >= 0.0 && observability <= 1.0)) {
    throw UsageError("observability must lie in [0, 1]");
  }
}

}  // namespace

namespace serial {

RowCounts accumulate_counts(const CountLayout& layout, std::span<const WeightedTransition> data) {
  RowCounts out;
  out.s.resize(layout.nodes.size());
  out.t.resize(layout.nodes.size());
  for (std::size_t k = 0; k < layout.nodes.size(); ++k) {
    count_node(layout.nodes[k], data, out.s[k], out.t[k]);
  }
  return out;
}

std::vector<double> query_batch(const PointEstimates& model, std::span<const CapabilitySpec> specs) {
  std::vector<double> out;
  out.reserve(specs.size());
  for (const auto& spec : specs) out.push_back(query_capability(model, spec));
  return out;
}

std::vector<Trace> simulate(const SimulationPlan& plan, std::size_t count, std::uint64_t seed,
                            double observability) {
  check_observability(observability);
  std::vector<Trace> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) out.push_back(simulate_one(plan, seed, i, observability));
  return out;
}

}  // namespace serial

namespace parallel {

RowCounts accumulate_counts(const CountLayout& layout, std::span<const WeightedTransition> data) {
  RowCounts out;
  out.s.resize(layout.nodes.size());
  out.t.resize(layout.nodes.size());
  parallel_for(layout.nodes.size(),
               [&](std::size_t k) { count_node(layout.nodes[k], data, out.s[k], out.t[k]); });
  return out;
}

std::vector<double> query_batch(const PointEstimates& model, std::span<const CapabilitySpec> specs) {
  std::vector<double> out(specs.size());
  parallel_for(specs.size(), [&](std::size_t i) { out[i] = query_capability(model, specs[i]); });
  return out;
}

std::vector<Trace> simulate(const SimulationPlan& plan, std::size_t count, std::uint64_t seed,
                            double observability) {
  check_observability(observability);
  std::vector<Trace> out(count);
  parallel_for(count, [&](std::size_t i) { out[i] = simulate_one(plan, seed, i, observability); });
  return out;
}

}  // namespace parallel

}  // namespace capmap
