#pragma once

// Data-parallel kernels. Each has an OpenMP implementation in `parallel` and
// a straightforward loop in `serial` kept as the reference for tests and
// benchmarks. Both produce bit-identical results for any thread count.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "capmap/inference.hpp"
#include "capmap/learning.hpp"

namespace capmap {

/// Which assignment entries feed each CPT, aligned with `CapabilityModel::cpts`
/// iteration order.
struct CountLayout {
  struct Node {
    std::string id;
    std::vector<int> parents;  // variable indices, CPT order
    int var = 0;               // variable whose value is counted
    bool eventual = false;     // read the value from the final assignment
  };
  std::vector<Node> nodes;
};

CountLayout make_count_layout(const CapabilityModel& model);

/// Per node, per row: weighted true (s) and false (t) counts.
struct RowCounts {
  std::vector<std::vector<double>> s;
  std::vector<std::vector<double>> t;

  bool operator==(const RowCounts&) const = default;
};

/// Sampling plan for one model: topological fact order and compiled tables.
struct SimulationPlan {
  PointEstimates tables;
  std::vector<int> topo_order;

  explicit SimulationPlan(const CapabilityModel& truth);
};

namespace serial {

RowCounts accumulate_counts(const CountLayout& layout, std::span<const WeightedTransition> data);
std::vector<double> query_batch(const PointEstimates& model, std::span<const CapabilitySpec> specs);
std::vector<Trace> simulate(const SimulationPlan& plan, std::size_t count, std::uint64_t seed,
                            double observability);

}  // namespace serial

namespace parallel {

/// Parallel over CPTs; every row sums its data in input order.
RowCounts accumulate_counts(const CountLayout& layout, std::span<const WeightedTransition> data);
/// Parallel over specs.
std::vector<double> query_batch(const PointEstimates& model, std::span<const CapabilitySpec> specs);
/// Parallel over traces; trace i draws from its own stream seeded by (seed, i).
std::vector<Trace> simulate(const SimulationPlan& plan, std::size_t count, std::uint64_t seed,
                            double observability);

}  // namespace parallel

}  // namespace capmap
