#pragma once

// Seeded random instances for property tests, the acceptance suite and the
// benchmark.

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "capmap/mapmm.hpp"
#include "capmap/model.hpp"
#include "capmap/oracle.hpp"

namespace capmap::testgen {

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(engine_); }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  std::size_t below(std::size_t n) {
    return std::uniform_int_distribution<std::size_t>(0, n - 1)(engine_);
  }
  bool coin(double p = 0.5) { return uniform() < p; }
  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
};

std::vector<VarId> names(const std::string& prefix, std::size_t n);

/// Random DAG over `facts` variables (edges only from lower to higher index)
/// with random beta rows. With `monotone`, every row mean is non-decreasing
/// in each parent, which makes evidence monotonicity likely but not certain.
CapabilityModel random_model(Rng& rng, std::size_t facts, double edge_probability, bool monotone,
                             const std::vector<VarId>& variables = {});

/// Random polytree: a random undirected tree with randomly oriented edges.
CapabilityModel random_polytree(Rng& rng, std::size_t facts);

/// Spec with non-empty A, disjoint C/D and A/B, all drawn from `model`.
CapabilitySpec random_spec(Rng& rng, const CapabilityModel& model);

struct ProblemShape {
  std::size_t max_props = 6;
  std::size_t max_robot_actions = 4;
  std::size_t max_humans = 2;
  std::size_t max_menu = 4;
};

/// Random valid MAP-MM instance; human models are monotone random models
/// over a subset of the propositions.
MapMmProblem random_problem(Rng& rng, const ProblemShape& shape);

oracle::OracleState to_oracle_state(const PlanningState& s, const PropositionIndex& props);

}  // namespace capmap::testgen
