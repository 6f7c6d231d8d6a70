#include "generators.hpp"

#include <algorithm>
#include <cmath>

namespace capmap::testgen {

std::vector<VarId> names(const std::string& prefix, std::size_t n) {
  std::vector<VarId> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(prefix + std::to_string(i));
  return out;
}

namespace {

void fill_rows(Rng& rng, CapabilityModel& model, bool monotone) {
  for (auto& [id, cpt] : model.cpts) {
    const std::size_t m = cpt.parents.size();
    std::vector<double> weight(m);
    for (auto& w : weight) w = monotone ? rng.uniform(0.0, 3.0) : rng.uniform(-3.0, 3.0);
    const double base = rng.uniform(-3.0, 1.0);
    const double strength = rng.uniform(2.0, 10.0);
    for (std::size_t j = 0; j < cpt.rows.size(); ++j) {
      double z = base;
      for (std::size_t k = 0; k < m; ++k) {
        if ((j >> (m - 1 - k)) & 1U) z += weight[k];
      }
      const double theta = 1.0 / (1.0 + std::exp(-z));
      cpt.rows[j] = {theta * strength, (1.0 - theta) * strength};
    }
  }
}

}  // namespace

CapabilityModel random_model(Rng& rng, std::size_t facts, double edge_probability, bool monotone,
                             const std::vector<VarId>& variables) {
  std::vector<VarId> vars = variables.empty() ? names("v", facts) : variables;
  std::vector<Edge> edges;
  for (std::size_t j = 0; j < vars.size(); ++j) {
    for (std::size_t i = 0; i < j; ++i) {
      if (rng.coin(edge_probability)) edges.emplace_back(vars[i], vars[j]);
    }
  }
  CapabilityModel model = build_model("agent", vars, edges).model;
  fill_rows(rng, model, monotone);
  return model;
}

CapabilityModel random_polytree(Rng& rng, std::size_t facts) {
  constexpr std::size_t kMaxInDegree = 5;
  const std::vector<VarId> vars = names("n", facts);
  std::vector<std::size_t> in_degree(facts, 0);
  std::vector<Edge> edges;
  for (std::size_t i = 1; i < facts; ++i) {
    const std::size_t j = rng.below(i);
    const bool down = rng.coin() ? in_degree[i] < kMaxInDegree : in_degree[j] >= kMaxInDegree;
    if (down) {
      edges.emplace_back(vars[j], vars[i]);
      ++in_degree[i];
    } else {
      edges.emplace_back(vars[i], vars[j]);
      ++in_degree[j];
    }
  }
  CapabilityModel model = build_model("agent", vars, edges).model;
  fill_rows(rng, model, false);
  return model;
}

CapabilitySpec random_spec(Rng& rng, const CapabilityModel& model) {
  std::vector<VarId> pool = model.graph.variables;
  std::shuffle(pool.begin(), pool.end(), rng.engine());
  CapabilitySpec spec;
  std::size_t next = 0;
  const std::size_t a_count = 1 + (pool.size() > 2 && rng.coin(0.3) ? 1 : 0);
  while (next < a_count) spec.A.insert(pool[next++]);
  if (next < pool.size() && rng.coin(0.3)) spec.B.insert(pool[next++]);
  for (; next < pool.size(); ++next) {
    const double u = rng.uniform();
    if (u < 0.3) {
      spec.C.insert(pool[next]);
    } else if (u < 0.5) {
      spec.D.insert(pool[next]);
    }
  }
  return spec;
}

MapMmProblem random_problem(Rng& rng, const ProblemShape& shape) {
  MapMmProblem problem;
  const std::size_t n = 3 + rng.below(shape.max_props - 2);
  problem.propositions = names("p", n);
  const auto& props = problem.propositions;

  const std::size_t robot_count = 1 + rng.below(2);
  problem.robots.resize(robot_count);
  for (std::size_t r = 0; r < robot_count; ++r) problem.robots[r].id = "r" + std::to_string(r);
  const std::size_t actions = rng.below(shape.max_robot_actions + 1);
  for (std::size_t k = 0; k < actions; ++k) {
    StripsAction a;
    a.id = "a" + std::to_string(k);
    if (rng.coin(0.6)) a.pre.push_back(props[rng.below(n)]);
    const std::size_t add = rng.below(n);
    a.add.push_back(props[add]);
    if (rng.coin(0.4)) {
      const std::size_t del = (add + 1 + rng.below(n - 1)) % n;
      a.del.push_back(props[del]);
    }
    problem.robots[rng.below(robot_count)].actions.push_back(std::move(a));
  }

  const std::size_t humans = 1 + rng.below(shape.max_humans);
  for (std::size_t h = 0; h < humans; ++h) {
    Human human;
    human.id = "h" + std::to_string(h);
    const std::size_t size = 2 + rng.below(std::min<std::size_t>(4, n) - 1);
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    std::shuffle(order.begin(), order.end(), rng.engine());
    order.resize(size);
    std::sort(order.begin(), order.end());
    std::vector<VarId> vars;
    for (std::size_t i : order) vars.push_back(props[i]);
    human.model = random_model(rng, size, 0.5, true, vars);
    human.model.agent = human.id;
    const std::size_t menu = 1 + rng.below(shape.max_menu);
    for (std::size_t k = 0; k < menu; ++k) {
      CapabilitySpec spec = random_spec(rng, human.model);
      if (std::find(human.operations.begin(), human.operations.end(), spec) ==
          human.operations.end()) {
        human.operations.push_back(std::move(spec));
      }
    }
    problem.humans.push_back(std::move(human));
  }

  for (const auto& p : props) {
    const double u = rng.uniform();
    if (u < 0.35) {
      problem.init_true.push_back(p);
    } else if (u < 0.55) {
      problem.init_unknown.push_back(p);
    }
  }
  std::vector<VarId> pool = props;
  std::shuffle(pool.begin(), pool.end(), rng.engine());
  pool.resize(1 + rng.below(2));
  std::sort(pool.begin(), pool.end());
  problem.goal = pool;
  return problem;
}

oracle::OracleState to_oracle_state(const PlanningState& s, const PropositionIndex& props) {
  oracle::OracleState out;
  for (int i : s.T()) out.true_set.insert(props.name(i));
  for (int i : s.N()) out.false_set.insert(props.name(i));
  return out;
}

}  // namespace capmap::testgen
