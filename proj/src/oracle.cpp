#include "capmap/oracle.hpp"

#include <algorithm>
#include <map>
#include <tuple>

#include "capmap/errors.hpp"

namespace capmap::oracle {

double joint_enumeration_query(const CapabilityModel& model, const CapabilitySpec& spec) {
  const auto& vars = model.graph.variables;
  const std::size_t n = vars.size();
  if (2 * n > kMaxEnumerationNodes) {
    throw UsageError("joint enumeration is limited to " + std::to_string(kMaxEnumerationNodes) +
                     " nodes");
  }
  auto position = [&](const VarId& v) {
    auto it = std::find(vars.begin(), vars.end(), v);
    if (it == vars.end()) throw ValidationError("unknown variable '" + v + "'");
    return static_cast<std::size_t>(it - vars.begin());
  };
  auto probability_true = [&](const Cpt& cpt, const std::vector<int>& x) {
    std::size_t row = 0;
    for (const auto& p : cpt.parents) row = (row << 1) | static_cast<std::size_t>(x[position(p)]);
    const BetaParam& beta = cpt.rows.at(row);
    return beta.a / (beta.a + beta.b);
  };

  double numerator = 0.0;
  double denominator = 0.0;
  std::vector<int> x(n);
  for (std::size_t code = 0; code < (std::size_t{1} << n); ++code) {
    for (std::size_t i = 0; i < n; ++i) x[i] = static_cast<int>((code >> (n - 1 - i)) & 1U);
    bool consistent = true;
    for (const auto& c : spec.C) consistent = consistent && x[position(c)] == 1;
    for (const auto& d : spec.D) consistent = consistent && x[position(d)] == 0;
    if (!consistent) continue;

    double joint = 1.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double pt = probability_true(model.cpt(vars[i]), x);
      joint *= x[i] ? pt : 1.0 - pt;
    }
    double target = 1.0;
    for (const auto& a : spec.A) target *= probability_true(model.cpt(enode_id(a)), x);
    for (const auto& b : spec.B) target *= 1.0 - probability_true(model.cpt(enode_id(b)), x);
    denominator += joint;
    numerator += joint * target;
  }
  if (!(denominator > 0.0)) throw ImpossibleEvidence("impossible evidence");
  return numerator / denominator;
}

OracleState initial_state(const MapMmProblem& problem) {
  OracleState s;
  std::set<VarId> unknown(problem.init_unknown.begin(), problem.init_unknown.end());
  for (const auto& p : problem.propositions) {
    if (std::find(problem.init_true.begin(), problem.init_true.end(), p) != problem.init_true.end()) {
      s.true_set.insert(p);
    } else if (!unknown.count(p)) {
      s.false_set.insert(p);
    }
  }
  return s;
}

namespace {

struct Transition {
  std::string label;
  double probability = 1.0;  // success probability (1 for robots)
  OracleState success;
  OracleState failure;  // only meaningful for human operations
  bool human = false;
};

class World {
 public:
  World(const MapMmProblem& problem, bool auto_ops) : problem_(problem), auto_ops_(auto_ops) {}

  bool is_goal(const OracleState& s) const {
    return std::all_of(problem_.goal.begin(), problem_.goal.end(),
                       [&](const VarId& g) { return s.true_set.count(g) != 0; });
  }

  std::vector<Transition> transitions(const OracleState& s) {
    std::vector<Transition> out;
    for (const auto& robot : problem_.robots) {
      for (const auto& a : robot.actions) {
        bool ok = std::all_of(a.pre.begin(), a.pre.end(),
                              [&](const VarId& p) { return s.true_set.count(p) != 0; });
        if (!ok) continue;
        Transition t;
        t.label = robot.id + "/" + a.id;
        t.success = s;
        for (const auto& p : a.del) {
          t.success.true_set.erase(p);
          t.success.false_set.insert(p);
        }
        for (const auto& p : a.add) {
          t.success.false_set.erase(p);
          t.success.true_set.insert(p);
        }
        out.push_back(std::move(t));
      }
    }
    for (std::size_t h = 0; h < problem_.humans.size(); ++h) {
      for (const auto& spec : specs_for(h, s)) {
        bool ok = std::all_of(spec.C.begin(), spec.C.end(),
                              [&](const VarId& p) { return s.true_set.count(p) != 0; }) &&
                  std::all_of(spec.D.begin(), spec.D.end(),
                              [&](const VarId& p) { return s.false_set.count(p) != 0; });
        if (!ok) continue;
        out.push_back(human_transition(h, spec, s));
      }
    }
    return out;
  }

 private:
  std::vector<CapabilitySpec> specs_for(std::size_t h, const OracleState& s) const {
    const Human& human = problem_.humans[h];
    std::vector<CapabilitySpec> specs = human.operations;
    if (!auto_ops_) return specs;
    CapabilitySpec known;
    for (const auto& v : human.model.graph.variables) {
      if (s.true_set.count(v)) known.C.insert(v);
      if (s.false_set.count(v)) known.D.insert(v);
    }
    for (const auto& v : human.model.graph.variables) {
      if (s.true_set.count(v)) continue;
      CapabilitySpec spec = known;
      spec.A = {v};
      specs.push_back(std::move(spec));
    }
    return specs;
  }

  // Every fact with a causal path into A or B, excluding A and B themselves.
  static std::set<VarId> disturbed(const CapabilityModel& model, const CapabilitySpec& spec) {
    std::set<VarId> targets = spec.A;
    targets.insert(spec.B.begin(), spec.B.end());
    std::set<VarId> found;
    bool grew = true;
    while (grew) {
      grew = false;
      for (const auto& [from, to] : model.graph.edges) {
        if ((targets.count(to) || found.count(to)) && !found.count(from)) {
          found.insert(from);
          grew = true;
        }
      }
    }
    for (const auto& t : targets) found.erase(t);
    return found;
  }

  Transition human_transition(std::size_t h, const CapabilitySpec& spec, const OracleState& s) {
    const Human& human = problem_.humans[h];
    const auto key = std::make_pair(h, spec);
    auto it = probability_.find(key);
    if (it == probability_.end()) {
      it = probability_.emplace(key, joint_enumeration_query(human.model, spec)).first;
    }
    const std::set<VarId> moved = disturbed(human.model, spec);

    Transition t;
    t.human = true;
    t.label = human.id + ": " + to_string(spec);
    t.probability = it->second;

    t.success = s;
    for (const auto& p : moved) {
      t.success.true_set.erase(p);
      t.success.false_set.erase(p);
    }
    for (const auto& p : spec.A) {
      t.success.false_set.erase(p);
      t.success.true_set.insert(p);
    }
    for (const auto& p : spec.B) {
      t.success.true_set.erase(p);
      t.success.false_set.insert(p);
    }

    t.failure = s;
    for (const auto* group : {&moved, &spec.A, &spec.B}) {
      for (const auto& p : *group) {
        t.failure.true_set.erase(p);
        t.failure.false_set.erase(p);
      }
    }
    return t;
  }

  const MapMmProblem& problem_;
  bool auto_ops_;
  std::map<std::pair<std::size_t, CapabilitySpec>, double> probability_;
};

class LinearSearch {
 public:
  LinearSearch(World& world, std::size_t depth_limit) : world_(world), limit_(depth_limit) {}

  OraclePlan best(const OracleState& s, std::size_t depth) {
    if (world_.is_goal(s)) return {1.0, {}};
    if (depth == 0) return {0.0, {}};
    auto key = std::make_pair(s, depth);
    if (auto it = memo_.find(key); it != memo_.end()) return it->second;
    OraclePlan result;
    for (const auto& t : world_.transitions(s)) {
      OraclePlan rest = best(t.success, depth - 1);
      const double value = t.probability * rest.probability;
      // Equal values prefer the shorter sequence.
      const bool shorter = rest.steps.size() + 1 < result.steps.size();
      if (value > result.probability || (value == result.probability && value > 0.0 && shorter)) {
        result.probability = value;
        result.steps = {t.label};
        result.steps.insert(result.steps.end(), rest.steps.begin(), rest.steps.end());
      }
    }
    memo_.emplace(std::move(key), result);
    return result;
  }

 private:
  World& world_;
  std::size_t limit_;
  std::map<std::pair<OracleState, std::size_t>, OraclePlan> memo_;
};

class ConditionalSearch {
 public:
  explicit ConditionalSearch(World& world) : world_(world) {}

  double value(const OracleState& s, std::size_t requests_left, std::size_t depth) {
    if (world_.is_goal(s)) return 1.0;
    if (depth == 0) return 0.0;
    auto key = std::make_tuple(s, requests_left, depth);
    if (auto it = memo_.find(key); it != memo_.end()) return it->second;
    double best = 0.0;  // abandon
    for (const auto& t : world_.transitions(s)) {
      double v = 0.0;
      if (!t.human) {
        v = value(t.success, requests_left, depth - 1);
      } else if (requests_left > 0) {
        v = t.probability * value(t.success, requests_left - 1, depth - 1) +
            (1.0 - t.probability) * value(t.failure, requests_left - 1, depth - 1);
      }
      best = std::max(best, v);
    }
    memo_.emplace(std::move(key), best);
    return best;
  }

 private:
  World& world_;
  std::map<std::tuple<OracleState, std::size_t, std::size_t>, double> memo_;
};

void check_plan_guard(const MapMmProblem& problem, std::size_t max_depth) {
  if (problem.propositions.size() > kMaxPlanPropositions || max_depth > kMaxPlanDepth) {
    throw UsageError("plan oracle is limited to " + std::to_string(kMaxPlanPropositions) +
                     " propositions and depth " + std::to_string(kMaxPlanDepth));
  }
}

}  // namespace

OraclePlan brute_force_optimal_plan(const MapMmProblem& problem, std::size_t max_depth,
                                    bool auto_ops) {
  return brute_force_optimal_plan_from(problem, initial_state(problem), max_depth, auto_ops);
}

OraclePlan brute_force_optimal_plan_from(const MapMmProblem& problem, const OracleState& start,
                                         std::size_t max_depth, bool auto_ops) {
  check_plan_guard(problem, max_depth);
  World world(problem, auto_ops);
  LinearSearch search(world, max_depth);
  return search.best(start, max_depth);
}

double brute_force_conditional(const MapMmProblem& problem, std::size_t budget,
                               std::size_t max_depth, bool auto_ops) {
  if (problem.propositions.size() > kMaxConditionalPropositions ||
      budget > kMaxConditionalBudget || max_depth > kMaxConditionalDepth) {
    throw UsageError("conditional oracle is limited to " +
                     std::to_string(kMaxConditionalPropositions) + " propositions, budget " +
                     std::to_string(kMaxConditionalBudget) + " and depth " +
                     std::to_string(kMaxConditionalDepth));
  }
  World world(problem, auto_ops);
  ConditionalSearch search(world);
  return search.value(initial_state(problem), budget, max_depth);
}

}  // namespace capmap::oracle
