#include "capmap/mapmm.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <iomanip>
#include <queue>
#include <set>
#include <sstream>
#include <unordered_map>

#include "capmap/errors.hpp"

namespace capmap {

std::vector<Violation> validate_problem(const MapMmProblem& problem) {
  std::vector<Violation> out;
  auto report = [&](std::string path, std::string message) {
    out.push_back({Severity::Error, "problem", std::move(path), std::move(message)});
  };

  std::set<VarId> props;
  for (std::size_t i = 0; i < problem.propositions.size(); ++i) {
    const auto& p = problem.propositions[i];
    if (p.empty()) report("propositions[" + std::to_string(i) + "]", "empty proposition id");
    if (!props.insert(p).second) {
      report("propositions[" + std::to_string(i) + "]", "duplicate proposition '" + p + "'");
    }
  }
  auto check_ids = [&](const std::vector<VarId>& ids, const std::string& path) {
    for (std::size_t i = 0; i < ids.size(); ++i) {
      if (!props.count(ids[i])) {
        report(path + "[" + std::to_string(i) + "]", "unknown proposition '" + ids[i] + "'");
      }
    }
  };
  check_ids(problem.init_true, "init_true");
  check_ids(problem.init_unknown, "init_unknown");
  check_ids(problem.goal, "goal");
  for (const auto& p : problem.init_true) {
    if (std::find(problem.init_unknown.begin(), problem.init_unknown.end(), p) !=
        problem.init_unknown.end()) {
      report("init_unknown", "'" + p + "' is both initially true and unknown");
    }
  }

  std::set<std::string> robot_ids;
  for (std::size_t r = 0; r < problem.robots.size(); ++r) {
    const auto& robot = problem.robots[r];
    const std::string base = "robots[" + std::to_string(r) + "]";
    if (!robot_ids.insert(robot.id).second) report(base + ".id", "duplicate robot '" + robot.id + "'");
    std::set<std::string> action_ids;
    for (std::size_t k = 0; k < robot.actions.size(); ++k) {
      const auto& a = robot.actions[k];
      const std::string path = base + ".actions[" + std::to_string(k) + "]";
      if (!action_ids.insert(a.id).second) report(path + ".id", "duplicate action '" + a.id + "'");
      check_ids(a.pre, path + ".pre");
      check_ids(a.add, path + ".add");
      check_ids(a.del, path + ".del");
      for (const auto& p : a.add) {
        if (std::find(a.del.begin(), a.del.end(), p) != a.del.end()) {
          report(path, "'" + p + "' is both added and deleted");
        }
      }
    }
  }

  std::set<std::string> human_ids;
  for (std::size_t h = 0; h < problem.humans.size(); ++h) {
    const auto& human = problem.humans[h];
    const std::string base = "humans[" + std::to_string(h) + "]";
    if (!human_ids.insert(human.id).second) report(base + ".id", "duplicate human '" + human.id + "'");
    for (const auto& v : validate_model(human.model)) {
      if (v.severity == Severity::Error) {
        report(base + ".model" + (v.node.empty() ? "" : "." + v.node), v.code + ": " + v.message);
      }
    }
    for (const auto& v : human.model.graph.variables) {
      if (!props.count(v)) report(base + ".model.variables", "'" + v + "' is not a proposition");
    }
    for (std::size_t k = 0; k < human.operations.size(); ++k) {
      const std::string path = base + ".operations[" + std::to_string(k) + "]";
      for (const auto& v : validate_spec(human.model, human.operations[k])) {
        if (v.severity != Severity::Error) continue;
        std::string side;
        if (v.code == "overlap-a-b") side = ".A";
        if (v.code == "overlap-c-d") side = ".C";
        std::string message = v.message;
        if (v.code == "overlap-a-b" || v.code == "overlap-c-d") {
          message += " ('" + v.node + "'); a capability's true and false sets must be disjoint";
        } else {
          message += " ('" + v.node + "')";
        }
        report(path + side, message);
      }
    }
  }
  return out;
}

CompiledProblem::CompiledProblem(const MapMmProblem& problem) : source_(&problem) {
  throw_if_errors(validate_problem(problem), "problem");
  props_ = PropositionIndex(problem.propositions);
  for (std::size_t r = 0; r < problem.robots.size(); ++r) {
    for (const auto& a : problem.robots[r].actions) {
      robot_actions_.push_back({r, ground(a, props_), "R:" + problem.robots[r].id + ":" + a.id});
    }
  }
  for (const auto& human : problem.humans) {
    Agent agent;
    agent.id = human.id;
    agent.model = &human.model;
    agent.estimates = std::make_shared<const PointEstimates>(human.model);
    for (const auto& v : human.model.graph.variables) agent.vars.push_back(props_.at(v));
    agents_.push_back(std::move(agent));
  }
  for (std::size_t h = 0; h < problem.humans.size(); ++h) {
    for (const auto& spec : problem.humans[h].operations) menu_.push_back(ground_operation(h, spec));
  }
  initial_ = PlanningState::initial(props_.size(), props_.at(problem.init_true),
                                    props_.at(problem.init_unknown));
  goal_ = props_.at(problem.goal);
}

bool CompiledProblem::is_goal(const PlanningState& s) const {
  return std::all_of(goal_.begin(), goal_.end(), [&](int p) { return s.is_true(p); });
}

GroundOperation CompiledProblem::ground_operation(std::size_t agent, const CapabilitySpec& spec) const {
  const auto& a = agents_.at(agent);
  GroundOperation op;
  op.agent = agent;
  op.spec = spec;
  auto resolve = [&](const std::set<VarId>& side) {
    std::vector<int> out;
    for (const auto& v : side) out.push_back(props_.at(v));
    std::sort(out.begin(), out.end());
    return out;
  };
  op.c = resolve(spec.C);
  op.d = resolve(spec.D);
  op.a = resolve(spec.A);
  op.b = resolve(spec.B);
  std::set<VarId> targets = spec.A;
  targets.insert(spec.B.begin(), spec.B.end());
  for (const auto& v : ancestors(*a.model, targets)) {
    if (!targets.count(v)) op.disturbed.push_back(props_.at(v));
  }
  std::sort(op.disturbed.begin(), op.disturbed.end());
  op.probability = query_capability(*a.estimates, spec);
  op.step_id = "H:" + a.id + ":" + to_string(spec);
  return op;
}

bool applicable(const GroundOperation& op, const PlanningState& s) {
  return std::all_of(op.c.begin(), op.c.end(), [&](int p) { return s[p] == Truth::True; }) &&
         std::all_of(op.d.begin(), op.d.end(), [&](int p) { return s[p] == Truth::False; });
}

PlanningState apply_human_operation(const GroundOperation& op, const PlanningState& s) {
  if (!applicable(op, s)) {
    throw UsageError("operation '" + op.step_id + "' is not applicable: C must be true and D false");
  }
  PlanningState next = s;
  for (int p : op.disturbed) next.set(p, Truth::Unknown);
  for (int p : op.b) next.set(p, Truth::False);
  for (int p : op.a) next.set(p, Truth::True);
  return next;
}

std::pair<PlanningState, double> apply_human_operation(const CapabilityModel& model,
                                                       const CapabilitySpec& spec,
                                                       const PlanningState& s,
                                                       const PropositionIndex& props) {
  throw_if_errors(validate_spec(model, spec), "operation " + to_string(spec));
  GroundOperation op;
  auto resolve = [&](const std::set<VarId>& side) {
    std::vector<int> out;
    for (const auto& v : side) out.push_back(props.at(v));
    return out;
  };
  op.c = resolve(spec.C);
  op.d = resolve(spec.D);
  op.a = resolve(spec.A);
  op.b = resolve(spec.B);
  std::set<VarId> targets = spec.A;
  targets.insert(spec.B.begin(), spec.B.end());
  for (const auto& v : ancestors(model, targets)) {
    if (!targets.count(v)) op.disturbed.push_back(props.at(v));
  }
  op.step_id = model.agent + ":" + to_string(spec);
  PlanningState next = apply_human_operation(op, s);
  return {std::move(next), query_capability(model, spec)};
}

GoalHeuristic::GoalHeuristic(const CompiledProblem& problem) : problem_(&problem) {
  std::vector<char> robot_adds(problem.props().size(), 0);
  for (const auto& ra : problem.robot_actions()) {
    for (int p : ra.action.add) robot_adds[p] = 1;
  }
  for (int p : problem.goal()) {
    if (robot_adds[p]) {
      costs_.emplace_back(std::nullopt);
      continue;
    }
    double best = kInfiniteCost;
    for (const auto& agent : problem.agents()) {
      const auto& vars = agent.model->graph.variables;
      const VarId& name = problem.props().name(p);
      if (std::find(vars.begin(), vars.end(), name) == vars.end()) continue;
      CapabilitySpec spec;
      spec.A = {name};
      for (const auto& v : vars) {
        if (v != name) spec.C.insert(v);
      }
      const double prob = query_capability(*agent.estimates, spec);
      const double cost = prob > 0.0 ? -std::log(prob) : kInfiniteCost;
      best = std::min(best, cost);
    }
    costs_.emplace_back(best);
  }
}

double GoalHeuristic::operator()(const PlanningState& s) const {
  double h = 0.0;
  const auto& goal = problem_->goal();
  for (std::size_t k = 0; k < goal.size(); ++k) {
    if (!costs_[k] || s.is_true(goal[k])) continue;
    h = std::max(h, *costs_[k]);
  }
  return h;
}

bool GoalHeuristic::needs_human(const PlanningState& s) const {
  const auto& goal = problem_->goal();
  for (std::size_t k = 0; k < goal.size(); ++k) {
    if (costs_[k] && !s.is_true(goal[k])) return true;
  }
  return false;
}

double heuristic_h(const PlanningState& s, const CompiledProblem& problem) {
  return GoalHeuristic(problem)(s);
}

OperationSource::OperationSource(const CompiledProblem& problem, bool auto_ops)
    : problem_(&problem), auto_ops_(auto_ops) {}

std::vector<const GroundOperation*> OperationSource::applicable_in(const PlanningState& s) {
  std::vector<const GroundOperation*> out;
  for (const auto& op : problem_->menu()) {
    if (applicable(op, s)) out.push_back(&op);
  }
  if (!auto_ops_) return out;
  const auto& agents = problem_->agents();
  for (std::size_t h = 0; h < agents.size(); ++h) {
    const auto& model_vars = agents[h].model->graph.variables;
    CapabilitySpec known;
    for (std::size_t k = 0; k < model_vars.size(); ++k) {
      const Truth t = s[agents[h].vars[k]];
      if (t == Truth::True) known.C.insert(model_vars[k]);
      if (t == Truth::False) known.D.insert(model_vars[k]);
    }
    for (std::size_t k = 0; k < model_vars.size(); ++k) {
      // Asking for something already true only disturbs its ancestors.
      if (s[agents[h].vars[k]] == Truth::True) continue;
      CapabilitySpec spec = known;
      spec.A = {model_vars[k]};
      auto key = std::make_pair(h, spec);
      auto it = cache_.find(key);
      if (it == cache_.end()) {
        it = cache_.emplace(std::move(key), problem_->ground_operation(h, spec)).first;
      }
      out.push_back(&it->second);
    }
  }
  return out;
}

namespace {

struct SearchNode {
  PlanningState state;
  double g = 0.0;
  double h = 0.0;
  std::size_t human_steps = 0;
  std::ptrdiff_t parent = -1;
  // Step that produced this node: robot action index or operation pointer.
  std::ptrdiff_t robot_action = -1;
  const GroundOperation* operation = nullptr;
  std::string step_id;
};

struct OpenEntry {
  double f;
  double g;
  std::size_t human_steps;
  const std::string* step_id;
  std::size_t seq;
  std::size_t node;
};

struct OpenOrder {
  // priority_queue pops the largest, so "greater" means worse.
  bool operator()(const OpenEntry& x, const OpenEntry& y) const {
    if (x.f != y.f) return x.f > y.f;
    if (x.g != y.g) return x.g > y.g;
    if (x.human_steps != y.human_steps) return x.human_steps > y.human_steps;
    if (*x.step_id != *y.step_id) return *x.step_id > *y.step_id;
    return x.seq > y.seq;
  }
};

Plan extract_plan(const CompiledProblem& problem, const std::deque<SearchNode>& nodes,
                  std::size_t goal) {
  std::vector<std::size_t> chain;
  for (auto i = static_cast<std::ptrdiff_t>(goal); i >= 0; i = nodes[i].parent) chain.push_back(i);
  std::reverse(chain.begin(), chain.end());
  Plan plan;
  for (std::size_t k = 1; k < chain.size(); ++k) {
    const SearchNode& n = nodes[chain[k]];
    PlanStep step;
    if (n.operation) {
      step.kind = PlanStep::Kind::Human;
      step.agent = problem.agents()[n.operation->agent].id;
      step.spec = n.operation->spec;
      step.probability = n.operation->probability;
    } else {
      const auto& ra = problem.robot_actions()[n.robot_action];
      step.kind = PlanStep::Kind::Robot;
      step.agent = problem.source().robots[ra.robot].id;
      step.action = ra.action.id;
    }
    plan.success_probability *= step.probability;
    plan.steps.push_back(std::move(step));
  }
  return plan;
}

}  // namespace

SearchResult astar_plan(const CompiledProblem& problem, const SearchOptions& options) {
  const GoalHeuristic heuristic(problem);
  OperationSource operations(problem, options.auto_ops);
  const std::string root_id;

  std::deque<SearchNode> nodes;  // stable addresses for OpenEntry::step_id
  std::unordered_map<PlanningState, std::size_t, PlanningStateHash> best;
  std::priority_queue<OpenEntry, std::vector<OpenEntry>, OpenOrder> open;
  std::size_t seq = 0;

  auto push = [&](SearchNode node) {
    if (node.h == kInfiniteCost) return;
    auto it = best.find(node.state);
    if (it != best.end() && nodes[it->second].g <= node.g) return;
    nodes.push_back(std::move(node));
    const std::size_t idx = nodes.size() - 1;
    best[nodes[idx].state] = idx;
    const auto& n = nodes[idx];
    open.push({n.g + n.h, n.g, n.human_steps, &n.step_id, seq++, idx});
  };

  SearchNode root;
  root.state = problem.initial();
  root.h = heuristic(root.state);
  push(std::move(root));

  SearchResult result;
  while (!open.empty()) {
    const OpenEntry top = open.top();
    open.pop();
    if (best.at(nodes[top.node].state) != top.node) continue;  // superseded
    if (problem.is_goal(nodes[top.node].state)) {
      result.status = SearchStatus::Found;
      result.plan = extract_plan(problem, nodes, top.node);
      return result;
    }
    if (result.expansions >= options.max_expansions) {
      result.status = SearchStatus::BudgetExceeded;
      return result;
    }
    ++result.expansions;
    const PlanningState state = nodes[top.node].state;
    const double g = nodes[top.node].g;
    const std::size_t human_steps = nodes[top.node].human_steps;
    if (options.on_expand) options.on_expand(state, g, nodes[top.node].h);

    const auto& actions = problem.robot_actions();
    for (std::size_t k = 0; k < actions.size(); ++k) {
      if (!applicable(actions[k].action, state)) continue;
      SearchNode child;
      child.state = apply_robot_action(actions[k].action, state);
      if (options.on_edge) options.on_edge(state, child.state, 0.0);
      child.g = g;
      child.h = heuristic(child.state);
      child.human_steps = human_steps;
      child.parent = static_cast<std::ptrdiff_t>(top.node);
      child.robot_action = static_cast<std::ptrdiff_t>(k);
      child.step_id = actions[k].step_id;
      push(std::move(child));
    }
    for (const GroundOperation* op : operations.applicable_in(state)) {
      if (!(op->probability > 0.0)) continue;
      SearchNode child;
      child.state = apply_human_operation(*op, state);
      const double cost = -std::log(op->probability);
      if (options.on_edge) options.on_edge(state, child.state, cost);
      child.g = g + cost;
      child.h = heuristic(child.state);
      child.human_steps = human_steps + 1;
      child.parent = static_cast<std::ptrdiff_t>(top.node);
      child.operation = op;
      child.step_id = op->step_id;
      push(std::move(child));
    }
  }
  result.status = SearchStatus::NoPlan;
  return result;
}

SearchResult astar_plan(const MapMmProblem& problem, const SearchOptions& options) {
  const CompiledProblem compiled(problem);
  return astar_plan(compiled, options);
}

std::string render_plan(const Plan& plan) {
  std::ostringstream out;
  out << std::setprecision(17);
  for (std::size_t i = 0; i < plan.steps.size(); ++i) {
    const auto& s = plan.steps[i];
    out << i + 1 << ". ";
    if (s.kind == PlanStep::Kind::Robot) {
      out << "robot " << s.agent << ": " << s.action << "\n";
    } else {
      out << "human " << s.agent << ": " << to_string(s.spec) << "  (p = " << s.probability
          << ")\n";
    }
  }
  if (plan.steps.empty()) out << "(empty plan: goal already holds)\n";
  out << "success probability: " << plan.success_probability << "\n";
  return out.str();
}

}  // namespace capmap
