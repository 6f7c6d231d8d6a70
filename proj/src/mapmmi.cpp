#include "capmap/mapmmi.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <deque>
#include <iomanip>
#include <queue>
#include <sstream>
#include <unordered_set>

#include "capmap/errors.hpp"

namespace capmap {

PlanningState apply_failed_operation(const GroundOperation& op, const PlanningState& s) {
  PlanningState next = s;
  for (const auto* side : {&op.disturbed, &op.a, &op.b}) {
    for (int p : *side) next.set(p, Truth::Unknown);
  }
  return next;
}

RequestOutcome expand_request(const GroundOperation& op, const Substate& sub, std::size_t budget) {
  if (sub.requests_used >= budget) {
    throw UsageError("request budget of " + std::to_string(budget) + " exhausted");
  }
  RequestOutcome out;
  out.success.state = apply_human_operation(op, sub.state);
  out.failure.state = apply_failed_operation(op, sub.state);
  out.success.mass = sub.mass * op.probability;
  out.failure.mass = sub.mass * (1.0 - op.probability);
  for (auto* child : {&out.success, &out.failure}) {
    child->requests_used = sub.requests_used + 1;
    child->depth = sub.depth + 1;
  }
  return out;
}

double optimistic_success(const Substate& sub, const CompiledProblem& problem,
                          const GoalHeuristic& heuristic, std::size_t budget) {
  if (problem.is_goal(sub.state)) return 1.0;
  if (!heuristic.needs_human(sub.state)) return 1.0;
  const double h = heuristic(sub.state);
  if (h == kInfiniteCost) return 0.0;
  const std::size_t left = budget > sub.requests_used ? budget - sub.requests_used : 0;
  if (left == 0) return 0.0;
  const double q = std::exp(-h);
  return 1.0 - std::pow(1.0 - q, static_cast<double>(left));
}

double heuristic_cond(const CondSearchState& s, const CompiledProblem& problem,
                      const GoalHeuristic& heuristic, std::size_t budget) {
  double total = 0.0;
  for (const auto& sub : s.substates) {
    switch (sub.status) {
      case Substate::Status::Goal: total += sub.mass; break;
      case Substate::Status::Abandoned: break;
      case Substate::Status::Open:
        total += sub.mass * optimistic_success(sub, problem, heuristic, budget);
        break;
    }
  }
  return total > 0.0 ? -std::log(total) : kInfiniteCost;
}

namespace {

struct OpenSub {
  Substate sub;
  int slot = 0;  // plan-tree node this substate will become
};

struct Record {
  int slot;
  CondPlanNode node;
};

struct CondNode {
  std::vector<OpenSub> open;
  double goal_mass = 0.0;
  double bound = 0.0;  // goal_mass + sum of mass * optimistic success
  int next_slot = 1;
  std::ptrdiff_t parent = -1;
  std::vector<Record> records;  // tree nodes fixed by the expansion that made this node
};

class Planner {
 public:
  Planner(const CompiledProblem& problem, std::size_t budget, const CondOptions& options)
      : problem_(problem),
        budget_(budget),
        options_(options),
        heuristic_(problem),
        operations_(problem, options.auto_ops) {}

  CondResult run() {
    CondNode root;
    Substate start;
    start.state = problem_.initial();
    place(root, start, 0);
    finish(root);
    push(std::move(root));

    CondResult result;
    while (!open_.empty()) {
      const Entry top = open_.top();
      open_.pop();
      const CondNode& node = nodes_[top.node];
      if (node.open.empty()) {
        result.plan = assemble(top.node);
        return result;
      }
      if (result.expansions >= options_.max_expansions) {
        result.status = CondStatus::BudgetExceeded;
        result.plan = abandon_all();
        return result;
      }
      ++result.expansions;
      expand(top.node);
    }
    // Unreachable: every node has an "abandon" child that eventually closes.
    result.plan = abandon_all();
    return result;
  }

 private:
  struct Entry {
    double bound;
    bool terminal;
    std::size_t seq;
    std::size_t node;
  };
  struct EntryOrder {
    bool operator()(const Entry& x, const Entry& y) const {
      if (x.bound != y.bound) return x.bound < y.bound;
      if (x.terminal != y.terminal) return !x.terminal;
      return x.seq > y.seq;
    }
  };

  // Classifies a fresh substate: goal, abandoned (no hope or too deep), or open.
  void place(CondNode& node, const Substate& sub, int slot) {
    CondPlanNode leaf;
    leaf.mass = sub.mass;
    if (problem_.is_goal(sub.state)) {
      leaf.kind = CondPlanNode::Kind::Goal;
      node.goal_mass += sub.mass;
      node.records.push_back({slot, leaf});
      return;
    }
    const double u = sub.mass > 0.0 ? optimistic_success(sub, problem_, heuristic_, budget_) : 0.0;
    if (u <= 0.0 || sub.depth >= options_.max_depth) {
      leaf.kind = CondPlanNode::Kind::Abandoned;
      leaf.depth_exceeded = u > 0.0;
      node.records.push_back({slot, leaf});
      return;
    }
    node.open.push_back({sub, slot});
  }

  void finish(CondNode& node) const {
    node.bound = node.goal_mass;
    for (const auto& o : node.open) {
      node.bound += o.sub.mass * optimistic_success(o.sub, problem_, heuristic_, budget_);
    }
  }

  void push(CondNode node) {
    std::string key = key_of(node);
    if (!seen_.insert(std::move(key)).second) return;
    nodes_.push_back(std::move(node));
    const auto& n = nodes_.back();
    open_.push({n.bound, n.open.empty(), seq_++, nodes_.size() - 1});
  }

  static void append_bytes(std::string& key, const void* data, std::size_t size) {
    key.append(static_cast<const char*>(data), size);
  }

  // Identical keys have identical futures: same open substates, same goal mass.
  static std::string key_of(const CondNode& node) {
    std::vector<std::string> parts;
    for (const auto& o : node.open) {
      std::string part;
      for (Truth t : o.sub.state.values()) part.push_back(static_cast<char>(t));
      append_bytes(part, &o.sub.mass, sizeof(double));
      append_bytes(part, &o.sub.requests_used, sizeof(std::size_t));
      append_bytes(part, &o.sub.depth, sizeof(std::size_t));
      parts.push_back(std::move(part));
    }
    std::sort(parts.begin(), parts.end());
    std::string key;
    append_bytes(key, &node.goal_mass, sizeof(double));
    for (const auto& p : parts) {
      const std::size_t len = p.size();
      append_bytes(key, &len, sizeof(len));
      key += p;
    }
    return key;
  }

  CondNode child_of(std::size_t parent_index) const {
    const CondNode& parent = nodes_[parent_index];
    CondNode child;
    child.open.assign(parent.open.begin() + 1, parent.open.end());
    child.goal_mass = parent.goal_mass;
    child.next_slot = parent.next_slot;
    child.parent = static_cast<std::ptrdiff_t>(parent_index);
    return child;
  }

  void expand(std::size_t index) {
    // Always the first open substate; the others are carried over unchanged.
    const OpenSub current = nodes_[index].open.front();
    const Substate& sub = current.sub;

    {
      CondNode child = child_of(index);
      CondPlanNode leaf;
      leaf.kind = CondPlanNode::Kind::Abandoned;
      leaf.mass = sub.mass;
      child.records.push_back({current.slot, leaf});
      finish(child);
      push(std::move(child));
    }

    const auto& actions = problem_.robot_actions();
    for (std::size_t k = 0; k < actions.size(); ++k) {
      if (!applicable(actions[k].action, sub.state)) continue;
      CondNode child = child_of(index);
      Substate next = sub;
      next.state = apply_robot_action(actions[k].action, sub.state);
      next.depth = sub.depth + 1;
      CondPlanNode step;
      step.kind = CondPlanNode::Kind::Robot;
      step.agent = problem_.source().robots[actions[k].robot].id;
      step.action = actions[k].action.id;
      step.mass = sub.mass;
      step.child = child.next_slot++;
      child.records.push_back({current.slot, step});
      place(child, next, step.child);
      finish(child);
      push(std::move(child));
    }

    if (sub.requests_used >= budget_) return;
    for (const GroundOperation* op : operations_.applicable_in(sub.state)) {
      const RequestOutcome split = expand_request(*op, sub, budget_);
      if (options_.on_split) options_.on_split(sub, split);
      CondNode child = child_of(index);
      CondPlanNode request;
      request.kind = CondPlanNode::Kind::Request;
      request.agent = problem_.agents()[op->agent].id;
      request.spec = op->spec;
      request.probability = op->probability;
      request.mass = sub.mass;
      request.success = child.next_slot++;
      request.failure = child.next_slot++;
      child.records.push_back({current.slot, request});
      place(child, split.success, request.success);
      place(child, split.failure, request.failure);
      finish(child);
      push(std::move(child));
    }
  }

  ConditionalPlan assemble(std::size_t terminal) const {
    ConditionalPlan plan;
    plan.nodes.resize(static_cast<std::size_t>(nodes_[terminal].next_slot));
    for (auto i = static_cast<std::ptrdiff_t>(terminal); i >= 0; i = nodes_[i].parent) {
      for (const auto& r : nodes_[i].records) plan.nodes[static_cast<std::size_t>(r.slot)] = r.node;
    }
    for (const auto& n : plan.nodes) {
      if (n.kind == CondPlanNode::Kind::Goal) plan.success_probability += n.mass;
      if (n.depth_exceeded) plan.depth_exceeded = true;
    }
    return plan;
  }

  static ConditionalPlan abandon_all() {
    ConditionalPlan plan;
    CondPlanNode root;
    root.kind = CondPlanNode::Kind::Abandoned;
    root.mass = 1.0;
    plan.nodes.push_back(root);
    return plan;
  }

  const CompiledProblem& problem_;
  std::size_t budget_;
  const CondOptions& options_;
  GoalHeuristic heuristic_;
  OperationSource operations_;
  std::deque<CondNode> nodes_;
  std::priority_queue<Entry, std::vector<Entry>, EntryOrder> open_;
  std::unordered_set<std::string> seen_;
  std::size_t seq_ = 0;
};

}  // namespace

CondResult plan_conditional(const CompiledProblem& problem, std::size_t budget,
                            const CondOptions& options) {
  return Planner(problem, budget, options).run();
}

CondResult plan_conditional(const MapMmProblem& problem, std::size_t budget,
                            const CondOptions& options) {
  const CompiledProblem compiled(problem);
  return plan_conditional(compiled, budget, options);
}

namespace {

void render_node(const ConditionalPlan& plan, int index, int indent, std::ostringstream& out) {
  const auto& n = plan.nodes[static_cast<std::size_t>(index)];
  const std::string pad(static_cast<std::size_t>(indent) * 2, ' ');
  switch (n.kind) {
    case CondPlanNode::Kind::Robot:
      out << pad << "robot " << n.agent << ": " << n.action << "\n";
      render_node(plan, n.child, indent, out);
      break;
    case CondPlanNode::Kind::Request:
      out << pad << "request " << n.agent << ": " << to_string(n.spec) << "  (p = " << n.probability
          << ")\n";
      out << pad << "on success:\n";
      render_node(plan, n.success, indent + 1, out);
      out << pad << "on failure:\n";
      render_node(plan, n.failure, indent + 1, out);
      break;
    case CondPlanNode::Kind::Goal:
      out << pad << "goal reached (mass " << n.mass << ")\n";
      break;
    case CondPlanNode::Kind::Abandoned:
      out << pad << "abandon (mass " << n.mass << (n.depth_exceeded ? ", depth exceeded" : "")
          << ")\n";
      break;
  }
}

std::size_t requests_below(const ConditionalPlan& plan, int index) {
  const auto& n = plan.nodes[static_cast<std::size_t>(index)];
  switch (n.kind) {
    case CondPlanNode::Kind::Robot: return requests_below(plan, n.child);
    case CondPlanNode::Kind::Request:
      return 1 + std::max(requests_below(plan, n.success), requests_below(plan, n.failure));
    default: return 0;
  }
}

}  // namespace

std::string render_conditional_plan(const ConditionalPlan& plan) {
  std::ostringstream out;
  out << std::setprecision(17);
  if (!plan.nodes.empty()) render_node(plan, 0, 0, out);
  out << "success probability: " << plan.success_probability << "\n";
  if (plan.depth_exceeded) out << "note: depth cap reached on at least one branch\n";
  return out.str();
}

std::size_t max_requests_on_path(const ConditionalPlan& plan) {
  return plan.nodes.empty() ? 0 : requests_below(plan, 0);
}

}  // namespace capmap
