#include "capmap/model.hpp"

#include <algorithm>
#include <deque>
#include <sstream>
#include <unordered_map>

#include "capmap/errors.hpp"

namespace capmap {

std::string enode_id(std::string_view fact) {
  std::string id(kEventualPrefix);
  id.append(fact);
  return id;
}

bool is_enode_id(std::string_view node) { return node.starts_with(kEventualPrefix); }

VarId fact_of(std::string_view node) {
  if (is_enode_id(node)) node.remove_prefix(kEventualPrefix.size());
  return VarId(node);
}

std::string config_string(std::size_t index, std::size_t width) {
  std::string bits(width, '0');
  for (std::size_t k = 0; k < width; ++k) {
    if (index & (std::size_t{1} << (width - 1 - k))) bits[k] = '1';
  }
  return bits;
}

std::size_t config_index(std::string_view bits) {
  if (bits.size() >= 8 * sizeof(std::size_t)) throw ValidationError("config too wide");
  std::size_t index = 0;
  for (char c : bits) {
    if (c != '0' && c != '1') {
      throw ValidationError("config '" + std::string(bits) + "' is not a bit string");
    }
    index = (index << 1) | static_cast<std::size_t>(c == '1');
  }
  return index;
}

bool CapabilityModel::has_variable(std::string_view var) const {
  return std::find(graph.variables.begin(), graph.variables.end(), var) != graph.variables.end();
}

std::size_t CapabilityModel::variable_index(std::string_view var) const {
  auto it = std::find(graph.variables.begin(), graph.variables.end(), var);
  if (it == graph.variables.end()) {
    throw ValidationError("unknown variable '" + std::string(var) + "' in model '" + agent + "'");
  }
  return static_cast<std::size_t>(it - graph.variables.begin());
}

std::vector<std::string> CapabilityModel::node_ids() const {
  std::vector<std::string> ids(graph.variables.begin(), graph.variables.end());
  for (const auto& v : graph.variables) ids.push_back(enode_id(v));
  return ids;
}

std::vector<Edge> CapabilityModel::edges() const {
  std::vector<Edge> out;
  for (const auto& [node, cpt] : cpts) {
    for (const auto& parent : cpt.parents) out.emplace_back(parent, node);
  }
  std::sort(out.begin(), out.end());
  return out;
}

const Cpt& CapabilityModel::cpt(std::string_view node) const {
  auto it = cpts.find(std::string(node));
  if (it == cpts.end()) throw ValidationError("no CPT for node '" + std::string(node) + "'");
  return it->second;
}

Cpt& CapabilityModel::cpt(std::string_view node) {
  auto it = cpts.find(std::string(node));
  if (it == cpts.end()) throw ValidationError("no CPT for node '" + std::string(node) + "'");
  return it->second;
}

std::string to_string(const CapabilitySpec& spec) {
  auto side = [](const std::set<VarId>& pos, const std::set<VarId>& neg) {
    std::string out;
    for (const auto& v : pos) out += (out.empty() ? "" : ", ") + v;
    for (const auto& v : neg) out += (out.empty() ? "!" : ", !") + v;
    return out.empty() ? std::string("true") : out;
  };
  return side(spec.C, spec.D) + " -> " + side(spec.A, spec.B);
}

namespace {

using Adjacency = std::map<VarId, std::vector<VarId>>;

Adjacency children_of(const std::vector<VarId>& vars, const std::vector<Edge>& edges) {
  Adjacency adj;
  for (const auto& v : vars) adj[v];
  for (const auto& [from, to] : edges) adj[from].push_back(to);
  for (auto& [_, kids] : adj) std::sort(kids.begin(), kids.end());
  return adj;
}

// Returns the edges of one directed cycle, or an empty vector when acyclic.
std::vector<Edge> find_cycle(const std::vector<VarId>& vars, const std::vector<Edge>& edges,
                             std::size_t start_offset) {
  const Adjacency adj = children_of(vars, edges);
  enum class Mark { White, Grey, Black };
  std::map<VarId, Mark> mark;
  for (const auto& v : vars) mark[v] = Mark::White;

  for (std::size_t k = 0; k < vars.size(); ++k) {
    const VarId& root = vars[(k + start_offset) % vars.size()];
    if (mark[root] != Mark::White) continue;
    // Explicit DFS stack of (node, next child index); the stack doubles as the path.
    std::vector<std::pair<VarId, std::size_t>> stack{{root, 0}};
    mark[root] = Mark::Grey;
    while (!stack.empty()) {
      auto& [node, next] = stack.back();
      const auto& kids = adj.at(node);
      if (next == kids.size()) {
        mark[node] = Mark::Black;
        stack.pop_back();
        continue;
      }
      const VarId child = kids[next++];
      if (mark[child] == Mark::Grey) {
        std::vector<Edge> cycle;
        auto it = std::find_if(stack.begin(), stack.end(),
                               [&](const auto& frame) { return frame.first == child; });
        for (; it + 1 != stack.end(); ++it) cycle.emplace_back(it->first, (it + 1)->first);
        cycle.emplace_back(stack.back().first, child);
        return cycle;
      }
      if (mark[child] == Mark::White) {
        mark[child] = Mark::Grey;
        stack.emplace_back(child, 0);
      }
    }
  }
  return {};
}

std::vector<std::string> sorted(std::vector<std::string> v) {
  std::sort(v.begin(), v.end());
  return v;
}

std::map<VarId, std::vector<VarId>> causal_parents(const CausalGraph& graph) {
  std::map<VarId, std::vector<VarId>> parents;
  for (const auto& v : graph.variables) parents[v];
  for (const auto& [from, to] : graph.edges) parents[to].push_back(from);
  for (auto& [_, ps] : parents) std::sort(ps.begin(), ps.end());
  return parents;
}

}  // namespace

BuildResult build_model(std::string agent, std::vector<VarId> variables,
                        std::vector<Edge> causal_edges, BetaParam prior, BuildOptions options) {
  if (!(prior.a > 0.0) || !(prior.b > 0.0)) {
    throw ValidationError("prior pseudo-count must be positive");
  }
  std::set<VarId> seen;
  for (const auto& v : variables) {
    if (v.empty()) throw ValidationError("empty variable id");
    if (is_enode_id(v)) {
      throw ValidationError("variable '" + v + "' uses the reserved prefix '" +
                            std::string(kEventualPrefix) + "'");
    }
    if (!seen.insert(v).second) throw ValidationError("duplicate variable '" + v + "'");
  }
  for (const auto& [from, to] : causal_edges) {
    for (const auto& end : {from, to}) {
      if (!seen.count(end)) {
        throw ValidationError("edge " + from + " -> " + to + " references undeclared variable '" +
                              end + "'");
      }
    }
    if (from == to) throw ValidationError("self-loop on '" + from + "'");
  }
  std::sort(causal_edges.begin(), causal_edges.end());
  causal_edges.erase(std::unique(causal_edges.begin(), causal_edges.end()), causal_edges.end());

  BuildResult result;
  const std::size_t offset = variables.empty() ? 0 : options.seed % variables.size();
  for (auto cycle = find_cycle(variables, causal_edges, offset); !cycle.empty();
       cycle = find_cycle(variables, causal_edges, offset)) {
    if (!options.break_loops) {
      std::string path;
      for (const auto& [from, _] : cycle) path += from + " -> ";
      throw ValidationError("causal cycle detected: " + path + cycle.front().first);
    }
    const Edge victim = *std::max_element(cycle.begin(), cycle.end());
    causal_edges.erase(std::find(causal_edges.begin(), causal_edges.end(), victim));
    result.removed_edges.push_back(victim);
  }

  CapabilityModel& model = result.model;
  model.agent = std::move(agent);
  model.graph.variables = std::move(variables);
  model.graph.edges = std::move(causal_edges);

  const auto parents = causal_parents(model.graph);
  for (const auto& v : model.graph.variables) {
    Cpt fact{v, parents.at(v), {}};
    fact.rows.assign(fact.expected_rows(), prior);
    model.cpts.emplace(v, std::move(fact));

    auto e_parents = parents.at(v);
    e_parents.push_back(v);
    Cpt eventual{enode_id(v), sorted(std::move(e_parents)), {}};
    eventual.rows.assign(eventual.expected_rows(), prior);
    model.cpts.emplace(eventual.node, std::move(eventual));
  }
  return result;
}

std::set<VarId> ancestors(const CapabilityModel& model, const std::set<VarId>& targets) {
  for (const auto& t : targets) model.variable_index(t);
  const auto parents = causal_parents(model.graph);
  std::set<VarId> found;
  std::deque<VarId> frontier(targets.begin(), targets.end());
  while (!frontier.empty()) {
    const VarId node = frontier.front();
    frontier.pop_front();
    for (const auto& p : parents.at(node)) {
      if (found.insert(p).second) frontier.push_back(p);
    }
  }
  return found;
}

std::vector<Violation> validate_model(const CapabilityModel& model) {
  std::vector<Violation> out;
  auto report = [&](std::string code, std::string node, std::string message) {
    out.push_back({Severity::Error, std::move(code), std::move(node), std::move(message)});
  };

  std::set<VarId> vars;
  for (const auto& v : model.graph.variables) {
    if (v.empty()) report("empty-variable", v, "variable id is empty");
    if (is_enode_id(v)) report("reserved-prefix", v, "variable id uses the reserved e-node prefix");
    if (!vars.insert(v).second) report("duplicate-variable", v, "variable declared twice");
  }
  bool dangling = false;
  for (const auto& [from, to] : model.graph.edges) {
    if (!vars.count(from) || !vars.count(to)) {
      report("dangling-edge", from + "->" + to, "causal edge references an undeclared variable");
      dangling = true;
    }
  }
  if (!dangling && !find_cycle(model.graph.variables, model.graph.edges, 0).empty()) {
    report("cycle", "", "causal graph contains a directed cycle");
  }

  const auto expected_parents =
      dangling ? std::map<VarId, std::vector<VarId>>{} : causal_parents(model.graph);
  std::set<std::string> expected_nodes;
  for (const auto& v : model.graph.variables) {
    expected_nodes.insert(v);
    expected_nodes.insert(enode_id(v));
  }
  for (const auto& node : expected_nodes) {
    if (!model.cpts.count(node)) report("missing-cpt", node, "node has no CPT");
  }

  for (const auto& [key, cpt] : model.cpts) {
    if (!expected_nodes.count(key)) {
      report("extra-cpt", key, "CPT for a node outside the model");
      continue;
    }
    if (cpt.node != key) report("cpt-key-mismatch", key, "CPT node field disagrees with its key");
    if (!std::is_sorted(cpt.parents.begin(), cpt.parents.end()) ||
        std::adjacent_find(cpt.parents.begin(), cpt.parents.end()) != cpt.parents.end()) {
      report("unsorted-parents", key, "parent list must be sorted and unique");
    }
    bool illegal = false;
    for (const auto& p : cpt.parents) {
      if (is_enode_id(p)) {
        report("illegal-edge", p + "->" + key, "e-nodes cannot be parents");
        illegal = true;
      } else if (!vars.count(p)) {
        report("illegal-edge", p + "->" + key, "parent is not a model variable");
        illegal = true;
      }
    }
    if (!illegal && !dangling) {
      auto want = expected_parents.at(fact_of(key));
      if (is_enode_id(key)) {
        want.push_back(fact_of(key));
        std::sort(want.begin(), want.end());
      }
      if (sorted(cpt.parents) != want) {
        report("parents-mismatch", key, "parents do not follow the causal edge set");
      }
    }
    if (cpt.rows.size() != cpt.expected_rows()) {
      std::ostringstream msg;
      msg << "incomplete CPT: " << cpt.rows.size() << " rows, expected 2^" << cpt.parents.size()
          << " = " << cpt.expected_rows();
      report("incomplete-cpt", key, msg.str());
    }
    for (std::size_t j = 0; j < cpt.rows.size(); ++j) {
      const auto& row = cpt.rows[j];
      if (!(row.a > 0.0) || !(row.b > 0.0)) {
        report("nonpositive-pseudo-count", key,
               "row " + config_string(j, cpt.parents.size()) + ": pseudo-count must be positive");
      }
    }
  }
  return out;
}

std::vector<Violation> validate_spec(const CapabilityModel& model, const CapabilitySpec& spec) {
  std::vector<Violation> out;
  auto check_known = [&](const std::set<VarId>& side, const char* name) {
    for (const auto& v : side) {
      if (!model.has_variable(v)) {
        out.push_back({Severity::Error, "unknown-variable", v,
                       std::string(name) + " references a variable outside model '" +
                           model.agent + "'"});
      }
    }
  };
  check_known(spec.C, "C");
  check_known(spec.D, "D");
  check_known(spec.A, "A");
  check_known(spec.B, "B");
  auto disjoint = [&](const std::set<VarId>& x, const std::set<VarId>& y, const char* what,
                      Severity sev, const char* code) {
    for (const auto& v : x) {
      if (y.count(v)) out.push_back({sev, code, v, what});
    }
  };
  disjoint(spec.C, spec.D, "variable in both C and D", Severity::Error, "overlap-c-d");
  disjoint(spec.A, spec.B, "variable in both A and B", Severity::Error, "overlap-a-b");
  disjoint(spec.C, spec.A, "variable in both C and A: evidence pins the fact, e-node still queried",
           Severity::Notice, "evidence-and-target");
  disjoint(spec.D, spec.B, "variable in both D and B: evidence pins the fact, e-node still queried",
           Severity::Notice, "evidence-and-target");
  return out;
}

bool has_errors(const std::vector<Violation>& violations) {
  return std::any_of(violations.begin(), violations.end(),
                     [](const Violation& v) { return v.severity == Severity::Error; });
}

void throw_if_errors(const std::vector<Violation>& violations, std::string_view context) {
  std::string msg;
  for (const auto& v : violations) {
    if (v.severity != Severity::Error) continue;
    msg += "\n  " + v.code + (v.node.empty() ? "" : " [" + v.node + "]") + ": " + v.message;
  }
  if (!msg.empty()) throw ValidationError(std::string(context) + ":" + msg);
}

}  // namespace capmap
