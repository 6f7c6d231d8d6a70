#include "capmap/formats.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <set>
#include <sstream>

#include "capmap/errors.hpp"

namespace capmap {

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& message) {
  throw ValidationError(path + ": " + message);
}

std::string key_path(const std::string& path, const std::string& key) { return path + "." + key; }
std::string index_path(const std::string& path, std::size_t i) {
  return path + "[" + std::to_string(i) + "]";
}

void expect_object(const Json& doc, const std::string& path, std::initializer_list<const char*> required,
                   std::initializer_list<const char*> optional = {}) {
  if (!doc.is_object()) fail(path, "expected an object");
  for (const char* k : required) {
    if (!doc.contains(k)) fail(key_path(path, k), "missing field");
  }
  for (const auto& [k, v] : doc.items()) {
    const bool known =
        std::any_of(required.begin(), required.end(), [&](const char* r) { return k == r; }) ||
        std::any_of(optional.begin(), optional.end(), [&](const char* r) { return k == r; });
    if (!known) fail(key_path(path, k), "unknown field");
  }
}

std::string get_string(const Json& doc, const std::string& path) {
  if (!doc.is_string()) fail(path, "expected a string");
  return doc.get<std::string>();
}

double get_number(const Json& doc, const std::string& path) {
  if (!doc.is_number()) fail(path, "expected a number");
  return doc.get<double>();
}

std::vector<std::string> get_strings(const Json& doc, const std::string& path) {
  if (!doc.is_array()) fail(path, "expected an array of strings");
  std::vector<std::string> out;
  for (std::size_t i = 0; i < doc.size(); ++i) out.push_back(get_string(doc[i], index_path(path, i)));
  return out;
}

std::set<std::string> get_string_set(const Json& doc, const std::string& path) {
  auto list = get_strings(doc, path);
  std::set<std::string> out(list.begin(), list.end());
  if (out.size() != list.size()) fail(path, "duplicate entry");
  return out;
}

const Json& field(const Json& doc, const char* key) { return doc.at(key); }

}  // namespace

Json parse_json(const std::string& text, const std::string& source) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw ValidationError(source + ": malformed JSON at byte " + std::to_string(e.byte));
  }
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError(path.string() + ": cannot open file");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw UsageError(path.string() + ": cannot write file");
  out << text;
  if (!out) throw UsageError(path.string() + ": write failed");
}

Json read_json_file(const std::filesystem::path& path) {
  return parse_json(read_text_file(path), path.string());
}

std::string dump_canonical(const Json& doc) { return doc.dump(2) + "\n"; }

// ---- models ----

Json save_model(const CapabilityModel& model) {
  Json doc;
  doc["agent"] = model.agent;
  doc["variables"] = model.graph.variables;
  Json edges = Json::array();
  for (const auto& [from, to] : model.graph.edges) edges.push_back({from, to});
  doc["edges"] = std::move(edges);
  Json cpts = Json::object();
  for (const auto& [id, cpt] : model.cpts) {
    Json rows = Json::array();
    for (std::size_t j = 0; j < cpt.rows.size(); ++j) {
      rows.push_back({{"config", config_string(j, cpt.parents.size())},
                      {"a", cpt.rows[j].a},
                      {"b", cpt.rows[j].b}});
    }
    cpts[id] = {{"parents", cpt.parents}, {"rows", std::move(rows)}};
  }
  doc["cpts"] = std::move(cpts);
  return doc;
}

namespace {

Cpt load_cpt(const std::string& id, const Json& doc, const std::string& path) {
  expect_object(doc, path, {"parents", "rows"});
  Cpt cpt;
  cpt.node = id;
  cpt.parents = get_strings(field(doc, "parents"), key_path(path, "parents"));
  const Json& rows = field(doc, "rows");
  const std::string rows_path = key_path(path, "rows");
  if (!rows.is_array()) fail(rows_path, "expected an array");

  const std::size_t width = cpt.parents.size();
  std::vector<std::pair<std::size_t, BetaParam>> parsed;
  std::set<std::size_t> seen;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const std::string row_path = index_path(rows_path, i);
    expect_object(rows[i], row_path, {"config", "a", "b"});
    const std::string config = get_string(field(rows[i], "config"), key_path(row_path, "config"));
    if (config.size() != width) {
      fail(key_path(row_path, "config"),
           "expected " + std::to_string(width) + " parent bits, got '" + config + "'");
    }
    std::size_t index = 0;
    try {
      index = config_index(config);
    } catch (const ValidationError&) {
      fail(key_path(row_path, "config"), "malformed configuration '" + config + "'");
    }
    if (!seen.insert(index).second) fail(key_path(row_path, "config"), "duplicate configuration");
    BetaParam beta{get_number(field(rows[i], "a"), key_path(row_path, "a")),
                   get_number(field(rows[i], "b"), key_path(row_path, "b"))};
    parsed.emplace_back(index, beta);
  }
  if (parsed.size() != cpt.expected_rows()) {
    fail(rows_path, "incomplete CPT for '" + id + "': " + std::to_string(parsed.size()) +
                        " rows, expected 2^" + std::to_string(width) + " = " +
                        std::to_string(cpt.expected_rows()));
  }
  cpt.rows.resize(parsed.size());
  for (const auto& [index, beta] : parsed) cpt.rows[index] = beta;
  return cpt;
}

}  // namespace

CapabilityModel load_model(const Json& doc) {
  expect_object(doc, "$", {"agent", "variables", "edges", "cpts"});
  CapabilityModel model;
  model.agent = get_string(field(doc, "agent"), "$.agent");
  model.graph.variables = get_strings(field(doc, "variables"), "$.variables");

  const Json& edges = field(doc, "edges");
  if (!edges.is_array()) fail("$.edges", "expected an array of [from, to] pairs");
  for (std::size_t i = 0; i < edges.size(); ++i) {
    const std::string p = index_path("$.edges", i);
    auto pair = get_strings(edges[i], p);
    if (pair.size() != 2) fail(p, "expected [from, to]");
    model.graph.edges.emplace_back(pair[0], pair[1]);
  }
  if (!std::is_sorted(model.graph.edges.begin(), model.graph.edges.end()) ||
      std::adjacent_find(model.graph.edges.begin(), model.graph.edges.end()) !=
          model.graph.edges.end()) {
    fail("$.edges", "edges must be sorted and unique");
  }

  const Json& cpts = field(doc, "cpts");
  if (!cpts.is_object()) fail("$.cpts", "expected an object keyed by node id");
  for (const auto& [id, body] : cpts.items()) {
    model.cpts.emplace(id, load_cpt(id, body, "$.cpts[\"" + id + "\"]"));
  }
  throw_if_errors(validate_model(model), "invalid model");
  return model;
}

CapabilityModel load_model_file(const std::filesystem::path& path) {
  const Json doc = read_json_file(path);
  try {
    return load_model(doc);
  } catch (const ValidationError& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

// ---- specs ----

Json save_spec(const CapabilitySpec& spec) {
  return {{"C", spec.C}, {"D", spec.D}, {"A", spec.A}, {"B", spec.B}};
}

CapabilitySpec load_spec(const Json& doc, const std::string& path) {
  expect_object(doc, path, {}, {"C", "D", "A", "B"});
  CapabilitySpec spec;
  auto read = [&](const char* key, std::set<VarId>& out) {
    if (doc.contains(key)) out = get_string_set(doc.at(key), key_path(path, key));
  };
  read("C", spec.C);
  read("D", spec.D);
  read("A", spec.A);
  read("B", spec.B);
  return spec;
}

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

void parse_literals(const std::string& side, std::set<VarId>& positive, std::set<VarId>& negative,
                    const std::string& text) {
  const std::string body = trim(side);
  if (body.empty() || body == "true") return;
  if (body.back() == ',') throw UsageError("spec '" + text + "': empty literal");
  std::stringstream in(body);
  std::string item;
  while (std::getline(in, item, ',')) {
    std::string literal = trim(item);
    bool negated = false;
    if (!literal.empty() && literal.front() == '!') {
      negated = true;
      literal = trim(literal.substr(1));
    }
    if (literal.empty()) throw UsageError("spec '" + text + "': empty literal");
    auto& target = negated ? negative : positive;
    if (!target.insert(literal).second) {
      throw UsageError("spec '" + text + "': duplicate literal '" + literal + "'");
    }
  }
}

}  // namespace

CapabilitySpec parse_spec(const std::string& text) {
  const auto arrow = text.find("->");
  if (arrow == std::string::npos || text.find("->", arrow + 2) != std::string::npos) {
    throw UsageError("spec '" + text + "': expected exactly one '->'");
  }
  CapabilitySpec spec;
  parse_literals(text.substr(0, arrow), spec.C, spec.D, text);
  parse_literals(text.substr(arrow + 2), spec.A, spec.B, text);
  return spec;
}

// ---- problems ----

Json save_problem(const MapMmProblem& problem) {
  Json doc;
  doc["propositions"] = problem.propositions;
  doc["init_true"] = problem.init_true;
  doc["init_unknown"] = problem.init_unknown;
  doc["goal"] = problem.goal;
  if (problem.communication_threshold) doc["communication_threshold"] = *problem.communication_threshold;

  Json robots = Json::array();
  for (const auto& r : problem.robots) {
    Json actions = Json::array();
    for (const auto& a : r.actions) {
      actions.push_back({{"id", a.id}, {"pre", a.pre}, {"add", a.add}, {"del", a.del}});
    }
    robots.push_back({{"id", r.id}, {"actions", std::move(actions)}});
  }
  doc["robots"] = std::move(robots);

  Json humans = Json::array();
  for (const auto& h : problem.humans) {
    Json ops = Json::array();
    for (const auto& op : h.operations) ops.push_back(save_spec(op));
    Json model = h.model_path ? Json(h.model_path->c_str()) : save_model(h.model);
    humans.push_back({{"id", h.id}, {"model", std::move(model)}, {"operations", std::move(ops)}});
  }
  doc["humans"] = std::move(humans);
  return doc;
}

MapMmProblem load_problem(const Json& doc, const std::filesystem::path& base_dir) {
  expect_object(doc, "$", {"propositions", "robots", "humans", "init_true", "init_unknown", "goal"},
                {"communication_threshold"});
  MapMmProblem problem;
  problem.propositions = get_strings(field(doc, "propositions"), "$.propositions");
  problem.init_true = get_strings(field(doc, "init_true"), "$.init_true");
  problem.init_unknown = get_strings(field(doc, "init_unknown"), "$.init_unknown");
  problem.goal = get_strings(field(doc, "goal"), "$.goal");
  if (doc.contains("communication_threshold")) {
    const Json& c = doc.at("communication_threshold");
    if (!c.is_number_unsigned()) fail("$.communication_threshold", "expected a non-negative integer");
    problem.communication_threshold = c.get<std::size_t>();
  }

  const Json& robots = field(doc, "robots");
  if (!robots.is_array()) fail("$.robots", "expected an array");
  for (std::size_t i = 0; i < robots.size(); ++i) {
    const std::string rp = index_path("$.robots", i);
    expect_object(robots[i], rp, {"id", "actions"});
    Robot robot;
    robot.id = get_string(field(robots[i], "id"), key_path(rp, "id"));
    const Json& actions = field(robots[i], "actions");
    const std::string ap = key_path(rp, "actions");
    if (!actions.is_array()) fail(ap, "expected an array");
    for (std::size_t j = 0; j < actions.size(); ++j) {
      const std::string p = index_path(ap, j);
      expect_object(actions[j], p, {"id", "pre", "add", "del"});
      StripsAction a;
      a.id = get_string(field(actions[j], "id"), key_path(p, "id"));
      a.pre = get_strings(field(actions[j], "pre"), key_path(p, "pre"));
      a.add = get_strings(field(actions[j], "add"), key_path(p, "add"));
      a.del = get_strings(field(actions[j], "del"), key_path(p, "del"));
      robot.actions.push_back(std::move(a));
    }
    problem.robots.push_back(std::move(robot));
  }

  const Json& humans = field(doc, "humans");
  if (!humans.is_array()) fail("$.humans", "expected an array");
  for (std::size_t i = 0; i < humans.size(); ++i) {
    const std::string hp = index_path("$.humans", i);
    expect_object(humans[i], hp, {"id", "model", "operations"});
    Human human;
    human.id = get_string(field(humans[i], "id"), key_path(hp, "id"));
    const Json& model = field(humans[i], "model");
    if (model.is_string()) {
      human.model_path = model.get<std::string>();
      human.model = load_model_file(base_dir / *human.model_path);
    } else {
      try {
        human.model = load_model(model);
      } catch (const ValidationError& e) {
        fail(key_path(hp, "model"), e.what());
      }
    }
    const Json& ops = field(humans[i], "operations");
    const std::string op_path = key_path(hp, "operations");
    if (!ops.is_array()) fail(op_path, "expected an array");
    for (std::size_t j = 0; j < ops.size(); ++j) {
      human.operations.push_back(load_spec(ops[j], index_path(op_path, j)));
    }
    problem.humans.push_back(std::move(human));
  }

  throw_if_errors(validate_problem(problem), "invalid problem");
  return problem;
}

MapMmProblem load_problem_file(const std::filesystem::path& path) {
  const Json doc = read_json_file(path);
  try {
    return load_problem(doc, path.parent_path());
  } catch (const ValidationError& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

// ---- traces ----

namespace {

Json save_observation(const StateObservation& obs) {
  std::vector<VarId> t = obs.true_vars;
  std::vector<VarId> f = obs.false_vars;
  std::sort(t.begin(), t.end());
  std::sort(f.begin(), f.end());
  return {{"true", t}, {"false", f}};
}

Trace parse_trace_line(const std::string& text) {
  Json doc;
  try {
    doc = Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw ValidationError("malformed JSON at byte " + std::to_string(e.byte));
  }
  expect_object(doc, "$", {"observations"});
  const Json& list = doc.at("observations");
  if (!list.is_array()) fail("$.observations", "expected an array");
  if (list.size() < 2) fail("$.observations", "a trace needs at least two observations");
  Trace trace;
  for (std::size_t i = 0; i < list.size(); ++i) {
    const std::string p = index_path("$.observations", i);
    expect_object(list[i], p, {}, {"true", "false"});
    std::set<VarId> t, f;
    if (list[i].contains("true")) t = get_string_set(list[i].at("true"), key_path(p, "true"));
    if (list[i].contains("false")) f = get_string_set(list[i].at("false"), key_path(p, "false"));
    for (const auto& v : t) {
      if (f.count(v)) fail(p, "'" + v + "' is both true and false");
    }
    trace.observations.push_back({{t.begin(), t.end()}, {f.begin(), f.end()}});
  }
  return trace;
}

}  // namespace

std::string save_traces(const std::vector<Trace>& traces) {
  std::string out;
  for (const auto& trace : traces) {
    Json obs = Json::array();
    for (const auto& o : trace.observations) obs.push_back(save_observation(o));
    out += Json{{"observations", std::move(obs)}}.dump();
    out += '\n';
  }
  return out;
}

TraceLoad load_traces(std::istream& in, bool lenient) {
  TraceLoad result;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (trim(line).empty()) continue;
    try {
      result.traces.push_back(parse_trace_line(line));
    } catch (const ValidationError& e) {
      if (!lenient) throw ValidationError("line " + std::to_string(number) + ": " + e.what());
      result.errors.push_back({number, e.what()});
    }
  }
  return result;
}

// ---- plain-text graph inputs ----

namespace {

std::vector<std::vector<std::string>> read_token_lines(std::istream& in) {
  std::vector<std::vector<std::string>> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream words(line);
    std::vector<std::string> tokens;
    for (std::string w; words >> w;) {
      if (w != "->") tokens.push_back(w);
    }
    lines.push_back(std::move(tokens));
  }
  return lines;
}

}  // namespace

std::vector<VarId> load_variable_list(std::istream& in) {
  std::vector<VarId> vars;
  const auto lines = read_token_lines(in);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    if (lines[i].size() != 1) {
      throw ValidationError("line " + std::to_string(i + 1) + ": expected one variable id");
    }
    vars.push_back(lines[i][0]);
  }
  return vars;
}

std::vector<Edge> load_edge_list(std::istream& in) {
  std::vector<Edge> edges;
  const auto lines = read_token_lines(in);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    if (lines[i].size() != 2) {
      throw ValidationError("line " + std::to_string(i + 1) + ": expected 'from to'");
    }
    edges.emplace_back(lines[i][0], lines[i][1]);
  }
  return edges;
}

// ---- plans ----

namespace {

const char* status_name(SearchStatus s) {
  switch (s) {
    case SearchStatus::Found: return "found";
    case SearchStatus::NoPlan: return "no-plan";
    case SearchStatus::BudgetExceeded: return "budget-exceeded";
  }
  return "unknown";
}

Json save_cond_node(const ConditionalPlan& plan, int index) {
  const auto& n = plan.nodes.at(static_cast<std::size_t>(index));
  switch (n.kind) {
    case CondPlanNode::Kind::Robot:
      return {{"kind", "robot"},
              {"agent", n.agent},
              {"action", n.action},
              {"mass", n.mass},
              {"next", save_cond_node(plan, n.child)}};
    case CondPlanNode::Kind::Request:
      return {{"kind", "request"},
              {"agent", n.agent},
              {"spec", save_spec(n.spec)},
              {"probability", n.probability},
              {"mass", n.mass},
              {"success", save_cond_node(plan, n.success)},
              {"failure", save_cond_node(plan, n.failure)}};
    case CondPlanNode::Kind::Goal: return {{"kind", "goal"}, {"mass", n.mass}};
    case CondPlanNode::Kind::Abandoned:
      return {{"kind", "abandon"}, {"mass", n.mass}, {"depth_exceeded", n.depth_exceeded}};
  }
  return {};
}

}  // namespace

Json save_plan(const SearchResult& result) {
  Json doc;
  doc["status"] = status_name(result.status);
  doc["expansions"] = result.expansions;
  if (!result.plan) return doc;
  doc["success_probability"] = result.plan->success_probability;
  Json steps = Json::array();
  for (const auto& s : result.plan->steps) {
    if (s.kind == PlanStep::Kind::Robot) {
      steps.push_back({{"kind", "robot"}, {"agent", s.agent}, {"action", s.action}});
    } else {
      steps.push_back({{"kind", "human"},
                       {"agent", s.agent},
                       {"spec", save_spec(s.spec)},
                       {"probability", s.probability}});
    }
  }
  doc["steps"] = std::move(steps);
  return doc;
}

Json save_conditional_plan(const CondResult& result, std::size_t budget) {
  Json doc;
  doc["status"] = result.status == CondStatus::Complete ? "complete" : "budget-exceeded";
  doc["budget"] = budget;
  doc["expansions"] = result.expansions;
  doc["success_probability"] = result.plan.success_probability;
  doc["depth_exceeded"] = result.plan.depth_exceeded;
  doc["max_requests_on_path"] = max_requests_on_path(result.plan);
  if (!result.plan.nodes.empty()) doc["plan"] = save_cond_node(result.plan, 0);
  return doc;
}

}  // namespace capmap
