// Command line front end: model authoring, learning, queries and planning.
//
// Exit codes: 0 success, 1 usage, 2 validation, 3 no plan / search budget
// exhausted. CAPMAP_LOG=info|debug enables diagnostics on stderr.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "capmap/errors.hpp"
#include "capmap/formats.hpp"
#include "capmap/inference.hpp"
#include "capmap/learning.hpp"
#include "capmap/mapmm.hpp"
#include "capmap/mapmmi.hpp"
#include "capmap/model.hpp"
#include "capmap/oracle.hpp"

namespace fs = std::filesystem;
using namespace capmap;

namespace {

int log_level() {
  const char* env = std::getenv("CAPMAP_LOG");
  if (env == nullptr) return 0;
  const std::string v = env;
  if (v == "debug") return 2;
  if (v == "info") return 1;
  return 0;
}

void log(int level, const std::string& message) {
  if (log_level() >= level) std::cerr << "capmap: " << message << "\n";
}

std::string number(double x) {
  std::ostringstream out;
  out << std::setprecision(17) << x;
  return out.str();
}

void emit(const std::string& text, const std::string& output) {
  if (output.empty()) {
    std::cout << text;
  } else {
    write_text_file(output, text);
  }
}

BetaParam parse_prior(const std::string& text) {
  const auto comma = text.find(',');
  if (comma == std::string::npos) throw UsageError("--prior: expected A,B");
  try {
    std::size_t used_a = 0;
    std::size_t used_b = 0;
    const std::string a = text.substr(0, comma);
    const std::string b = text.substr(comma + 1);
    BetaParam prior{std::stod(a, &used_a), std::stod(b, &used_b)};
    if (used_a != a.size() || used_b != b.size()) throw std::invalid_argument(text);
    return prior;
  } catch (const std::logic_error&) {
    throw UsageError("--prior: expected two numbers A,B, got '" + text + "'");
  }
}

CapabilitySpec read_spec(const std::string& arg) {
  if (fs::is_regular_file(arg)) {
    const Json doc = read_json_file(arg);
    try {
      return load_spec(doc);
    } catch (const ValidationError& e) {
      throw ValidationError(arg + ": " + e.what());
    }
  }
  return parse_spec(arg);
}

void print_notices(const std::vector<Violation>& violations) {
  for (const auto& v : violations) {
    if (v.severity == Severity::Notice) std::cerr << "notice: " << v.message << "\n";
  }
}

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError(path + ": cannot open file");
  return in;
}

std::size_t resolve_budget(const MapMmProblem& problem, const std::optional<std::size_t>& flag) {
  if (flag) return *flag;
  if (problem.communication_threshold) return *problem.communication_threshold;
  throw UsageError("--budget is required when the problem has no communication_threshold");
}

struct ModelBuildArgs {
  std::string vars, edges, prior = "1,1", agent = "human", output;
  bool break_loops = false;
  std::uint64_t seed = 0;
};

int run_model_build(const ModelBuildArgs& args) {
  auto vars_in = open_input(args.vars);
  auto edges_in = open_input(args.edges);
  std::vector<VarId> vars;
  std::vector<Edge> edges;
  try {
    vars = load_variable_list(vars_in);
  } catch (const ValidationError& e) {
    throw ValidationError(args.vars + ": " + e.what());
  }
  try {
    edges = load_edge_list(edges_in);
  } catch (const ValidationError& e) {
    throw ValidationError(args.edges + ": " + e.what());
  }
  BuildResult built = build_model(args.agent, vars, edges, parse_prior(args.prior),
                                  {args.break_loops, args.seed});
  for (const auto& [from, to] : built.removed_edges) {
    std::cerr << "removed edge " << from << " -> " << to << " to break a cycle\n";
  }
  emit(dump_canonical(save_model(built.model)), args.output);
  return 0;
}

int run_model_validate(const std::string& path) {
  // Errors throw from the loader; anything left is informational.
  const CapabilityModel model = load_model_file(path);
  print_notices(validate_model(model));
  std::cout << path << ": ok (" << model.graph.variables.size() << " facts, "
            << model.edges().size() << " edges)\n";
  return 0;
}

struct LearnArgs {
  std::string model, traces, output;
  std::size_t max_unknown = kDefaultMaxUnknown;
  bool lenient = false;
};

int run_learn(const LearnArgs& args) {
  const CapabilityModel model = load_model_file(args.model);
  auto in = open_input(args.traces);
  TraceLoad loaded;
  try {
    loaded = load_traces(in, args.lenient);
  } catch (const ValidationError& e) {
    throw ValidationError(args.traces + ": " + e.what());
  }
  for (const auto& e : loaded.errors) {
    std::cerr << args.traces << ": line " << e.line << ": skipped: " << e.message << "\n";
  }
  TrainingSet data;
  try {
    data = prepare_training_set(model, loaded.traces, args.max_unknown);
  } catch (const ValidationError& e) {
    throw ValidationError(args.traces + ": " + e.what());
  }
  for (const auto& s : data.skipped) {
    log(1, "trace " + std::to_string(s.trace) + " pair " + std::to_string(s.pair) + ": " +
               std::to_string(s.unknown) + " unknown values, skipped");
  }
  const CapabilityModel learned = update(model, data.transitions);
  write_text_file(args.output, dump_canonical(save_model(learned)));
  std::cout << "traces: " << loaded.traces.size() << "\n"
            << "transitions: " << data.transitions.size() << " weighted completions\n"
            << "skipped transitions: " << data.skipped.size() << "\n";
  return 0;
}

int run_query(const std::string& model_path, const std::string& spec_arg) {
  const CapabilityModel model = load_model_file(model_path);
  const CapabilitySpec spec = read_spec(spec_arg);
  const auto violations = validate_spec(model, spec);
  throw_if_errors(violations, "spec '" + to_string(spec) + "'");
  print_notices(violations);
  const double p = query_capability(model, spec);
  std::cout << "spec: " << to_string(spec) << "\n" << "probability: " << number(p) << "\n";
  return 0;
}

struct PlanArgs {
  std::string problem, output;
  bool auto_ops = false;
  std::size_t max_expansions = 1'000'000;
};

int run_plan(const PlanArgs& args) {
  const MapMmProblem problem = load_problem_file(args.problem);
  SearchOptions options;
  options.auto_ops = args.auto_ops;
  options.max_expansions = args.max_expansions;
  if (log_level() >= 2) {
    options.on_expand = [](const PlanningState&, double g, double h) {
      log(2, "expand g=" + number(g) + " h=" + number(h));
    };
  }
  const SearchResult result = astar_plan(problem, options);
  log(1, "expansions: " + std::to_string(result.expansions));
  if (!args.output.empty()) write_text_file(args.output, dump_canonical(save_plan(result)));
  switch (result.status) {
    case SearchStatus::Found: std::cout << render_plan(*result.plan); return 0;
    case SearchStatus::NoPlan: std::cerr << args.problem << ": no plan reaches the goal\n"; break;
    case SearchStatus::BudgetExceeded:
      std::cerr << args.problem << ": expansion budget of " << args.max_expansions
                << " exhausted\n";
      break;
  }
  return static_cast<int>(ErrorKind::NoPlan);
}

struct PlanCondArgs {
  std::string problem, output;
  std::optional<std::size_t> budget;
  std::size_t max_depth = 20;
  std::size_t max_expansions = 1'000'000;
  bool auto_ops = false;
};

int run_plan_cond(const PlanCondArgs& args) {
  const MapMmProblem problem = load_problem_file(args.problem);
  const std::size_t budget = resolve_budget(problem, args.budget);
  CondOptions options;
  options.max_depth = args.max_depth;
  options.auto_ops = args.auto_ops;
  options.max_expansions = args.max_expansions;
  const CondResult result = plan_conditional(problem, budget, options);
  log(1, "expansions: " + std::to_string(result.expansions));
  if (!args.output.empty()) {
    write_text_file(args.output, dump_canonical(save_conditional_plan(result, budget)));
  }
  if (result.status == CondStatus::BudgetExceeded) {
    std::cerr << args.problem << ": expansion budget of " << args.max_expansions << " exhausted\n";
    return static_cast<int>(ErrorKind::NoPlan);
  }
  std::cout << render_conditional_plan(result.plan);
  if (result.plan.success_probability == 0.0) {
    std::cerr << args.problem << ": no branch reaches the goal within " << budget << " request(s)\n";
    return static_cast<int>(ErrorKind::NoPlan);
  }
  return 0;
}

struct SimulateArgs {
  std::string model, output;
  std::size_t count = 0;
  std::uint64_t seed = 0;
  double observability = 1.0;
};

int run_simulate(const SimulateArgs& args) {
  const CapabilityModel truth = load_model_file(args.model);
  const auto traces = simulate_traces(truth, args.count, args.seed, args.observability);
  write_text_file(args.output, save_traces(traces));
  return 0;
}

int run_oracle_query(const std::string& model_path, const std::string& spec_arg) {
  const CapabilityModel model = load_model_file(model_path);
  const CapabilitySpec spec = read_spec(spec_arg);
  throw_if_errors(validate_spec(model, spec), "spec '" + to_string(spec) + "'");
  std::cout << "spec: " << to_string(spec) << "\n"
            << "probability: " << number(oracle::joint_enumeration_query(model, spec)) << "\n";
  return 0;
}

int run_oracle_plan(const std::string& path, std::size_t depth, bool auto_ops) {
  const MapMmProblem problem = load_problem_file(path);
  const auto best = oracle::brute_force_optimal_plan(problem, depth, auto_ops);
  for (std::size_t i = 0; i < best.steps.size(); ++i) std::cout << i + 1 << ". " << best.steps[i] << "\n";
  std::cout << "success probability: " << number(best.probability) << "\n";
  return 0;
}

int run_oracle_plan_cond(const std::string& path, std::optional<std::size_t> budget,
                         std::size_t depth, bool auto_ops) {
  const MapMmProblem problem = load_problem_file(path);
  const double value =
      oracle::brute_force_conditional(problem, resolve_budget(problem, budget), depth, auto_ops);
  std::cout << "success probability: " << number(value) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Capability models for human-robot planning"};
  app.require_subcommand(1);
  std::function<int()> action;

  auto* model = app.add_subcommand("model", "Build or validate capability models");
  model->require_subcommand(1);

  ModelBuildArgs build_args;
  auto* build = model->add_subcommand("build", "Build a model with uniform priors from a causal graph");
  build->add_option("--vars", build_args.vars, "One variable id per line")->required();
  build->add_option("--edges", build_args.edges, "One 'from -> to' edge per line")->required();
  build->add_option("--prior", build_args.prior, "Beta prior A,B for every row")->capture_default_str();
  build->add_option("--agent", build_args.agent, "Agent id")->capture_default_str();
  build->add_flag("--break-loops", build_args.break_loops, "Remove one edge per cycle");
  build->add_option("--seed", build_args.seed, "Seed for loop breaking");
  build->add_option("-o,--output", build_args.output, "Output model file");
  build->callback([&] { action = [&] { return run_model_build(build_args); }; });

  std::string validate_path;
  auto* validate = model->add_subcommand("validate", "Check a model file");
  validate->add_option("file", validate_path)->required();
  validate->callback([&] { action = [&] { return run_model_validate(validate_path); }; });

  LearnArgs learn_args;
  auto* learn = app.add_subcommand("learn", "Update a model from execution traces");
  learn->add_option("--model", learn_args.model)->required();
  learn->add_option("--traces", learn_args.traces, "JSON-Lines trace log")->required();
  learn->add_option("--max-unknown", learn_args.max_unknown, "Skip transitions with more unknowns")
      ->capture_default_str();
  learn->add_flag("--lenient", learn_args.lenient, "Skip malformed trace lines");
  learn->add_option("-o,--output", learn_args.output)->required();
  learn->callback([&] { action = [&] { return run_learn(learn_args); }; });

  std::string query_model, query_spec;
  auto* query = app.add_subcommand("query", "Probability that a capability holds");
  query->add_option("--model", query_model)->required();
  query->add_option("--spec", query_spec, "'c, !d -> a, !b' or a JSON spec file")->required();
  query->callback([&] { action = [&] { return run_query(query_model, query_spec); }; });

  PlanArgs plan_args;
  auto* plan = app.add_subcommand("plan", "Most probable linear plan");
  plan->add_option("--problem", plan_args.problem)->required();
  plan->add_flag("--auto-ops", plan_args.auto_ops, "Add single-target operations per state");
  plan->add_option("--max-expansions", plan_args.max_expansions)->capture_default_str();
  plan->add_option("-o,--output", plan_args.output, "Write the plan as JSON");
  plan->callback([&] { action = [&] { return run_plan(plan_args); }; });

  PlanCondArgs cond_args;
  auto* cond = app.add_subcommand("plan-cond", "Conditional plan with a request budget");
  cond->add_option("--problem", cond_args.problem)->required();
  cond->add_option("--budget", cond_args.budget, "Requests allowed per execution path");
  cond->add_option("--max-depth", cond_args.max_depth)->capture_default_str();
  cond->add_option("--max-expansions", cond_args.max_expansions)->capture_default_str();
  cond->add_flag("--auto-ops", cond_args.auto_ops);
  cond->add_option("-o,--output", cond_args.output, "Write the plan tree as JSON");
  cond->callback([&] { action = [&] { return run_plan_cond(cond_args); }; });

  SimulateArgs sim_args;
  auto* sim = app.add_subcommand("simulate", "Sample traces from a ground-truth model");
  sim->add_option("--model", sim_args.model)->required();
  sim->add_option("--count", sim_args.count)->required();
  sim->add_option("--seed", sim_args.seed)->required();
  sim->add_option("--observability", sim_args.observability)
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  sim->add_option("-o,--output", sim_args.output)->required();
  sim->callback([&] { action = [&] { return run_simulate(sim_args); }; });

  auto* dev = app.add_subcommand("oracle", "Brute-force reference computations (small inputs)");
  dev->require_subcommand(1);
  std::string oq_model, oq_spec;
  auto* oq = dev->add_subcommand("query", "Query by full joint enumeration");
  oq->add_option("--model", oq_model)->required();
  oq->add_option("--spec", oq_spec)->required();
  oq->callback([&] { action = [&] { return run_oracle_query(oq_model, oq_spec); }; });

  std::string op_problem;
  std::size_t op_depth = 8;
  bool op_auto = false;
  auto* op = dev->add_subcommand("plan", "Exhaustive linear plan search");
  op->add_option("--problem", op_problem)->required();
  op->add_option("--max-depth", op_depth)->capture_default_str();
  op->add_flag("--auto-ops", op_auto);
  op->callback([&] { action = [&] { return run_oracle_plan(op_problem, op_depth, op_auto); }; });

  std::string oc_problem;
  std::optional<std::size_t> oc_budget;
  std::size_t oc_depth = 20;
  bool oc_auto = false;
  auto* oc = dev->add_subcommand("plan-cond", "Exhaustive conditional policy search");
  oc->add_option("--problem", oc_problem)->required();
  oc->add_option("--budget", oc_budget);
  oc->add_option("--max-depth", oc_depth)->capture_default_str();
  oc->add_flag("--auto-ops", oc_auto);
  oc->callback([&] {
    action = [&] { return run_oracle_plan_cond(oc_problem, oc_budget, oc_depth, oc_auto); };
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return static_cast<int>(ErrorKind::Usage);
  }

  try {
    return action();
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return static_cast<int>(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return static_cast<int>(ErrorKind::Usage);
  }
}
