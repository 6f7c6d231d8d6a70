#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "capmap/errors.hpp"
#include "capmap/mapmm.hpp"
#include "capmap/oracle.hpp"
#include "generators.hpp"

using namespace capmap;

namespace {

MapMmProblem one_op_problem(double a, double b) {
  MapMmProblem p;
  p.propositions = {"c", "goal"};
  auto model = build_model("ann", {"c", "goal"}, {{"c", "goal"}}).model;
  for (auto& row : model.cpt("e:goal").rows) row = {a, b};
  p.humans.push_back({"ann", model, {CapabilitySpec{{"c"}, {}, {"goal"}, {}}}, std::nullopt});
  p.init_true = {"c"};
  p.goal = {"goal"};
  return p;
}

}  // namespace

TEST_CASE("joint enumeration on hand-worked models") {
  const auto flat = build_model("h", {"x"}, {}).model;
  CHECK(oracle::joint_enumeration_query(flat, {{}, {}, {"x"}, {}}) == doctest::Approx(0.5));

  auto model = build_model("h", {"x", "y"}, {{"x", "y"}}).model;
  model.cpt("x").rows = {{1, 3}};                          // P(x) = 1/4
  model.cpt("e:y").rows = {{1, 9}, {1, 1}, {9, 1}, {9, 1}};  // parents (x, y)
  model.cpt("y").rows = {{1, 1}, {1, 1}};
  // P(e:y) = 3/4 * (1/2 * 0.1 + 1/2 * 0.5) + 1/4 * 0.9 = 0.45
  CHECK(oracle::joint_enumeration_query(model, {{}, {}, {"y"}, {}}) == doctest::Approx(0.45));
  CHECK(oracle::joint_enumeration_query(model, {{"x"}, {}, {"y"}, {}}) == doctest::Approx(0.9));
}

TEST_CASE("oracle guards refuse oversized inputs") {
  const auto big = build_model("h", testgen::names("v", 11), {}).model;  // 22 nodes
  CHECK_THROWS_AS(oracle::joint_enumeration_query(big, {{}, {}, {"v0"}, {}}), UsageError);

  auto p = one_op_problem(1, 1);
  for (int i = 0; i < 8; ++i) p.propositions.push_back("extra" + std::to_string(i));
  CHECK_THROWS_AS(oracle::brute_force_optimal_plan(p, 4), UsageError);
  CHECK_THROWS_AS(oracle::brute_force_conditional(one_op_problem(1, 1), 5, 4), UsageError);
  CHECK_THROWS_AS(oracle::brute_force_optimal_plan(one_op_problem(1, 1), 17), UsageError);
}

TEST_CASE("single operation plans") {
  const auto p = one_op_problem(3, 1);
  const auto plan = oracle::brute_force_optimal_plan(p, 4);
  CHECK(plan.probability == doctest::Approx(0.75));
  CHECK(plan.steps == std::vector<std::string>{"ann: c -> goal"});
  CHECK(oracle::brute_force_conditional(p, 1, 4) == doctest::Approx(0.75));
  // The failure branch loses `c`, so a second request cannot help.
  CHECK(oracle::brute_force_conditional(p, 3, 4) == doctest::Approx(0.75));
  CHECK(oracle::brute_force_conditional(p, 0, 4) == 0.0);
}

TEST_CASE("oracle start states") {
  const auto p = one_op_problem(1, 1);
  const auto start = oracle::initial_state(p);
  CHECK(start.true_set == std::set<VarId>{"c"});
  CHECK(start.false_set == std::set<VarId>{"goal"});
  const oracle::OracleState done{{"c", "goal"}, {}};
  const auto plan = oracle::brute_force_optimal_plan_from(p, done, 4);
  CHECK(plan.probability == 1.0);
  CHECK(plan.steps.empty());
}

TEST_CASE("conditional value brackets the linear plan (property)") {
  testgen::Rng rng(41);
  testgen::ProblemShape shape;
  shape.max_props = 5;
  for (int round = 0; round < 40; ++round) {
    const auto p = testgen::random_problem(rng, shape);
    const auto linear_plan = oracle::brute_force_optimal_plan(p, 10);
    const double linear = linear_plan.probability;
    const double none = oracle::brute_force_conditional(p, 0, 10);
    const double many = oracle::brute_force_conditional(p, 4, 10);
    CHECK(none <= linear + 1e-12);
    const auto requests = std::count_if(linear_plan.steps.begin(), linear_plan.steps.end(),
                                        [](const std::string& s) { return s.find('/') == std::string::npos; });
    // Any linear plan within the request budget is also a (branch-free) conditional plan.
    if (requests <= 4) CHECK(many >= linear - 1e-12);
    if (none > 0.0) CHECK(none == 1.0);  // robot-only plans are deterministic
  }
}
