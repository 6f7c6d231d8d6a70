#include <doctest.h>

#include <cmath>
#include <map>

#include "capmap/errors.hpp"
#include "capmap/formats.hpp"
#include "capmap/inference.hpp"
#include "capmap/learning.hpp"
#include "generators.hpp"

using namespace capmap;

namespace {

StateObservation obs(std::vector<VarId> t, std::vector<VarId> f) { return {std::move(t), std::move(f)}; }

double total_mass(const CapabilityModel& m) {
  double sum = 0.0;
  for (const auto& [id, cpt] : m.cpts) {
    for (const auto& r : cpt.rows) sum += r.a + r.b;
  }
  return sum;
}

}  // namespace

TEST_CASE("split_trace pairs consecutive observations") {
  const auto s1 = obs({"a"}, {});
  const auto si = obs({"b"}, {});
  const auto sj = obs({}, {"a"});
  const auto sk = obs({"a", "b"}, {});
  const auto pairs = split_trace({{s1, si, sj, sk}});
  REQUIRE(pairs.size() == 3);
  CHECK(pairs[0] == TransitionPair{s1, si});
  CHECK(pairs[1] == TransitionPair{si, sj});
  CHECK(pairs[2] == TransitionPair{sj, sk});
  CHECK(split_trace({{s1, sk}}).size() == 1);
  CHECK_THROWS_AS(split_trace({{s1}}), ValidationError);
  CHECK_THROWS_AS(split_trace({}), ValidationError);
}

TEST_CASE("complete_transition enumerates unknowns with uniform weight") {
  const auto model = build_model("h", {"x", "y"}, {{"x", "y"}}).model;

  const auto full = complete_transition({obs({"x"}, {"y"}), obs({"x", "y"}, {})}, model);
  REQUIRE(full.transitions.size() == 1);
  CHECK(full.transitions[0].weight == 1.0);
  CHECK(full.transitions[0].initial == Assignment{1, 0});
  CHECK(full.transitions[0].final == Assignment{1, 1});

  const auto one = complete_transition({obs({"x"}, {"y"}), obs({"x"}, {})}, model);
  REQUIRE(one.transitions.size() == 2);
  CHECK(one.unknown == 1);
  for (const auto& t : one.transitions) CHECK(t.weight == 0.5);
  CHECK(one.transitions[0].final != one.transitions[1].final);

  const auto three = complete_transition({obs({}, {}), obs({"x"}, {})}, model);
  CHECK(three.transitions.size() == 8);
  double sum = 0.0;
  for (const auto& t : three.transitions) sum += t.weight;
  CHECK(sum == 1.0);

  CHECK_THROWS_AS(complete_transition({obs({"q"}, {}), obs({}, {})}, model), ValidationError);
  CHECK_THROWS_AS(complete_transition({obs({"x"}, {"x"}), obs({}, {})}, model), ValidationError);
}

TEST_CASE("transitions over the unknown cap are skipped and reported") {
  std::vector<VarId> vars = testgen::names("v", 10);
  const auto model = build_model("h", vars, {}).model;
  const auto c = complete_transition({obs({}, {}), obs({}, {})}, model, 8);
  CHECK(c.skipped);
  CHECK(c.unknown == 20);
  CHECK(c.transitions.empty());

  std::vector<Trace> traces = {{{obs(vars, {}), obs(vars, {})}}, {{obs({}, {}), obs({}, {})}}};
  const auto set = prepare_training_set(model, traces, 8);
  REQUIRE(set.skipped.size() == 1);
  CHECK(set.skipped[0].trace == 1);
  CHECK(set.skipped[0].pair == 0);
  CHECK(set.skipped[0].unknown == 20);
  CHECK(set.transitions.size() == 1);
}

TEST_CASE("beta(1,1) plus three successes and one failure is beta(4,2)") {
  const auto model = build_model("h", {"x"}, {}).model;
  std::vector<WeightedTransition> data;
  for (int i = 0; i < 3; ++i) data.push_back({{1}, {1}, 1.0});
  data.push_back({{1}, {0}, 1.0});
  const auto learned = update(model, data);
  CHECK(learned.cpt("e:x").rows[1] == BetaParam{4, 2});
  CHECK(learned.cpt("e:x").rows[0] == BetaParam{1, 1});
  CHECK(learned.cpt("x").rows[0] == BetaParam{5, 1});
  CHECK(posterior_mean(learned.cpt("e:x").rows[1]) == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
}

TEST_CASE("empty data leaves the model unchanged") {
  testgen::Rng rng(1);
  const auto model = testgen::random_model(rng, 5, 0.5, false);
  CHECK(update(model, {}) == model);
}

TEST_CASE("e-node rows are selected by initial parent values") {
  const auto model = build_model("h", {"x", "y"}, {{"x", "y"}}).model;
  // Initial (x=1, y=0), final (x=0, y=1).
  const auto learned = update(model, std::vector<WeightedTransition>{{{1, 0}, {0, 1}, 1.0}});
  CHECK(learned.cpt("e:y").rows[config_index("10")] == BetaParam{2, 1});  // parents (x, y)
  CHECK(learned.cpt("e:x").rows[1] == BetaParam{1, 2});
  CHECK(learned.cpt("y").rows[1] == BetaParam{1, 2});
}

TEST_CASE("one observed transition adds one unit per node (property)") {
  testgen::Rng rng(2);
  for (int round = 0; round < 50; ++round) {
    const auto model = testgen::random_model(rng, 2 + rng.below(4), 0.5, false);
    const auto truth_traces = simulate_traces(model, 1, 100 + round, 0.6);
    const auto set = prepare_training_set(model, truth_traces, 12);
    const auto learned = update(model, set.transitions);
    CHECK(std::abs(total_mass(learned) - total_mass(model) -
                   static_cast<double>(model.cpts.size())) <= 1e-12);
    for (const auto& [id, cpt] : learned.cpts) {
      for (std::size_t j = 0; j < cpt.rows.size(); ++j) {
        CHECK(cpt.rows[j].a >= model.cpt(id).rows[j].a);
        CHECK(cpt.rows[j].b >= model.cpt(id).rows[j].b);
      }
    }
  }
}

TEST_CASE("batch updates are order-insensitive (property)") {
  testgen::Rng rng(3);
  for (int round = 0; round < 20; ++round) {
    const auto model = testgen::random_model(rng, 4, 0.5, false);
    const auto traces = simulate_traces(model, 30, 7 + round, 0.7);
    auto data = prepare_training_set(model, traces).transitions;
    const std::size_t cut = rng.below(data.size());
    const std::vector<WeightedTransition> d1(data.begin(), data.begin() + cut);
    const std::vector<WeightedTransition> d2(data.begin() + cut, data.end());

    const auto together = update(model, data);
    const auto sequential = update(update(model, d1), d2);
    auto shuffled = data;
    std::shuffle(shuffled.begin(), shuffled.end(), rng.engine());
    const auto reordered = update(model, shuffled);
    for (const auto& [id, cpt] : together.cpts) {
      for (std::size_t j = 0; j < cpt.rows.size(); ++j) {
        CHECK(std::abs(cpt.rows[j].a - sequential.cpt(id).rows[j].a) <= 1e-12);
        CHECK(std::abs(cpt.rows[j].b - sequential.cpt(id).rows[j].b) <= 1e-12);
        CHECK(std::abs(cpt.rows[j].a - reordered.cpt(id).rows[j].a) <= 1e-12);
        CHECK(std::abs(cpt.rows[j].b - reordered.cpt(id).rows[j].b) <= 1e-12);
      }
    }
  }
}

TEST_CASE("integer-weight updates compose exactly") {
  const auto model = build_model("h", {"x", "y"}, {{"x", "y"}}).model;
  std::vector<WeightedTransition> d1 = {{{1, 1}, {1, 0}, 1.0}, {{0, 1}, {1, 1}, 1.0}};
  std::vector<WeightedTransition> d2 = {{{1, 0}, {0, 0}, 1.0}};
  auto both = d1;
  both.insert(both.end(), d2.begin(), d2.end());
  CHECK(update(update(model, d1), d2) == update(model, both));
}

TEST_CASE("simulation is deterministic and respects observability") {
  testgen::Rng rng(4);
  const auto model = testgen::random_model(rng, 5, 0.5, false);
  CHECK(save_traces(simulate_traces(model, 50, 9, 0.5)) ==
        save_traces(simulate_traces(model, 50, 9, 0.5)));
  CHECK(save_traces(simulate_traces(model, 50, 9, 0.5)) !=
        save_traces(simulate_traces(model, 50, 10, 0.5)));

  for (const auto& t : simulate_traces(model, 50, 9, 1.0)) {
    REQUIRE(t.observations.size() == 2);
    for (const auto& o : t.observations) CHECK(o.true_vars.size() + o.false_vars.size() == 5);
  }
  for (const auto& t : simulate_traces(model, 20, 9, 0.0)) {
    for (const auto& o : t.observations) CHECK(o.true_vars.size() + o.false_vars.size() == 0);
  }
  // A prefix of a longer run matches the shorter run: trace i depends only on (seed, i).
  const auto longer = simulate_traces(model, 60, 9, 0.5);
  const auto shorter = simulate_traces(model, 50, 9, 0.5);
  CHECK(std::equal(shorter.begin(), shorter.end(), longer.begin()));
}

TEST_CASE("learned means approach the truth with enough data") {
  const auto truth =
      load_model_file(std::string(CAPMAP_FIXTURE_DIR) + "/delivery/truth.json");
  const auto prior = build_model(truth.agent, truth.graph.variables, truth.graph.edges).model;
  const auto traces = simulate_traces(truth, 5000, 42, 1.0);
  const auto learned = update(prior, prepare_training_set(prior, traces).transitions);
  std::size_t rows_checked = 0;
  for (const auto& [id, cpt] : learned.cpts) {
    for (std::size_t j = 0; j < cpt.rows.size(); ++j) {
      const auto& row = cpt.rows[j];
      if (row.a + row.b - 2.0 < 100.0) continue;
      ++rows_checked;
      CHECK(std::abs(posterior_mean(row) - posterior_mean(truth.cpt(id).rows[j])) <= 0.05);
    }
  }
  CHECK(rows_checked >= 20);
}
