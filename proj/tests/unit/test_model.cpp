#include <doctest.h>

#include <algorithm>

#include "capmap/errors.hpp"
#include "capmap/formats.hpp"
#include "capmap/model.hpp"
#include "generators.hpp"

using namespace capmap;

namespace {

const std::vector<VarId> kDelivery = {"has_money", "has_trolley", "in_van", "near_destination",
                                      "delivered"};
const std::vector<Edge> kDeliveryEdges = {{"has_money", "has_trolley"},
                                          {"has_trolley", "delivered"},
                                          {"in_van", "delivered"},
                                          {"near_destination", "delivered"}};

bool has_code(const std::vector<Violation>& vs, const std::string& code) {
  return std::any_of(vs.begin(), vs.end(), [&](const Violation& v) { return v.code == code; });
}

std::size_t count_severity(const std::vector<Violation>& vs, Severity s) {
  return static_cast<std::size_t>(
      std::count_if(vs.begin(), vs.end(), [&](const Violation& v) { return v.severity == s; }));
}

}  // namespace

TEST_CASE("e-node ids") {
  CHECK(enode_id("x") == "e:x");
  CHECK(is_enode_id("e:x"));
  CHECK_FALSE(is_enode_id("x"));
  CHECK(fact_of("e:x") == "x");
  CHECK(fact_of("x") == "x");
}

TEST_CASE("config strings are big-endian over the parent list") {
  CHECK(config_string(0, 0).empty());
  CHECK(config_string(5, 3) == "101");
  CHECK(config_string(1, 3) == "001");
  CHECK(config_index("101") == 5);
  CHECK(config_index("") == 0);
  CHECK_THROWS_AS(config_index("12"), ValidationError);
}

TEST_CASE("delivery graph: 10 nodes, 13 edges") {
  const auto model = build_model("courier", kDelivery, kDeliveryEdges).model;
  CHECK(model.node_ids().size() == 10);
  const auto edges = model.edges();
  CHECK(edges.size() == 13);
  const auto fact_to_fact = std::count_if(edges.begin(), edges.end(), [](const Edge& e) {
    return !is_enode_id(e.second);
  });
  const auto own = std::count_if(edges.begin(), edges.end(), [](const Edge& e) {
    return is_enode_id(e.second) && fact_of(e.second) == e.first;
  });
  CHECK(fact_to_fact == 4);
  CHECK(own == 5);
  CHECK(edges.size() - fact_to_fact - own == 4);
  CHECK(model.cpt("e:delivered").parents ==
        std::vector<std::string>{"delivered", "has_trolley", "in_van", "near_destination"});
  CHECK(model.cpt("e:delivered").rows.size() == 16);
  CHECK(validate_model(model).empty());
}

TEST_CASE("no causal edges: only own fact -> e edges") {
  const auto model = build_model("h", {"a", "b", "c"}, {}).model;
  CHECK(model.node_ids().size() == 6);
  CHECK(model.edges().size() == 3);
  for (const auto& [from, to] : model.edges()) CHECK(to == enode_id(from));
}

TEST_CASE("default prior is beta(1,1)") {
  const auto model = build_model("h", {"a", "b"}, {{"a", "b"}}).model;
  for (const auto& [id, cpt] : model.cpts) {
    for (const auto& row : cpt.rows) CHECK(row == BetaParam{1.0, 1.0});
  }
}

TEST_CASE("build_model rejects malformed input") {
  CHECK_THROWS_AS(build_model("h", {"x", "y"}, {{"x", "y"}, {"y", "x"}}), ValidationError);
  CHECK_THROWS_AS(build_model("h", {"x", "x"}, {}), ValidationError);
  CHECK_THROWS_AS(build_model("h", {"e:x"}, {}), ValidationError);
  CHECK_THROWS_AS(build_model("h", {"x"}, {{"x", "z"}}), ValidationError);
  CHECK_THROWS_AS(build_model("h", {"x"}, {{"x", "x"}}), ValidationError);
  CHECK_THROWS_AS(build_model("h", {"x"}, {}, BetaParam{0.0, 1.0}), ValidationError);
  CHECK_THROWS_WITH_AS(build_model("h", {"x"}, {}, BetaParam{-1.0, 1.0}),
                       doctest::Contains("pseudo-count must be positive"), ValidationError);
}

TEST_CASE("loop breaking removes the last edge of each cycle and is seeded") {
  const std::vector<VarId> vars = {"a", "b", "c"};
  const std::vector<Edge> edges = {{"a", "b"}, {"b", "c"}, {"c", "a"}};
  const auto r0 = build_model("h", vars, edges, {}, {true, 0});
  REQUIRE(r0.removed_edges.size() == 1);
  CHECK(r0.removed_edges[0] == Edge{"c", "a"});
  CHECK(r0.model.graph.edges.size() == 2);
  CHECK(validate_model(r0.model).empty());

  // Two cycles sharing no edge: both get broken.
  const auto r1 = build_model("h", {"a", "b", "c", "d"},
                              {{"a", "b"}, {"b", "a"}, {"c", "d"}, {"d", "c"}}, {}, {true, 7});
  CHECK(r1.removed_edges.size() == 2);
  CHECK(validate_model(r1.model).empty());

  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto x = build_model("h", vars, edges, {}, {true, seed});
    const auto y = build_model("h", vars, edges, {}, {true, seed});
    CHECK(dump_canonical(save_model(x.model)) == dump_canonical(save_model(y.model)));
  }
}

TEST_CASE("ancestors") {
  const auto chain = build_model("h", {"x1", "x2", "x3"}, {{"x1", "x2"}, {"x2", "x3"}}).model;
  CHECK(ancestors(chain, {"x3"}) == std::set<VarId>{"x1", "x2"});
  CHECK(ancestors(chain, {"x1"}).empty());

  const auto diamond = build_model("h", {"x1", "x2", "x3", "x4"},
                                   {{"x1", "x2"}, {"x1", "x3"}, {"x2", "x4"}, {"x3", "x4"}})
                           .model;
  CHECK(ancestors(diamond, {"x4"}) == std::set<VarId>{"x1", "x2", "x3"});
  CHECK_THROWS_AS(ancestors(diamond, {"nope"}), ValidationError);
}

TEST_CASE("ancestors is monotone in the target set (property)") {
  testgen::Rng rng(11);
  for (int round = 0; round < 100; ++round) {
    const auto model = testgen::random_model(rng, 2 + rng.below(6), 0.4, false);
    const auto& vars = model.graph.variables;
    std::set<VarId> small, large;
    for (const auto& v : vars) {
      const double u = rng.uniform();
      if (u < 0.3) small.insert(v);
      if (u < 0.6) large.insert(v);
    }
    const auto a = ancestors(model, small);
    const auto b = ancestors(model, large);
    CHECK(std::includes(b.begin(), b.end(), a.begin(), a.end()));
  }
}

TEST_CASE("every built model has 2|Y| + |X| edges and complete CPTs (property)") {
  testgen::Rng rng(12);
  for (int round = 0; round < 100; ++round) {
    const std::size_t n = 1 + rng.below(7);
    const auto model = testgen::random_model(rng, n, 0.5, false);
    CHECK(model.edges().size() == 2 * model.graph.edges.size() + n);
    CHECK(model.cpts.size() == 2 * n);
    for (const auto& [id, cpt] : model.cpts) CHECK(cpt.rows.size() == cpt.expected_rows());
    CHECK(validate_model(model).empty());
  }
}

TEST_CASE("validate_model reports structural problems") {
  const auto base = build_model("h", {"x", "y"}, {{"x", "y"}}).model;
  CHECK(validate_model(base).empty());

  SUBCASE("missing row") {
    auto m = base;
    m.cpt("y").rows.pop_back();
    const auto vs = validate_model(m);
    REQUIRE(vs.size() == 1);
    CHECK(vs[0].code == "incomplete-cpt");
    CHECK(vs[0].node == "y");
    CHECK(vs[0].message.find("expected 2^1 = 2") != std::string::npos);
  }
  SUBCASE("e -> e edge") {
    auto m = base;
    auto& cpt = m.cpt("e:y");
    cpt.parents = {"e:x", "x", "y"};
    cpt.rows.assign(8, {});
    const auto vs = validate_model(m);
    REQUIRE(vs.size() == 1);
    CHECK(vs[0].code == "illegal-edge");
  }
  SUBCASE("non-positive pseudo-count") {
    auto m = base;
    m.cpt("x").rows[0].a = -1.0;
    const auto vs = validate_model(m);
    REQUIRE(vs.size() == 1);
    CHECK(vs[0].message.find("pseudo-count must be positive") != std::string::npos);
  }
  SUBCASE("missing and extra CPTs") {
    auto m = base;
    m.cpts.erase("e:x");
    m.cpts["z"] = Cpt{"z", {}, {BetaParam{}}};
    const auto vs = validate_model(m);
    CHECK(has_code(vs, "missing-cpt"));
    CHECK(has_code(vs, "extra-cpt"));
  }
  SUBCASE("parents disagree with the causal edges") {
    auto m = base;
    m.graph.edges.clear();
    CHECK(has_code(validate_model(m), "parents-mismatch"));
  }
  SUBCASE("cycle") {
    auto m = base;
    m.graph.edges.emplace_back("y", "x");
    CHECK(has_code(validate_model(m), "cycle"));
  }
}

TEST_CASE("validate_spec") {
  const auto model = build_model("h", {"x", "y"}, {{"x", "y"}}).model;
  CHECK(validate_spec(model, {{"x"}, {}, {"y"}, {}}).empty());

  const auto unknown = validate_spec(model, {{"q"}, {}, {"y"}, {}});
  REQUIRE(unknown.size() == 1);
  CHECK(unknown[0].code == "unknown-variable");

  CHECK(has_errors(validate_spec(model, {{"x"}, {"x"}, {}, {}})));
  CHECK(has_errors(validate_spec(model, {{}, {}, {"y"}, {"y"}})));

  const auto overlap = validate_spec(model, {{"x"}, {}, {"x"}, {}});
  CHECK_FALSE(has_errors(overlap));
  CHECK(count_severity(overlap, Severity::Notice) == 1);
}

TEST_CASE("spec rendering") {
  CHECK(to_string(CapabilitySpec{{"c"}, {"d"}, {"a"}, {"b"}}) == "c, !d -> a, !b");
  CHECK(to_string(CapabilitySpec{{}, {}, {"a"}, {}}) == "true -> a");
}
