#pragma once

// Capability models: a two-slice Bayesian network over fact nodes and their
// eventual ("e-") counterparts, with a beta-distributed parameter per CPT row.

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace capmap {

using VarId = std::string;
using Edge = std::pair<VarId, VarId>;

/// Reserved prefix marking an e-node id (`"e:" + fact id`).
inline constexpr std::string_view kEventualPrefix = "e:";

std::string enode_id(std::string_view fact);
bool is_enode_id(std::string_view node);
/// Fact id behind an e-node id; returns the input unchanged for fact ids.
VarId fact_of(std::string_view node);

struct BetaParam {
  double a = 1.0;
  double b = 1.0;

  bool operator==(const BetaParam&) const = default;
};

/// Conditional table for one node. `rows[j]` holds the parameter for parent
/// configuration j, where j reads the parent values as a big-endian bit
/// pattern over `parents` (first parent is the most significant bit).
struct Cpt {
  std::string node;
  std::vector<std::string> parents;
  std::vector<BetaParam> rows;

  std::size_t expected_rows() const { return std::size_t{1} << parents.size(); }

  bool operator==(const Cpt&) const = default;
};

/// Big-endian bit string ("101") for row `index` over `width` parents.
std::string config_string(std::size_t index, std::size_t width);
/// Inverse of config_string; throws ValidationError on malformed input.
std::size_t config_index(std::string_view bits);

struct CausalGraph {
  std::vector<VarId> variables;  // declared order
  std::vector<Edge> edges;       // fact -> fact, sorted and unique

  bool operator==(const CausalGraph&) const = default;
};

struct CapabilityModel {
  std::string agent;
  CausalGraph graph;
  std::map<std::string, Cpt> cpts;  // keyed by node id

  bool has_variable(std::string_view var) const;
  std::size_t variable_index(std::string_view var) const;  // throws on unknown
  /// Fact ids in declared order followed by the matching e-node ids.
  std::vector<std::string> node_ids() const;
  /// Full edge set, read off the CPT parent lists.
  std::vector<Edge> edges() const;
  const Cpt& cpt(std::string_view node) const;
  Cpt& cpt(std::string_view node);

  bool operator==(const CapabilityModel&) const = default;
};

/// Capability `C & !D -> A & !B`.
struct CapabilitySpec {
  std::set<VarId> C;
  std::set<VarId> D;
  std::set<VarId> A;
  std::set<VarId> B;

  bool operator==(const CapabilitySpec&) const = default;
  auto operator<=>(const CapabilitySpec&) const = default;
};

/// Renders a spec as `c1, !d1 -> a1, !b1` (empty sides print as `true`).
std::string to_string(const CapabilitySpec& spec);

struct BuildOptions {
  bool break_loops = false;
  std::uint64_t seed = 0;
};

struct BuildResult {
  CapabilityModel model;
  std::vector<Edge> removed_edges;  // only populated when loops were broken
};

/// Builds the fact/e-node graph from causal edges and fills every row with
/// `prior`. Cycles are rejected unless `options.break_loops` is set, in which
/// case the lexicographically last edge of each detected cycle is removed.
BuildResult build_model(std::string agent, std::vector<VarId> variables,
                        std::vector<Edge> causal_edges, BetaParam prior = {},
                        BuildOptions options = {});

/// Fact nodes with a directed causal path into any of `targets`.
std::set<VarId> ancestors(const CapabilityModel& model, const std::set<VarId>& targets);

enum class Severity { Error, Notice };

struct Violation {
  Severity severity = Severity::Error;
  std::string code;  // machine-readable, e.g. "incomplete-cpt"
  std::string node;  // offending node or variable, may be empty
  std::string message;
};

std::vector<Violation> validate_model(const CapabilityModel& model);

/// Checks a spec against a model. Overlap between C and A (or D and B) is
/// permitted and reported as a notice.
std::vector<Violation> validate_spec(const CapabilityModel& model, const CapabilitySpec& spec);

bool has_errors(const std::vector<Violation>& violations);
/// Throws ValidationError listing every error-severity entry.
void throw_if_errors(const std::vector<Violation>& violations, std::string_view context);

}  // namespace capmap
