#pragma once

#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "capmap/model.hpp"

namespace capmap {

/// Posterior mean a / (a + b) of a beta parameter.
double posterior_mean(const BetaParam& p);

/// Index-based view of a model with every beta row collapsed to its mean.
/// Construction validates the model; the table is immutable afterwards.
class PointEstimates {
 public:
  struct Table {
    std::vector<int> parents;   // fact indices, in CPT parent order
    std::vector<double> theta;  // P(node = true | row), big-endian row index
  };

  explicit PointEstimates(const CapabilityModel& model);

  std::size_t num_facts() const { return names_.size(); }
  const std::string& name(std::size_t fact) const { return names_[fact]; }
  /// Throws ValidationError for ids outside the model.
  int index(std::string_view fact) const;
  /// Position of `fact` in sorted-id order; used for deterministic tie breaks.
  int rank(std::size_t fact) const { return rank_[fact]; }

  const Table& fact_table(std::size_t fact) const { return facts_[fact]; }
  const Table& eventual_table(std::size_t fact) const { return eventual_[fact]; }
  /// Causal parents of a fact node (same as fact_table(i).parents).
  std::span<const int> causal_parents(std::size_t fact) const { return facts_[fact].parents; }

 private:
  std::vector<std::string> names_;
  std::unordered_map<std::string, int> lookup_;
  std::vector<int> rank_;
  std::vector<Table> facts_;
  std::vector<Table> eventual_;
};

/// P(e-nodes of A true, e-nodes of B false | C true, D false), computed by
/// variable elimination over the fact nodes. The value approximates the
/// probability that an operation meeting the spec exists.
///
/// Throws ValidationError for malformed specs and ImpossibleEvidence when
/// the evidence has probability zero.
double query_capability(const PointEstimates& model, const CapabilitySpec& spec);
double query_capability(const CapabilityModel& model, const CapabilitySpec& spec);

/// Checks that single-target queries P(e:x | C, !D) never decrease when an
/// unobserved fact becomes true evidence or a false fact becomes unobserved.
/// Returns a description of the first counterexample, or nullopt when the
/// property holds within `tolerance`. Exhaustive; limited to 8 facts.
std::optional<std::string> check_evidence_monotonicity(const PointEstimates& model,
                                                        double tolerance = 1e-12);

}  // namespace capmap
