#pragma once

// Tri-state planning states and deterministic robot actions.

#include <cstdint>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "capmap/model.hpp"

namespace capmap {

enum class Truth : std::uint8_t { False = 0, True = 1, Unknown = 2 };

/// Interned proposition vocabulary X.
class PropositionIndex {
 public:
  PropositionIndex() = default;
  explicit PropositionIndex(std::vector<VarId> names);  // throws on duplicates

  std::size_t size() const { return names_.size(); }
  const VarId& name(int i) const { return names_[static_cast<std::size_t>(i)]; }
  const std::vector<VarId>& names() const { return names_; }
  bool contains(std::string_view name) const;
  /// Throws ValidationError for unknown ids.
  int at(std::string_view name) const;
  std::vector<int> at(const std::vector<VarId>& names) const;

 private:
  std::vector<VarId> names_;
  std::unordered_map<std::string, int> lookup_;
};

/// Partition of X into known-true (T), known-false (N) and unknown (U).
/// Storing one value per proposition keeps the partition valid by construction.
class PlanningState {
 public:
  PlanningState() = default;
  explicit PlanningState(std::size_t size, Truth fill = Truth::False) : values_(size, fill) {}
  /// Initial state: `true_set` true, `unknown_set` unknown, everything else false.
  static PlanningState initial(std::size_t size, const std::vector<int>& true_set,
                               const std::vector<int>& unknown_set);

  std::size_t size() const { return values_.size(); }
  Truth operator[](int i) const { return values_[static_cast<std::size_t>(i)]; }
  void set(int i, Truth t) { values_[static_cast<std::size_t>(i)] = t; }
  bool is_true(int i) const { return (*this)[i] == Truth::True; }

  std::vector<int> T() const { return collect(Truth::True); }
  std::vector<int> N() const { return collect(Truth::False); }
  std::vector<int> U() const { return collect(Truth::Unknown); }

  const std::vector<Truth>& values() const { return values_; }

  bool operator==(const PlanningState&) const = default;
  auto operator<=>(const PlanningState&) const = default;

 private:
  std::vector<int> collect(Truth t) const;
  std::vector<Truth> values_;
};

struct PlanningStateHash {
  std::size_t operator()(const PlanningState& s) const noexcept;
};

/// Grounded STRIPS action as written in a problem file.
struct StripsAction {
  std::string id;
  std::vector<VarId> pre;
  std::vector<VarId> add;
  std::vector<VarId> del;

  bool operator==(const StripsAction&) const = default;
};

/// StripsAction resolved against a proposition index.
struct GroundAction {
  std::string id;
  std::vector<int> pre;
  std::vector<int> add;
  std::vector<int> del;
};

/// Throws ValidationError on unknown ids or overlapping add/delete lists.
GroundAction ground(const StripsAction& action, const PropositionIndex& props);

/// Pre(a) is contained in T(s); unknown propositions do not count as true.
bool applicable(const GroundAction& action, const PlanningState& state);

/// T' = (T + Add) - Del, N' = (N + Del) - Add, U' = U - Add - Del.
/// Throws UsageError when the action is not applicable.
PlanningState apply_robot_action(const GroundAction& action, const PlanningState& state);

}  // namespace capmap
