#include "capmap/strips.hpp"

#include <algorithm>

#include "capmap/errors.hpp"

namespace capmap {

PropositionIndex::PropositionIndex(std::vector<VarId> names) : names_(std::move(names)) {
  for (std::size_t i = 0; i < names_.size(); ++i) {
    if (!lookup_.emplace(names_[i], static_cast<int>(i)).second) {
      throw ValidationError("duplicate proposition '" + names_[i] + "'");
    }
  }
}

bool PropositionIndex::contains(std::string_view name) const {
  return lookup_.count(std::string(name)) != 0;
}

int PropositionIndex::at(std::string_view name) const {
  auto it = lookup_.find(std::string(name));
  if (it == lookup_.end()) throw ValidationError("unknown proposition '" + std::string(name) + "'");
  return it->second;
}

std::vector<int> PropositionIndex::at(const std::vector<VarId>& names) const {
  std::vector<int> out;
  out.reserve(names.size());
  for (const auto& n : names) out.push_back(at(n));
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

PlanningState PlanningState::initial(std::size_t size, const std::vector<int>& true_set,
                                     const std::vector<int>& unknown_set) {
  PlanningState s(size, Truth::False);
  for (int i : true_set) s.set(i, Truth::True);
  for (int i : unknown_set) s.set(i, Truth::Unknown);
  return s;
}

std::vector<int> PlanningState::collect(Truth t) const {
  std::vector<int> out;
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (values_[i] == t) out.push_back(static_cast<int>(i));
  }
  return out;
}

std::size_t PlanningStateHash::operator()(const PlanningState& s) const noexcept {
  // FNV-1a over the value bytes.
  std::size_t h = 1469598103934665603ULL;
  for (Truth t : s.values()) {
    h ^= static_cast<std::size_t>(t);
    h *= 1099511628211ULL;
  }
  return h;
}

GroundAction ground(const StripsAction& action, const PropositionIndex& props) {
  GroundAction g{action.id, props.at(action.pre), props.at(action.add), props.at(action.del)};
  for (int p : g.add) {
    if (std::binary_search(g.del.begin(), g.del.end(), p)) {
      throw ValidationError("action '" + action.id + "' both adds and deletes '" + props.name(p) +
                            "'");
    }
  }
  return g;
}

bool applicable(const GroundAction& action, const PlanningState& state) {
  return std::all_of(action.pre.begin(), action.pre.end(),
                     [&](int p) { return state.is_true(p); });
}

PlanningState apply_robot_action(const GroundAction& action, const PlanningState& state) {
  if (!applicable(action, state)) {
    throw UsageError("action '" + action.id + "' is not applicable");
  }
  PlanningState next = state;
  for (int p : action.del) next.set(p, Truth::False);
  for (int p : action.add) next.set(p, Truth::True);
  return next;
}

}  // namespace capmap
