#include "capmap/inference.hpp"

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <sstream>

#include "capmap/errors.hpp"

namespace capmap {

double posterior_mean(const BetaParam& p) { return p.a / (p.a + p.b); }

PointEstimates::PointEstimates(const CapabilityModel& model) {
  throw_if_errors(validate_model(model), "model '" + model.agent + "'");
  names_ = model.graph.variables;
  for (std::size_t i = 0; i < names_.size(); ++i) lookup_.emplace(names_[i], static_cast<int>(i));

  std::vector<int> order(names_.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int x, int y) { return names_[x] < names_[y]; });
  rank_.resize(names_.size());
  for (std::size_t r = 0; r < order.size(); ++r) rank_[order[r]] = static_cast<int>(r);

  auto compile = [&](const Cpt& cpt) {
    Table t;
    for (const auto& p : cpt.parents) t.parents.push_back(lookup_.at(p));
    t.theta.reserve(cpt.rows.size());
    for (const auto& row : cpt.rows) t.theta.push_back(posterior_mean(row));
    return t;
  };
  for (const auto& v : names_) {
    facts_.push_back(compile(model.cpt(v)));
    eventual_.push_back(compile(model.cpt(enode_id(v))));
  }
}

int PointEstimates::index(std::string_view fact) const {
  auto it = lookup_.find(std::string(fact));
  if (it == lookup_.end()) throw ValidationError("unknown variable '" + std::string(fact) + "'");
  return it->second;
}

namespace {

constexpr std::size_t kMaxFactorVars = 26;

// Factor over binary variables. Bit t of a table index is the value of vars[t].
struct Factor {
  std::vector<int> vars;  // ascending
  std::vector<double> table;
};

// -1 unobserved, 0 false, 1 true.
using Evidence = std::vector<int8_t>;

// Builds a factor from a CPT-style table, restricted by evidence. `own`
// is the node's own fact index (or -1 for an e-node factor, which has no
// own fact variable); `positive` selects P(true) or P(false) for e-nodes.
Factor make_factor(const PointEstimates::Table& t, int own, bool positive, const Evidence& ev) {
  Factor f;
  for (int p : t.parents) {
    if (ev[p] < 0) f.vars.push_back(p);
  }
  if (own >= 0 && ev[own] < 0) f.vars.push_back(own);
  std::sort(f.vars.begin(), f.vars.end());
  f.vars.erase(std::unique(f.vars.begin(), f.vars.end()), f.vars.end());

  const std::size_t k = f.vars.size();
  f.table.resize(std::size_t{1} << k);
  auto value_of = [&](int var, std::size_t assignment) -> int {
    if (ev[var] >= 0) return ev[var];
    auto pos = std::lower_bound(f.vars.begin(), f.vars.end(), var) - f.vars.begin();
    return static_cast<int>((assignment >> pos) & 1U);
  };
  const std::size_t width = t.parents.size();
  for (std::size_t a = 0; a < f.table.size(); ++a) {
    std::size_t row = 0;
    for (std::size_t q = 0; q < width; ++q) {
      row |= static_cast<std::size_t>(value_of(t.parents[q], a)) << (width - 1 - q);
    }
    const double theta = t.theta[row];
    if (own >= 0) {
      f.table[a] = value_of(own, a) ? theta : 1.0 - theta;
    } else {
      f.table[a] = positive ? theta : 1.0 - theta;
    }
  }
  return f;
}

Factor multiply_and_sum_out(const std::vector<const Factor*>& parts, int var) {
  std::vector<int> scope;
  for (const Factor* f : parts) scope.insert(scope.end(), f->vars.begin(), f->vars.end());
  std::sort(scope.begin(), scope.end());
  scope.erase(std::unique(scope.begin(), scope.end()), scope.end());
  if (scope.size() > kMaxFactorVars) {
    throw Error(ErrorKind::Validation, "model too densely connected for exact inference");
  }
  const auto var_pos = static_cast<std::size_t>(
      std::lower_bound(scope.begin(), scope.end(), var) - scope.begin());

  // For each part, the scope bit feeding each of its own bits.
  std::vector<std::vector<std::size_t>> maps;
  for (const Factor* f : parts) {
    std::vector<std::size_t> m;
    for (int v : f->vars) {
      m.push_back(static_cast<std::size_t>(std::lower_bound(scope.begin(), scope.end(), v) -
                                           scope.begin()));
    }
    maps.push_back(std::move(m));
  }

  Factor out;
  for (int v : scope) {
    if (v != var) out.vars.push_back(v);
  }
  out.table.assign(std::size_t{1} << out.vars.size(), 0.0);
  const std::size_t total = std::size_t{1} << scope.size();
  const std::size_t low_mask = (std::size_t{1} << var_pos) - 1;
  for (std::size_t a = 0; a < total; ++a) {
    double prod = 1.0;
    for (std::size_t i = 0; i < parts.size(); ++i) {
      std::size_t idx = 0;
      for (std::size_t b = 0; b < maps[i].size(); ++b) idx |= ((a >> maps[i][b]) & 1U) << b;
      prod *= parts[i]->table[idx];
    }
    const std::size_t reduced = (a & low_mask) | ((a >> (var_pos + 1)) << var_pos);
    out.table[reduced] += prod;
  }
  return out;
}

// Sums the product of `factors` over all their free variables, eliminating
// greedily by fewest neighbours (ties by sorted fact id).
double eliminate_all(std::vector<Factor> factors, const PointEstimates& model) {
  double constant = 1.0;
  auto fold_constants = [&]() {
    std::vector<Factor> kept;
    for (auto& f : factors) {
      if (f.vars.empty()) {
        constant *= f.table[0];
      } else {
        kept.push_back(std::move(f));
      }
    }
    factors = std::move(kept);
  };
  fold_constants();

  std::vector<int> neighbours_seen(model.num_facts(), -1);
  int stamp = 0;
  while (!factors.empty()) {
    // Candidate variables and their degrees in the current interaction graph.
    std::vector<int> vars;
    for (const auto& f : factors) vars.insert(vars.end(), f.vars.begin(), f.vars.end());
    std::sort(vars.begin(), vars.end());
    vars.erase(std::unique(vars.begin(), vars.end()), vars.end());

    int best = -1;
    int best_degree = 0;
    for (int v : vars) {
      ++stamp;
      int degree = 0;
      for (const auto& f : factors) {
        if (!std::binary_search(f.vars.begin(), f.vars.end(), v)) continue;
        for (int u : f.vars) {
          if (u != v && neighbours_seen[u] != stamp) {
            neighbours_seen[u] = stamp;
            ++degree;
          }
        }
      }
      if (best < 0 || degree < best_degree ||
          (degree == best_degree && model.rank(v) < model.rank(best))) {
        best = v;
        best_degree = degree;
      }
    }

    std::vector<const Factor*> parts;
    std::vector<Factor> rest;
    for (const auto& f : factors) {
      if (std::binary_search(f.vars.begin(), f.vars.end(), best)) parts.push_back(&f);
    }
    Factor merged = multiply_and_sum_out(parts, best);
    for (auto& f : factors) {
      if (!std::binary_search(f.vars.begin(), f.vars.end(), best)) rest.push_back(std::move(f));
    }
    rest.push_back(std::move(merged));
    factors = std::move(rest);
    fold_constants();
  }
  return constant;
}

std::vector<int> to_indices(const PointEstimates& model, const std::set<VarId>& side) {
  std::vector<int> out;
  for (const auto& v : side) out.push_back(model.index(v));
  return out;
}

double query_indexed(const PointEstimates& model, const std::vector<int>& c,
                     const std::vector<int>& d, const std::vector<int>& a,
                     const std::vector<int>& b) {
  if (a.empty() && b.empty()) return 1.0;
  const std::size_t n = model.num_facts();
  Evidence ev(n, -1);
  for (int v : c) ev[v] = 1;
  for (int v : d) ev[v] = 0;

  // Only ancestors of evidence and of queried e-node parents matter; every
  // other fact sums out to one.
  std::vector<char> relevant(n, 0);
  std::vector<int> stack;
  auto mark = [&](int v) {
    if (!relevant[v]) {
      relevant[v] = 1;
      stack.push_back(v);
    }
  };
  for (int v : c) mark(v);
  for (int v : d) mark(v);
  for (int v : a) {
    for (int p : model.eventual_table(v).parents) mark(p);
  }
  for (int v : b) {
    for (int p : model.eventual_table(v).parents) mark(p);
  }
  while (!stack.empty()) {
    const int v = stack.back();
    stack.pop_back();
    for (int p : model.causal_parents(v)) mark(p);
  }

  std::vector<Factor> evidence_factors;
  for (std::size_t v = 0; v < n; ++v) {
    if (relevant[v]) {
      evidence_factors.push_back(make_factor(model.fact_table(v), static_cast<int>(v), true, ev));
    }
  }
  std::vector<Factor> joint = evidence_factors;
  for (int v : a) joint.push_back(make_factor(model.eventual_table(v), -1, true, ev));
  for (int v : b) joint.push_back(make_factor(model.eventual_table(v), -1, false, ev));

  const double denominator = eliminate_all(std::move(evidence_factors), model);
  if (!(denominator > 0.0)) throw ImpossibleEvidence("impossible evidence: P(C, !D) = 0");
  const double numerator = eliminate_all(std::move(joint), model);
  return std::clamp(numerator / denominator, 0.0, 1.0);
}

}  // namespace

double query_capability(const PointEstimates& model, const CapabilitySpec& spec) {
  for (const auto* side : {&spec.C, &spec.D, &spec.A, &spec.B}) {
    for (const auto& v : *side) model.index(v);
  }
  for (const auto& v : spec.C) {
    if (spec.D.count(v)) throw ValidationError("'" + v + "' appears in both C and D");
  }
  for (const auto& v : spec.A) {
    if (spec.B.count(v)) throw ValidationError("'" + v + "' appears in both A and B");
  }
  return query_indexed(model, to_indices(model, spec.C), to_indices(model, spec.D),
                       to_indices(model, spec.A), to_indices(model, spec.B));
}

double query_capability(const CapabilityModel& model, const CapabilitySpec& spec) {
  return query_capability(PointEstimates(model), spec);
}

std::optional<std::string> check_evidence_monotonicity(const PointEstimates& model,
                                                        double tolerance) {
  const std::size_t n = model.num_facts();
  if (n > 8) throw UsageError("monotonicity check is limited to 8 facts");
  std::size_t patterns = 1;
  for (std::size_t i = 0; i < n; ++i) patterns *= 3;

  // Pattern digit per fact: 0 unobserved, 1 true, 2 false.
  auto decode = [&](std::size_t code, std::vector<int>& c, std::vector<int>& d) {
    c.clear();
    d.clear();
    for (std::size_t i = 0; i < n; ++i, code /= 3) {
      if (code % 3 == 1) c.push_back(static_cast<int>(i));
      if (code % 3 == 2) d.push_back(static_cast<int>(i));
    }
  };
  std::vector<int> c, d;
  std::vector<std::size_t> pow3(n, 1);
  for (std::size_t i = 1; i < n; ++i) pow3[i] = pow3[i - 1] * 3;

  for (std::size_t target = 0; target < n; ++target) {
    std::vector<double> value(patterns);
    for (std::size_t code = 0; code < patterns; ++code) {
      decode(code, c, d);
      value[code] = query_indexed(model, c, d, {static_cast<int>(target)}, {});
    }
    for (std::size_t code = 0; code < patterns; ++code) {
      for (std::size_t i = 0; i < n; ++i) {
        const std::size_t digit = (code / pow3[i]) % 3;
        // unobserved -> true, and false -> unobserved, must not lower the value.
        std::size_t higher = code;
        if (digit == 0) higher = code + pow3[i];
        if (digit == 2) higher = code - 2 * pow3[i];
        if (higher == code) continue;
        if (value[higher] + tolerance < value[code]) {
          std::ostringstream msg;
          decode(code, c, d);
          msg << "P(e:" << model.name(target) << ") drops from " << value[code] << " to "
              << value[higher] << " when evidence on '" << model.name(i) << "' is raised";
          return msg.str();
        }
      }
    }
  }
  return std::nullopt;
}

}  // namespace capmap
