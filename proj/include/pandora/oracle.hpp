#pragma once

/// Exhaustive MDP over states (S, y): S the opened set, y the best reward
/// seen. Works for any precedence structure (tree parent rule or DAG
/// "some in-neighbour open") intersected with the side constraint, and is
/// the ground truth the structured solvers are checked against.

#include <algorithm>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "pandora/error.hpp"
#include "pandora/instance.hpp"
#include "pandora/rational.hpp"

namespace pandora {

inline constexpr std::size_t kMaxOracleBoxes = 20;
inline constexpr std::uint64_t kMaxOracleStates = std::uint64_t{1} << 27;
inline constexpr std::size_t kMaxFixedOrderBoxes = 10;

/// Memoized solver for max over policies of  w * E[final best] - E[cost].
/// w = 1 is the Pandora objective. Not thread-safe: the memo fills lazily.
class ExactSolver {
 public:
  static constexpr std::size_t kStop = static_cast<std::size_t>(-1);

  ExactSolver(const Instance& inst, Rational terminal_weight = 1)
      : inst_(inst), weight_(std::move(terminal_weight)), grid_(inst.value_grid()) {
    if (inst.size() > kMaxOracleBoxes)
      throw CapExceededError("exact oracle supports at most " + std::to_string(kMaxOracleBoxes) + " boxes, got " +
                             std::to_string(inst.size()));
    std::uint64_t states = (std::uint64_t{1} << inst.size()) * grid_.size();
    if (states > kMaxOracleStates)
      throw CapExceededError("exact oracle needs up to 2^" + std::to_string(inst.size()) + " * " +
                             std::to_string(grid_.size()) + " = " + std::to_string(states) +
                             " states, cap is " + std::to_string(kMaxOracleStates));
    for (auto i : inst.by_id()) order_.push_back(i);
    atom_index_.resize(inst.size());
    for (std::size_t i = 0; i < inst.size(); ++i)
      for (const auto& a : inst.box(i).reward.atoms()) atom_index_[i].push_back(grid_index(a.value));
  }

  const Instance& instance() const { return inst_; }
  std::span<const Rational> grid() const { return grid_; }

  std::size_t grid_index(const Rational& y) const {
    auto it = std::lower_bound(grid_.begin(), grid_.end(), y);
    if (it == grid_.end() || *it != y) throw ValidationError("value " + to_string(y) + " is not on the support grid");
    return static_cast<std::size_t>(it - grid_.begin());
  }

  const Rational& value(Mask s, std::size_t y) { return entry(s, y).value; }
  /// Best action at (S, y): a box index, or kStop. Ties go to stopping,
  /// then to the smallest box id.
  std::size_t action(Mask s, std::size_t y) { return entry(s, y).action; }

  /// (E[final best], E[total cost]) from (S, y) under the stored policy.
  std::pair<Rational, Rational> decomposition(Mask s, std::size_t y) {
    auto key = s * grid_.size() + y;
    if (auto it = decomp_.find(key); it != decomp_.end()) return it->second;
    std::pair<Rational, Rational> out;
    auto a = action(s, y);
    if (a == kStop) {
      out = {grid_[y], Rational(0)};
    } else {
      out.second = inst_.box(a).cost;
      const auto& atoms = inst_.box(a).reward.atoms();
      for (std::size_t k = 0; k < atoms.size(); ++k) {
        auto [em, ec] = decomposition(s | (Mask{1} << a), std::max(y, atom_index_[a][k]));
        out.first += atoms[k].prob * em;
        out.second += atoms[k].prob * ec;
      }
    }
    decomp_.emplace(key, out);
    return out;
  }

  std::size_t states_visited() const { return memo_.size(); }

 private:
  struct Entry {
    Rational value;
    std::size_t action;
  };

  const Entry& entry(Mask s, std::size_t y) {
    auto key = s * grid_.size() + y;
    if (auto it = memo_.find(key); it != memo_.end()) return it->second;
    Entry e{weight_ * grid_[y], kStop};
    std::vector<std::int64_t> load;
    if (inst_.has_side()) load = mask_load(inst_, s);
    for (auto b : order_) {
      if (in_mask(s, b)) continue;
      if (!precedence_allows(inst_, b, [&](std::size_t p) { return in_mask(s, p); })) continue;
      if (inst_.has_side() && !side_allows(inst_, load, b)) continue;
      Rational v = -inst_.box(b).cost;
      const auto& atoms = inst_.box(b).reward.atoms();
      for (std::size_t k = 0; k < atoms.size(); ++k)
        v += atoms[k].prob * entry(s | (Mask{1} << b), std::max(y, atom_index_[b][k])).value;
      if (v > e.value) e = {std::move(v), b};
    }
    return memo_.emplace(key, std::move(e)).first->second;
  }

  const Instance& inst_;
  Rational weight_;
  std::vector<Rational> grid_;
  std::vector<std::size_t> order_;
  std::vector<std::vector<std::size_t>> atom_index_;
  std::unordered_map<std::uint64_t, Entry> memo_;
  std::unordered_map<std::uint64_t, std::pair<Rational, Rational>> decomp_;
};

struct OracleResult {
  Rational value;
  Rational e_max;
  Rational e_cost;
  /// Solver holding the optimal policy; query any state through it.
  std::shared_ptr<ExactSolver> solver;

  /// pi*(S, y): a box index or ExactSolver::kStop.
  std::size_t action(Mask s, const Rational& y) const { return solver->action(s, solver->grid_index(y)); }
};

namespace detail {

inline OracleResult run_oracle(const Instance& inst) {
  // The solver keeps a reference; give it a stable copy it co-owns.
  auto owned = std::make_shared<const Instance>(inst);
  auto solver = std::shared_ptr<ExactSolver>(new ExactSolver(*owned), [owned](ExactSolver* p) { delete p; });
  auto start = solver->grid_index(Rational(0));
  OracleResult r;
  r.value = solver->value(0, start);
  std::tie(r.e_max, r.e_cost) = solver->decomposition(0, start);
  r.solver = std::move(solver);
  return r;
}

}  // namespace detail

inline OracleResult solve_exact(const Instance& inst) {
  for (const auto& b : inst.boxes())
    if (b.cost < 0)
      throw ValidationError("box '" + b.id + "' has negative cost; use solve_exact_negative_costs");
  return detail::run_oracle(inst);
}

/// Same recursion with negative costs allowed.
inline OracleResult solve_exact_negative_costs(const Instance& inst) { return detail::run_oracle(inst); }

/// sup over all adaptive policies of  weight * E[max opened] - E[total cost].
inline Rational weighted_benchmark(const Instance& inst, const Rational& weight) {
  ExactSolver solver(inst, weight);
  return solver.value(0, solver.grid_index(Rational(0)));
}

inline constexpr std::size_t kMaxFrontierBoxes = 4;

/// Achievable (E[final best], E[total cost]) pair of some policy.
struct PolicyOutcome {
  Rational e_max;
  Rational e_cost;
};

namespace detail {

/// Keeps outcomes not dominated by another (larger e_max, smaller e_cost).
inline std::vector<PolicyOutcome> pareto(std::vector<PolicyOutcome> pts) {
  std::sort(pts.begin(), pts.end(), [](const PolicyOutcome& a, const PolicyOutcome& b) {
    return a.e_max != b.e_max ? a.e_max > b.e_max : a.e_cost < b.e_cost;
  });
  std::vector<PolicyOutcome> out;
  for (auto& p : pts)
    if (out.empty() || p.e_cost < out.back().e_cost) out.push_back(std::move(p));
  return out;
}

}  // namespace detail

/// Pareto frontier of (E[max], E[cost]) over every deterministic policy,
/// enumerated exhaustively (dominated partial policies are discarded as
/// they are built; they can never be part of a better outcome).
inline std::vector<PolicyOutcome> policy_outcome_frontier(const Instance& inst) {
  if (inst.size() > kMaxFrontierBoxes)
    throw CapExceededError("policy enumeration supports at most " + std::to_string(kMaxFrontierBoxes) + " boxes");
  auto grid = inst.value_grid();
  auto index = [&](const Rational& y) {
    return static_cast<std::size_t>(std::lower_bound(grid.begin(), grid.end(), y) - grid.begin());
  };
  std::map<std::pair<Mask, std::size_t>, std::vector<PolicyOutcome>> memo;
  std::function<const std::vector<PolicyOutcome>&(Mask, std::size_t)> frontier =
      [&](Mask s, std::size_t y) -> const std::vector<PolicyOutcome>& {
    if (auto it = memo.find({s, y}); it != memo.end()) return it->second;
    std::vector<PolicyOutcome> all{{grid[y], Rational(0)}};
    for (auto b : inst.by_id()) {
      if (!can_open_mask(inst, s, b)) continue;
      const auto& box = inst.box(b);
      std::vector<PolicyOutcome> acc{{Rational(0), box.cost}};
      for (const auto& a : box.reward.atoms()) {
        const auto& child = frontier(s | (Mask{1} << b), std::max(y, index(a.value)));
        std::vector<PolicyOutcome> next;
        for (const auto& p : acc)
          for (const auto& c : child) next.push_back({p.e_max + a.prob * c.e_max, p.e_cost + a.prob * c.e_cost});
        acc = detail::pareto(std::move(next));
      }
      all.insert(all.end(), acc.begin(), acc.end());
    }
    return memo.emplace(std::make_pair(s, y), detail::pareto(std::move(all))).first->second;
  };
  return frontier(0, index(Rational(0)));
}

struct FixedOrderResult {
  std::vector<std::size_t> order;  // box indices
  Rational value;
};

/// Value of visiting `order` in sequence, stopping adaptively.
inline Rational fixed_order_value(const Instance& inst, std::span<const std::size_t> order) {
  auto grid = inst.value_grid();
  auto index = [&](const Rational& y) {
    return static_cast<std::size_t>(std::lower_bound(grid.begin(), grid.end(), y) - grid.begin());
  };
  std::vector<Rational> next(grid.begin(), grid.end());
  for (std::size_t t = order.size(); t-- > 0;) {
    const auto& box = inst.box(order[t]);
    std::vector<Rational> cur(grid.size());
    for (std::size_t g = 0; g < grid.size(); ++g) {
      Rational v = -box.cost;
      for (const auto& a : box.reward.atoms()) v += a.prob * next[a.value > grid[g] ? index(a.value) : g];
      cur[g] = v > grid[g] ? std::move(v) : grid[g];
    }
    next = std::move(cur);
  }
  return next[index(Rational(0))];
}

/// Best single exploration order (every maximal legal sequence), with
/// optimal adaptive stopping along it. Ties: lexicographically smallest
/// sequence of ids.
inline FixedOrderResult best_fixed_order(const Instance& inst) {
  if (inst.size() > kMaxFixedOrderBoxes)
    throw CapExceededError("fixed-order enumeration supports at most " + std::to_string(kMaxFixedOrderBoxes) +
                           " boxes, got " + std::to_string(inst.size()));
  std::optional<FixedOrderResult> best;
  std::vector<std::size_t> prefix;
  std::function<void(Mask)> extend = [&](Mask s) {
    bool extended = false;
    for (auto b : inst.by_id()) {
      if (!can_open_mask(inst, s, b)) continue;
      extended = true;
      prefix.push_back(b);
      extend(s | (Mask{1} << b));
      prefix.pop_back();
    }
    if (extended) return;
    auto v = fixed_order_value(inst, prefix);
    if (!best || v > best->value) best = FixedOrderResult{prefix, std::move(v)};
  };
  extend(0);
  return *best;
}

}  // namespace pandora
