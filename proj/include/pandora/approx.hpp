#pragma once

/// Adaptive strategy for tree precedence plus an oblivious side constraint.
///
/// Boxes are laid out in pre-order, so skipping box i means jumping to
/// next(i), the first position outside i's subtree. The side constraint is
/// summarized by an oracle state D(S) with a small image. Psi(i, y, D) is
/// the best revenue reachable from position i with best reward y:
///
///   Psi(n+1, y, D) = y
///   Psi(i, y, D)   = max{ y,
///                         -c_i + E[Psi(i+1, max(y, X_i), D + w_i)]   (open)
///                         Psi(next(i), y, D) }                       (skip)
///
/// Equal values resolve as terminate, then open, then skip.

#include <algorithm>
#include <concepts>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "pandora/error.hpp"
#include "pandora/instance.hpp"
#include "pandora/oracle.hpp"
#include "pandora/rational.hpp"
#include "pandora/rng.hpp"
#include "pandora/strategy.hpp"

namespace pandora {

struct PreOrderIndex {
  std::vector<std::size_t> order;     // order[p-1] = box at position p
  std::vector<std::size_t> next;      // next[p-1] = next(p), in 1..n+1
  std::vector<std::size_t> position;  // position[box] = p

  std::size_t size() const { return order.size(); }
};

/// Pre-order with children (and forest roots) visited in ascending id.
inline PreOrderIndex build_preorder(const Instance& inst) {
  if (inst.kind() == ConstraintKind::dag) throw UnsupportedError("pre-order needs a tree or forest constraint");
  const std::size_t n = inst.size();
  PreOrderIndex idx;
  idx.next.resize(n);
  idx.position.resize(n);
  std::function<void(std::size_t)> visit = [&](std::size_t v) {
    idx.order.push_back(v);
    std::size_t p = idx.order.size();
    idx.position[v] = p;
    for (auto c : inst.children(v)) visit(c);
    idx.next[p - 1] = idx.order.size() + 1;
  };
  for (auto r : inst.roots()) visit(r);
  return idx;
}

/// Oblivious feasibility oracle: a compact state D(S) updated one box at a
/// time, with feasibility decided from the state alone.
template <typename O>
concept ObliviousOracle = requires(const O& o, std::size_t state, std::size_t box) {
  { o.state_count() } -> std::convertible_to<std::size_t>;
  { o.empty_state() } -> std::convertible_to<std::size_t>;
  { o.add(state, box) } -> std::convertible_to<std::optional<std::size_t>>;
};

inline constexpr std::size_t kMaxOracleDimension = 4;

/// Generalized knapsack oracle: D(S) = sum of weight vectors, feasible while
/// componentwise <= capacity. Partition constraints arrive here already
/// encoded as unit-weight knapsacks. Only feasible states are indexed.
class KnapsackOracle {
 public:
  explicit KnapsackOracle(const Instance& inst) : inst_(&inst) {
    const std::int64_t bound = 10 * static_cast<std::int64_t>(inst.size());
    if (inst.dimension() > kMaxOracleDimension)
      throw CapExceededError("oracle image too large: dimension " + std::to_string(inst.dimension()) + " > " +
                             std::to_string(kMaxOracleDimension));
    stride_.assign(inst.dimension(), 1);
    count_ = 1;
    for (std::size_t k = 0; k < inst.dimension(); ++k) {
      auto cap = inst.capacity()[k];
      if (cap > bound)
        throw CapExceededError("oracle image too large: capacity " + std::to_string(cap) + " exceeds 10*n = " +
                               std::to_string(bound));
      stride_[k] = count_;
      count_ *= static_cast<std::size_t>(cap) + 1;
    }
  }

  std::size_t state_count() const { return count_; }
  std::size_t empty_state() const { return 0; }

  std::vector<std::int64_t> decode(std::size_t state) const {
    std::vector<std::int64_t> v(stride_.size());
    for (std::size_t k = stride_.size(); k-- > 0;) {
      v[k] = static_cast<std::int64_t>(state / stride_[k]);
      state %= stride_[k];
    }
    return v;
  }

  /// D(S + box), or nullopt when S + box violates the capacity.
  std::optional<std::size_t> add(std::size_t state, std::size_t box) const {
    auto w = inst_->weight(box);
    auto cap = inst_->capacity();
    std::size_t out = state;
    auto load = decode(state);
    for (std::size_t k = 0; k < load.size(); ++k) {
      if (load[k] + w[k] > cap[k]) return std::nullopt;
      out += static_cast<std::size_t>(w[k]) * stride_[k];
    }
    return out;
  }

 private:
  const Instance* inst_;
  std::vector<std::size_t> stride_;
  std::size_t count_ = 1;
};

static_assert(ObliviousOracle<KnapsackOracle>);

inline KnapsackOracle knapsack_oracle(const Instance& inst) { return KnapsackOracle(inst); }

class ApproxPolicy {
 public:
  static constexpr std::size_t kTerminate = static_cast<std::size_t>(-1);

  ApproxPolicy(PreOrderIndex preorder, std::vector<Rational> grid, std::size_t states)
      : preorder_(std::move(preorder)), grid_(std::move(grid)), states_(states) {
    auto cells = (preorder_.size() + 1) * grid_.size() * states_;
    psi_.resize(cells);
    action_.assign(cells, kTerminate);
  }

  const PreOrderIndex& preorder() const { return preorder_; }
  std::span<const Rational> grid() const { return grid_; }
  std::size_t state_count() const { return states_; }

  std::size_t grid_index(const Rational& y) const {
    auto it = std::lower_bound(grid_.begin(), grid_.end(), y);
    if (it == grid_.end() || *it != y) throw ValidationError("value " + to_string(y) + " is not on the support grid");
    return static_cast<std::size_t>(it - grid_.begin());
  }

  /// Psi(i, y, D) with i in 1..n+1.
  const Rational& psi(std::size_t i, std::size_t y, std::size_t d) const { return psi_[cell(i, y, d)]; }
  /// Position of the next box to open from (i, y, D), or kTerminate.
  std::size_t action(std::size_t i, std::size_t y, std::size_t d) const { return action_[cell(i, y, d)]; }

  /// Psi(1, 0, D(empty)).
  const Rational& value() const { return psi(1, grid_index(Rational(0)), 0); }

  Rational& psi_ref(std::size_t i, std::size_t y, std::size_t d) { return psi_[cell(i, y, d)]; }
  std::size_t& action_ref(std::size_t i, std::size_t y, std::size_t d) { return action_[cell(i, y, d)]; }

 private:
  std::size_t cell(std::size_t i, std::size_t y, std::size_t d) const {
    return ((i - 1) * grid_.size() + y) * states_ + d;
  }

  PreOrderIndex preorder_;
  std::vector<Rational> grid_;
  std::size_t states_;
  std::vector<Rational> psi_;
  std::vector<std::size_t> action_;
};

template <ObliviousOracle Oracle>
ApproxPolicy solve_approx(const Instance& inst, const Oracle& oracle) {
  auto pre = build_preorder(inst);
  auto grid = inst.value_grid();
  const std::size_t n = inst.size();
  const std::size_t states = oracle.state_count();
  ApproxPolicy pol(pre, grid, states);
  auto index = [&](const Rational& y) {
    return static_cast<std::size_t>(std::lower_bound(grid.begin(), grid.end(), y) - grid.begin());
  };

  for (std::size_t y = 0; y < grid.size(); ++y)
    for (std::size_t d = 0; d < states; ++d) pol.psi_ref(n + 1, y, d) = grid[y];

  for (std::size_t i = n; i >= 1; --i) {
    const auto box_index = pre.order[i - 1];
    const auto& box = inst.box(box_index);
    const auto next = pre.next[i - 1];
    for (std::size_t y = 0; y < grid.size(); ++y) {
      for (std::size_t d = 0; d < states; ++d) {
        Rational best = grid[y];
        std::size_t act = ApproxPolicy::kTerminate;
        if (auto d2 = oracle.add(d, box_index)) {
          Rational open = -box.cost;
          for (const auto& a : box.reward.atoms())
            open += a.prob * pol.psi(i + 1, a.value > grid[y] ? index(a.value) : y, *d2);
          if (open > best) {
            best = std::move(open);
            act = i;
          }
        }
        const auto& skip = pol.psi(next, y, d);
        if (skip > best) {
          best = skip;
          act = pol.action(next, y, d);
        }
        pol.psi_ref(i, y, d) = std::move(best);
        pol.action_ref(i, y, d) = act;
      }
    }
  }
  return pol;
}

inline ApproxPolicy solve_approx(const Instance& inst) { return solve_approx(inst, knapsack_oracle(inst)); }

/// Executes the policy with lazily sampled rewards.
template <ObliviousOracle Oracle>
Trajectory run_approx(const Instance& inst, const ApproxPolicy& policy, const Oracle& oracle, std::uint64_t seed) {
  auto rng = CounterRng::derived(seed, 0);
  const auto& pre = policy.preorder();
  Trajectory traj;
  std::size_t pos = 1, y = policy.grid_index(Rational(0)), d = oracle.empty_state();
  while (pos <= pre.size()) {
    auto act = policy.action(pos, y, d);
    if (act == ApproxPolicy::kTerminate) break;
    auto b = pre.order[act - 1];
    const auto& box = inst.box(b);
    const auto& reward = box.reward.atoms()[AtomSampler(box.reward)(rng)].value;
    auto d2 = oracle.add(d, b);
    if (!d2) throw std::logic_error("approximate policy chose an infeasible box");
    d = *d2;
    traj.steps.push_back({b, reward});
    traj.final.opened.push_back(b);
    traj.final.spent += box.cost;
    if (reward > traj.final.best) traj.final.best = reward;
    y = policy.grid_index(traj.final.best);
    pos = act + 1;
  }
  return traj;
}

inline Trajectory run_approx(const Instance& inst, const ApproxPolicy& policy, std::uint64_t seed) {
  return run_approx(inst, policy, knapsack_oracle(inst), seed);
}

/// Exact expected revenue of following the policy's actions. Reads only
/// the action table, never the stored Psi values.
template <ObliviousOracle Oracle>
Rational evaluate_approx_exact(const Instance& inst, const ApproxPolicy& policy, const Oracle& oracle) {
  const auto& pre = policy.preorder();
  auto grid = policy.grid();
  std::unordered_map<std::uint64_t, Rational> memo;
  std::function<Rational(std::size_t, std::size_t, std::size_t)> value = [&](std::size_t pos, std::size_t y,
                                                                             std::size_t d) -> Rational {
    if (pos > pre.size()) return grid[y];
    auto act = policy.action(pos, y, d);
    if (act == ApproxPolicy::kTerminate) return grid[y];
    std::uint64_t key = ((static_cast<std::uint64_t>(pos) * grid.size()) + y) * policy.state_count() + d;
    if (auto it = memo.find(key); it != memo.end()) return it->second;
    auto b = pre.order[act - 1];
    const auto& box = inst.box(b);
    auto d2 = oracle.add(d, b);
    if (!d2) throw std::logic_error("approximate policy chose an infeasible box");
    Rational v = -box.cost;
    for (const auto& a : box.reward.atoms())
      v += a.prob * value(act + 1, a.value > grid[y] ? policy.grid_index(a.value) : y, *d2);
    memo.emplace(key, v);
    return v;
  };
  return value(1, policy.grid_index(Rational(0)), oracle.empty_state());
}

inline Rational evaluate_approx_exact(const Instance& inst, const ApproxPolicy& policy) {
  return evaluate_approx_exact(inst, policy, knapsack_oracle(inst));
}

inline constexpr std::size_t kMaxSetEnumerationBoxes = 12;
inline constexpr std::size_t kMaxGuaranteeOracleBoxes = 10;

struct GuaranteeReport {
  Rational start_value;            // Psi(1, 0, D(empty))
  std::size_t feasible_sets = 0;
  Rational set_margin;             // min over feasible S of Psi - evaluate_set(S)
  Mask tightest_set = 0;
  std::optional<Rational> policy_value;     // exact value of the action table
  std::optional<Rational> e_max;            // of the optimal adaptive policy
  std::optional<Rational> e_cost;
  std::optional<Rational> guarantee_margin; // policy_value - (e_max / 2 - e_cost)
};

/// (a) dominance over every feasible fixed set, and (b) the half-benchmark
/// guarantee against the exact optimal policy (when n is small enough).
inline GuaranteeReport verify_guarantee(const Instance& inst, const ApproxPolicy& policy) {
  if (inst.size() > kMaxSetEnumerationBoxes)
    throw CapExceededError("feasible-set enumeration supports at most " + std::to_string(kMaxSetEnumerationBoxes) +
                           " boxes, got " + std::to_string(inst.size()));
  GuaranteeReport r;
  r.start_value = policy.value();
  bool first = true;
  for (Mask s = 0; s < (Mask{1} << inst.size()); ++s) {
    if (set_violation(inst, s)) continue;
    ++r.feasible_sets;
    Rational margin = r.start_value - evaluate_set(inst, s);
    if (first || margin < r.set_margin) {
      r.set_margin = std::move(margin);
      r.tightest_set = s;
      first = false;
    }
  }
  if (inst.size() <= kMaxGuaranteeOracleBoxes) {
    r.policy_value = evaluate_approx_exact(inst, policy);
    auto opt = solve_exact(inst);
    r.e_max = opt.e_max;
    r.e_cost = opt.e_cost;
    r.guarantee_margin = *r.policy_value - (opt.e_max / 2 - opt.e_cost);
  }
  return r;
}

}  // namespace pandora
