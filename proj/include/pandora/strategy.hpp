#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pandora/distribution.hpp"
#include "pandora/error.hpp"
#include "pandora/instance.hpp"
#include "pandora/rational.hpp"
#include "pandora/rng.hpp"
#include "pandora/tree_solver.hpp"

namespace pandora {

/// Per-box thresholds plus a total tiebreak order (lower rank wins ties).
struct ThresholdPolicy {
  std::vector<Rational> thresholds;  // by box index
  std::vector<std::size_t> rank;     // by box index

  /// Ties broken by box id.
  static ThresholdPolicy by_id(const Instance& inst, std::vector<Rational> thresholds) {
    if (thresholds.size() != inst.size()) throw ValidationError("policy must give a threshold for every box");
    ThresholdPolicy p{std::move(thresholds), std::vector<std::size_t>(inst.size())};
    auto order = inst.by_id();
    for (std::size_t r = 0; r < order.size(); ++r) p.rank[order[r]] = r;
    return p;
  }

  static ThresholdPolicy from_map(const Instance& inst, const std::map<std::string, Rational>& by_name) {
    std::vector<Rational> t(inst.size());
    std::vector<bool> given(inst.size(), false);
    for (const auto& [id, z] : by_name) {
      auto i = inst.index_of(id);
      t[i] = z;
      given[i] = true;
    }
    for (std::size_t i = 0; i < inst.size(); ++i)
      if (!given[i]) throw ValidationError("policy has no threshold for box '" + inst.box(i).id + "'");
    return by_id(inst, std::move(t));
  }

  /// The generalized Pandora's rule of a tree solution; ties follow the
  /// linearization so execution reproduces it exactly.
  static ThresholdPolicy from_tree(const TreeSolution& sol) {
    ThresholdPolicy p{sol.thresholds, std::vector<std::size_t>(sol.thresholds.size())};
    for (std::size_t r = 0; r < sol.order_indices.size(); ++r) p.rank[sol.order_indices[r]] = r;
    return p;
  }
};

struct ExecutionState {
  std::vector<std::size_t> opened;  // in opening order
  Rational best = 0;
  Rational spent = 0;

  Rational revenue() const { return best - spent; }
};

struct Step {
  std::size_t box;
  Rational reward;
};

struct Trajectory {
  std::vector<Step> steps;
  ExecutionState final;

  Rational revenue() const { return final.revenue(); }
};

namespace detail {

inline std::optional<std::size_t> pick_next(const Instance& inst, const ThresholdPolicy& policy, const OpenSet& open) {
  std::optional<std::size_t> best;
  for (std::size_t i = 0; i < inst.size(); ++i) {
    if (!can_open(inst, open, i)) continue;
    if (!best || policy.thresholds[i] > policy.thresholds[*best] ||
        (policy.thresholds[i] == policy.thresholds[*best] && policy.rank[i] < policy.rank[*best]))
      best = i;
  }
  return best;
}

inline void check_policy(const Instance& inst, const ThresholdPolicy& policy) {
  if (policy.thresholds.size() != inst.size() || policy.rank.size() != inst.size())
    throw ValidationError("policy does not cover every box of the instance");
}

}  // namespace detail

/// The realization-independent order in which a threshold policy opens
/// boxes when it never stops early.
inline std::vector<std::size_t> exploration_order(const Instance& inst, const ThresholdPolicy& policy) {
  detail::check_policy(inst, policy);
  OpenSet open(inst);
  std::vector<std::size_t> order;
  while (auto next = detail::pick_next(inst, policy, open)) {
    order.push_back(*next);
    open.insert(inst, *next);
  }
  return order;
}

/// Threshold strategy: while the best reward is below the largest threshold
/// among openable boxes, open that box.
inline Trajectory run_threshold(const Instance& inst, const ThresholdPolicy& policy, std::uint64_t seed) {
  detail::check_policy(inst, policy);
  auto rng = CounterRng::derived(seed, 0);
  OpenSet open(inst);
  Trajectory traj;
  while (auto next = detail::pick_next(inst, policy, open)) {
    if (!(traj.final.best < policy.thresholds[*next])) break;
    const auto& box = inst.box(*next);
    AtomSampler sampler(box.reward);
    const auto& reward = box.reward.atoms()[sampler(rng)].value;
    open.insert(inst, *next);
    traj.steps.push_back({*next, reward});
    traj.final.opened.push_back(*next);
    traj.final.spent += box.cost;
    if (reward > traj.final.best) traj.final.best = reward;
  }
  return traj;
}

/// Exact expected net revenue of a threshold policy. The opening order is
/// fixed, so this is a backward pass over (position, best-so-far) with the
/// best value restricted to the support grid.
inline Rational evaluate_threshold_exact(const Instance& inst, const ThresholdPolicy& policy) {
  auto order = exploration_order(inst, policy);
  auto grid = inst.value_grid();
  auto index = [&](const Rational& y) {
    return static_cast<std::size_t>(std::lower_bound(grid.begin(), grid.end(), y) - grid.begin());
  };
  std::vector<Rational> next(grid.begin(), grid.end());
  for (std::size_t t = order.size(); t-- > 0;) {
    const auto& box = inst.box(order[t]);
    const auto& z = policy.thresholds[order[t]];
    std::vector<Rational> cur(grid.size());
    for (std::size_t g = 0; g < grid.size(); ++g) {
      const auto& y = grid[g];
      if (!(y < z)) {
        cur[g] = y;
        continue;
      }
      Rational v = -box.cost;
      for (const auto& a : box.reward.atoms()) v += a.prob * next[a.value > y ? index(a.value) : g];
      cur[g] = std::move(v);
    }
    next = std::move(cur);
  }
  return next[index(Rational(0))];
}

/// E[max_{i in S} X_i] - sum_{i in S} c_i for a feasible set S.
inline Rational evaluate_set(const Instance& inst, Mask set) {
  if (inst.size() < 64 && (set >> inst.size()) != 0) throw ValidationError("set refers to boxes outside the instance");
  if (auto why = set_violation(inst, set)) throw ValidationError("infeasible set: " + *why);
  std::vector<DiscreteDistribution> members;
  Rational cost = 0;
  for (std::size_t i = 0; i < inst.size(); ++i)
    if (in_mask(set, i)) {
      members.push_back(inst.box(i).reward);
      cost += inst.box(i).cost;
    }
  if (members.empty()) return 0;
  return max_distribution(members).mean() - cost;
}

inline Rational evaluate_set(const Instance& inst, std::span<const std::string> ids) {
  return evaluate_set(inst, mask_of(inst, ids));
}

struct SimulationSummary {
  double mean = 0;
  double stddev = 0;  // sample standard deviation
  std::uint64_t trials = 0;
  std::uint64_t seed = 0;
};

inline std::string format_double(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

/// Flat key-value block: mean=, stddev=, trials=, seed=.
inline std::string to_key_value(const SimulationSummary& s) {
  return "mean=" + format_double(s.mean) + "\nstddev=" + format_double(s.stddev) +
         "\ntrials=" + std::to_string(s.trials) + "\nseed=" + std::to_string(s.seed) + "\n";
}

/// Monte-Carlo estimate. Trial t is driven by a stream derived from
/// (seed, t), and statistics are accumulated in trial order.
inline SimulationSummary simulate(const Instance& inst, const ThresholdPolicy& policy, std::uint64_t trials,
                                  std::uint64_t seed) {
  if (trials == 0) throw ValidationError("simulate needs at least one trial");
  detail::check_policy(inst, policy);
  auto order = exploration_order(inst, policy);
  std::vector<AtomSampler> samplers;
  for (std::size_t i = 0; i < inst.size(); ++i) samplers.emplace_back(inst.box(i).reward);
  // Trial 0 replays run_threshold(inst, policy, seed).
  const Rational zero = 0;
  double mean = 0, m2 = 0;
  for (std::uint64_t t = 0; t < trials; ++t) {
    auto rng = CounterRng::derived(seed, t);
    const Rational* best = &zero;
    Rational spent = 0;
    for (auto i : order) {
      if (!(*best < policy.thresholds[i])) break;
      const auto& atom = inst.box(i).reward.atoms()[samplers[i](rng)];
      spent += inst.box(i).cost;
      if (atom.value > *best) best = &atom.value;
    }
    double r = to_double(*best - spent);
    double delta = r - mean;
    mean += delta / static_cast<double>(t + 1);
    m2 += delta * (r - mean);
  }
  SimulationSummary s;
  s.mean = mean;
  s.stddev = trials > 1 ? std::sqrt(m2 / static_cast<double>(trials - 1)) : 0.0;
  s.trials = trials;
  s.seed = seed;
  return s;
}

}  // namespace pandora
