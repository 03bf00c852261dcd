#pragma once

/// Small named instances used by the CLI `example` command and the tests.

#include <cstdint>
#include <cstdio>
#include <string>
#include <vector>

#include "pandora/distribution.hpp"
#include "pandora/instance.hpp"
#include "pandora/line_solver.hpp"
#include "pandora/oracle.hpp"
#include "pandora/rational.hpp"

namespace pandora::builtin {

inline DiscreteDistribution coin(Rational high, Rational p_high = Rational(1, 2)) {
  if (p_high == 1) return DiscreteDistribution::point(std::move(high));
  return DiscreteDistribution::from_atoms({{Rational(0), 1 - p_high}, {std::move(high), p_high}});
}

/// A costly box with no reward guarding a free box worth 2.
inline Instance guard_line() {
  std::vector<BoxSpec> boxes{{"b1", Rational(1), DiscreteDistribution::point(Rational(0))},
                             {"b2", Rational(0), DiscreteDistribution::point(Rational(2))}};
  return Instance::create(std::move(boxes), {ConstraintKind::line, {{"b1", "b2"}}, {"b1"}});
}

inline std::vector<BoxSpec> figure1_boxes(const Rational& epsilon) {
  return {{"A", Rational(0), coin(Rational(5, 2))},
          {"B", Rational(1), DiscreteDistribution::point(Rational(2))},
          {"C", 1 - epsilon / 2, coin(Rational(3))},
          {"D", Rational(0), coin(Rational(6))}};
}

/// Diamond DAG A->B, A->C, B->D, C->D where the optimal adaptive order
/// depends on A's realization (for epsilon in [5/4, 2]).
inline Instance figure1(const Rational& epsilon) {
  return Instance::create(figure1_boxes(epsilon),
                          {ConstraintKind::dag, {{"A", "B"}, {"A", "C"}, {"B", "D"}, {"C", "D"}}, {"A"}});
}

/// Tree variant: D duplicated as E under B and F under C, plus a
/// cardinality-4 side constraint.
inline Instance figure1_tree(const Rational& epsilon) {
  auto boxes = figure1_boxes(epsilon);
  auto d = boxes.back();
  boxes.pop_back();
  boxes.push_back({"E", d.cost, d.reward});
  boxes.push_back({"F", d.cost, d.reward});
  SideConstraint side;
  side.kind = SideKind::knapsack;
  side.capacity = {4};
  for (const auto& b : boxes) side.weights[b.id] = {1};
  return Instance::create(std::move(boxes),
                          {ConstraintKind::tree, {{"A", "B"}, {"A", "C"}, {"B", "E"}, {"C", "F"}}, {"A"}},
                          std::move(side));
}

/// n identical unconstrained boxes: cost 1 - p/2, reward 1/p^2 w.p. p^2.
inline Instance adaptivity_gap(const Rational& p, std::size_t n) {
  if (!(p > 0 && p <= Rational(1, 2))) throw ValidationError("adaptivity-gap example needs p in (0, 1/2]");
  std::vector<BoxSpec> boxes;
  auto reward = coin(1 / (p * p), p * p);
  for (std::size_t i = 0; i < n; ++i) {
    char id[32];
    std::snprintf(id, sizeof id, "x%04zu", i + 1);
    boxes.push_back({id, 1 - p / 2, reward});
  }
  return Instance::create(std::move(boxes), {ConstraintKind::unconstrained, {}, {}});
}

/// ceil(5 / p^2).
inline std::size_t adaptivity_gap_default_n(const Rational& p) {
  Rational q = 5 / (p * p);
  Integer c = boost::multiprecision::numerator(q) / boost::multiprecision::denominator(q);
  if (Rational(c) != q) c += 1;
  return c.convert_to<std::size_t>();
}

/// Free zero-reward root with the given boxes as leaves.
inline Instance weitzman_star(std::vector<BoxSpec> leaves) {
  ConstraintGraph g{ConstraintKind::tree, {}, {"root"}};
  for (const auto& b : leaves) g.edges.emplace_back("root", b.id);
  leaves.insert(leaves.begin(), {"root", Rational(0), DiscreteDistribution::point(Rational(0))});
  return Instance::create(std::move(leaves), std::move(g));
}

struct Figure1Check {
  Rational oracle_value;
  Rational fixed_order_value;
  std::vector<std::size_t> fixed_order;
  bool opens_a_first = false;
  std::size_t second_if_high = ExactSolver::kStop;  // after X_A = 5/2
  std::size_t second_if_low = ExactSolver::kStop;   // after X_A = 0

  bool adaptive_order() const { return second_if_high != second_if_low; }
  bool fixed_order_suboptimal() const { return fixed_order_value < oracle_value; }
};

inline Figure1Check check_figure1(const Instance& inst) {
  auto opt = solve_exact(inst);
  auto fixed = best_fixed_order(inst);
  Figure1Check c;
  c.oracle_value = opt.value;
  c.fixed_order_value = fixed.value;
  c.fixed_order = fixed.order;
  auto a = inst.index_of("A");
  c.opens_a_first = opt.action(0, Rational(0)) == a;
  Mask after_a = Mask{1} << a;
  c.second_if_high = opt.action(after_a, Rational(5, 2));
  c.second_if_low = opt.action(after_a, Rational(0));
  return c;
}

struct AdaptivityGapCheck {
  Rational adaptive_value;       // optimal adaptive (line DP over identical boxes)
  Rational best_fixed_set_value; // max over k of opening exactly k boxes
  std::size_t best_k = 0;
  double ratio = 0;
};

/// Value of committing to open k of the boxes up front:
///   (1/p^2)(1 - (1 - p^2)^k) - k (1 - p/2).
inline Rational fixed_set_value(const Rational& p, std::size_t k) {
  Rational miss = 1;
  for (std::size_t j = 0; j < k; ++j) miss *= 1 - p * p;
  return (1 - miss) / (p * p) - Rational(static_cast<std::int64_t>(k)) * (1 - p / 2);
}

inline AdaptivityGapCheck check_adaptivity_gap(const Rational& p, std::size_t n) {
  auto inst = adaptivity_gap(p, n);
  LineInstance line{std::vector<BoxSpec>(inst.boxes().begin(), inst.boxes().end())};
  AdaptivityGapCheck c;
  c.adaptive_value = ValueTable(line).value();
  Rational miss = 1;
  c.best_fixed_set_value = 0;
  const Rational cost = 1 - p / 2;
  for (std::size_t k = 1; k <= n; ++k) {
    miss *= 1 - p * p;
    Rational v = (1 - miss) / (p * p) - Rational(static_cast<std::int64_t>(k)) * cost;
    if (v > c.best_fixed_set_value) {
      c.best_fixed_set_value = v;
      c.best_k = k;
    }
  }
  c.ratio = c.best_fixed_set_value > 0 ? to_double(c.adaptive_value / c.best_fixed_set_value) : 0.0;
  return c;
}

}  // namespace pandora::builtin
