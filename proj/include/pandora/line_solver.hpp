#pragma once

/// Optimal stopping along a single line of boxes.
///
/// Phi(x, i) is the optimal expected future net revenue when the best
/// reward seen so far is x and box i is the next one available:
///
///   Phi(x, n+1) = x
///   Phi(x, i)   = max{ x, -c_i + E[Phi(max(x, X_i), i+1)] }
///
/// Every Phi(., i) is piecewise linear, nondecreasing and 1-Lipschitz, so
/// it is carried exactly as a PiecewiseLinear. The continuation value minus
/// x is nonincreasing, which makes the generalized reservation value z_i
/// (the smallest fixed point of Phi(., i)) a single exact root.

#include <cstddef>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "pandora/distribution.hpp"
#include "pandora/error.hpp"
#include "pandora/instance.hpp"
#include "pandora/piecewise_linear.hpp"
#include "pandora/rational.hpp"

namespace pandora {

struct LineInstance {
  std::vector<BoxSpec> boxes;  // openable only in this order
};

/// The boxes of a line-constrained (or single-box) instance in path order.
inline LineInstance line_of(const Instance& inst) {
  LineInstance line;
  if (inst.kind() == ConstraintKind::line) {
    for (auto i : inst.line_order()) line.boxes.push_back(inst.box(i));
  } else if (inst.size() == 1) {
    line.boxes.push_back(inst.box(0));
  } else {
    throw UnsupportedError("instance is not a line");
  }
  return line;
}

namespace detail {

/// -c + E[next(max(x, X))] as an exact piecewise-linear function of x.
inline PiecewiseLinear continuation(const BoxSpec& box, const PiecewiseLinear& next) {
  std::vector<Rational> xs(next.breakpoints().begin(), next.breakpoints().end());
  for (const auto& a : box.reward.atoms()) xs.push_back(a.value);
  xs = sorted_union(std::move(xs));
  std::vector<Rational> ys;
  ys.reserve(xs.size());
  for (const auto& x : xs) {
    Rational v = -box.cost;
    for (const auto& a : box.reward.atoms()) v += a.prob * next(a.value > x ? a.value : x);
    ys.push_back(std::move(v));
  }
  // Below every breakpoint max(x, X) = X, so the function is flat there.
  return {std::move(xs), std::move(ys), Rational(0), next.right_slope()};
}

inline PiecewiseLinear minus_identity(const PiecewiseLinear& f) {
  std::vector<Rational> ys(f.values().begin(), f.values().end());
  auto xs = f.breakpoints();
  for (std::size_t k = 0; k < ys.size(); ++k) ys[k] -= xs[k];
  return {std::vector<Rational>(xs.begin(), xs.end()), std::move(ys), f.left_slope() - 1, f.right_slope() - 1};
}

struct Step {
  PiecewiseLinear cont;
  PiecewiseLinear phi;
  Rational z;
};

inline Step backward_step(const BoxSpec& box, const PiecewiseLinear& next) {
  if (box.cost < 0) throw ValidationError("line solver requires nonnegative costs (box '" + box.id + "')");
  auto cont = continuation(box, next);
  auto root = minus_identity(cont).smallest_nonpositive_point();
  if (!root) throw std::logic_error("continuation never falls to the stopping value");
  Rational z = *root;

  std::vector<Rational> xs(cont.breakpoints().begin(), cont.breakpoints().end());
  xs.push_back(z);
  xs.push_back(Rational(0));
  xs = sorted_union(std::move(xs));
  std::vector<Rational> ys;
  ys.reserve(xs.size());
  for (const auto& x : xs) {
    Rational c = cont(x);
    ys.push_back(c > x ? c : x);
  }
  PiecewiseLinear phi(std::move(xs), std::move(ys), Rational(0), Rational(1));
  return {std::move(cont), std::move(phi), std::move(z)};
}

}  // namespace detail

/// Phi(., i) for every suffix of a line. Box indices are 1-based to match
/// the usual statement of the recursion; i = n+1 is the empty suffix.
class ValueTable {
 public:
  explicit ValueTable(const LineInstance& line) {
    const std::size_t n = line.boxes.size();
    phi_.reserve(n + 1);
    cont_.reserve(n);
    z_.resize(n);
    std::vector<PiecewiseLinear> phi_rev{PiecewiseLinear::identity()};
    std::vector<PiecewiseLinear> cont_rev;
    for (std::size_t k = n; k-- > 0;) {
      auto step = detail::backward_step(line.boxes[k], phi_rev.back());
      z_[k] = std::move(step.z);
      cont_rev.push_back(std::move(step.cont));
      phi_rev.push_back(std::move(step.phi));
    }
    phi_.assign(std::make_move_iterator(phi_rev.rbegin()), std::make_move_iterator(phi_rev.rend()));
    cont_.assign(std::make_move_iterator(cont_rev.rbegin()), std::make_move_iterator(cont_rev.rend()));

    std::vector<Rational> grid{Rational(0)};
    for (const auto& f : phi_) grid.insert(grid.end(), f.breakpoints().begin(), f.breakpoints().end());
    grid_ = sorted_union(std::move(grid));
  }

  std::size_t size() const { return z_.size(); }

  /// Phi(x, i) for i in 1..n+1 and any real x.
  Rational phi(const Rational& x, std::size_t i) const { return phi_.at(i - 1)(x); }
  /// -c_i + E[Phi(max(x, X_i), i+1)] for i in 1..n.
  Rational continuation(const Rational& x, std::size_t i) const { return cont_.at(i - 1)(x); }
  const PiecewiseLinear& phi_function(std::size_t i) const { return phi_.at(i - 1); }

  /// Generalized reservation value z_i.
  const Rational& threshold(std::size_t i) const { return z_.at(i - 1); }
  std::span<const Rational> thresholds() const { return z_; }

  /// Stored decision at state (x, i): proceed at exact indifference.
  bool proceeds(const Rational& x, std::size_t i) const { return x <= threshold(i); }

  /// Sorted union of {0}, every support value and every breakpoint.
  std::span<const Rational> grid() const { return grid_; }

  /// Optimal value from the start, Phi(0, 1).
  Rational value() const { return phi(Rational(0), 1); }

 private:
  std::vector<PiecewiseLinear> phi_;   // phi_[i-1] = Phi(., i), i = 1..n+1
  std::vector<PiecewiseLinear> cont_;  // cont_[i-1], i = 1..n
  std::vector<Rational> z_;
  std::vector<Rational> grid_;
};

struct ThresholdTable {
  std::vector<Rational> z;        // z[i-1] = z_i
  std::vector<std::size_t> d;     // d[i-1] = d(i), 1-based
};

/// d(i) = min{ t >= i : z_{t+1} < z_i or t = n }.
inline std::vector<std::size_t> dependence_horizon(std::span<const Rational> z) {
  const std::size_t n = z.size();
  std::vector<std::size_t> d(n);
  for (std::size_t i = 1; i <= n; ++i) {
    std::size_t t = i;
    while (t < n && !(z[t] < z[i - 1])) ++t;
    d[i - 1] = t;
  }
  return d;
}

struct LineSolution {
  ValueTable table;
  ThresholdTable thresholds;
};

inline LineSolution solve_line(const LineInstance& line) {
  if (line.boxes.empty()) throw ValidationError("line must contain at least one box");
  ValueTable table(line);
  ThresholdTable t;
  t.z.assign(table.thresholds().begin(), table.thresholds().end());
  t.d = dependence_horizon(t.z);
  return {std::move(table), std::move(t)};
}

/// Reservation value of `box` if it were prepended to the line whose
/// suffix table is `line_table`.
inline Rational compute_threshold(const BoxSpec& box, const ValueTable& line_table) {
  return detail::backward_step(box, line_table.phi_function(1)).z;
}

inline Rational compute_threshold(const BoxSpec& box, const LineInstance& line) {
  if (line.boxes.empty()) return detail::backward_step(box, PiecewiseLinear::identity()).z;
  return compute_threshold(box, ValueTable(line));
}

struct MacroBoxPartition {
  std::vector<std::size_t> boundaries;  // 1-based starting indices j_1 = 1 < j_2 < ...

  friend bool operator==(const MacroBoxPartition&, const MacroBoxPartition&) = default;
};

/// Runs of consecutive boxes whose thresholds stay strictly above the
/// run leader's threshold.
inline MacroBoxPartition macro_partition(std::span<const Rational> z) {
  MacroBoxPartition p;
  if (z.empty()) return p;
  std::size_t leader = 1;
  p.boundaries.push_back(1);
  for (std::size_t j = 2; j <= z.size(); ++j)
    if (z[j - 1] <= z[leader - 1]) {
      leader = j;
      p.boundaries.push_back(j);
    }
  return p;
}

inline MacroBoxPartition macro_partition(const ThresholdTable& t) { return macro_partition(t.z); }

}  // namespace pandora
