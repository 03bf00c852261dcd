#pragma once

#include <algorithm>
#include <cassert>
#include <cstddef>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "pandora/rational.hpp"

namespace pandora {

/// Continuous piecewise-linear function on the whole real line, stored
/// exactly: breakpoints with their values plus the slopes of the two
/// unbounded rays.
class PiecewiseLinear {
 public:
  PiecewiseLinear(std::vector<Rational> xs, std::vector<Rational> ys, Rational left_slope, Rational right_slope)
      : xs_(std::move(xs)), ys_(std::move(ys)), left_slope_(std::move(left_slope)), right_slope_(std::move(right_slope)) {
    assert(!xs_.empty() && xs_.size() == ys_.size());
    assert(std::is_sorted(xs_.begin(), xs_.end()));
  }

  static PiecewiseLinear identity() { return {{Rational(0)}, {Rational(0)}, Rational(1), Rational(1)}; }

  Rational operator()(const Rational& x) const {
    if (x <= xs_.front()) return ys_.front() + left_slope_ * (x - xs_.front());
    if (x >= xs_.back()) return ys_.back() + right_slope_ * (x - xs_.back());
    auto hi = static_cast<std::size_t>(std::upper_bound(xs_.begin(), xs_.end(), x) - xs_.begin());
    auto lo = hi - 1;
    if (xs_[lo] == x) return ys_[lo];
    return ys_[lo] + (ys_[hi] - ys_[lo]) * (x - xs_[lo]) / (xs_[hi] - xs_[lo]);
  }

  std::span<const Rational> breakpoints() const { return xs_; }
  std::span<const Rational> values() const { return ys_; }
  const Rational& left_slope() const { return left_slope_; }
  const Rational& right_slope() const { return right_slope_; }

  /// Smallest x with f(x) <= 0, assuming f is nonincreasing with left
  /// slope < 0. nullopt when f stays positive forever.
  std::optional<Rational> smallest_nonpositive_point() const {
    if (ys_.front() <= 0) {
      // f(x) = y0 + left_slope (x - x0) on the left ray.
      return xs_.front() - ys_.front() / left_slope_;
    }
    for (std::size_t k = 1; k < xs_.size(); ++k) {
      if (ys_[k] <= 0)
        return xs_[k - 1] + ys_[k - 1] * (xs_[k] - xs_[k - 1]) / (ys_[k - 1] - ys_[k]);
    }
    if (right_slope_ < 0) return xs_.back() - ys_.back() / right_slope_;
    return std::nullopt;
  }

 private:
  std::vector<Rational> xs_;
  std::vector<Rational> ys_;
  Rational left_slope_;
  Rational right_slope_;
};

inline std::vector<Rational> sorted_union(std::vector<Rational> v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

}  // namespace pandora
