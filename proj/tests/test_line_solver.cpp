#include <gtest/gtest.h>

#include <functional>

#include "pandora/pandora.hpp"
#include "support/random_instances.hpp"
#include "support/reference.hpp"

using namespace pandora;
using pandora::builtin::coin;

namespace {

Rational R(std::int64_t n, std::int64_t d = 1) { return Rational(n) / d; }

LineInstance guard() { return line_of(builtin::guard_line()); }

LineInstance random_line(testkit::Generator& gen, std::size_t max_n, std::size_t max_support) {
  auto n = static_cast<std::size_t>(gen.integer(1, static_cast<std::int64_t>(max_n)));
  return {gen.boxes(n, max_support)};
}

/// Every value the running maximum can take plus a few points around them.
std::vector<Rational> probe_points(const ValueTable& t) {
  std::vector<Rational> xs(t.grid().begin(), t.grid().end());
  std::vector<Rational> extra;
  for (std::size_t k = 1; k < xs.size(); ++k) extra.push_back((xs[k - 1] + xs[k]) / 2);
  xs.insert(xs.end(), extra.begin(), extra.end());
  xs.push_back(xs.back() + 3);
  xs.push_back(R(-2));
  std::sort(xs.begin(), xs.end());
  return xs;
}

}  // namespace

TEST(SolveLine, GuardLine) {
  auto sol = solve_line(guard());
  EXPECT_EQ(sol.thresholds.z, (std::vector<Rational>{R(1), R(2)}));
  EXPECT_EQ(sol.table.phi(R(0), 1), R(1));
  EXPECT_EQ(sol.table.phi(R(3), 1), R(3));
  EXPECT_EQ(sol.table.value(), R(1));
}

TEST(SolveLine, SingleBoxIsWeitzman) {
  testkit::Generator gen(21);
  for (int trial = 0; trial < 100; ++trial) {
    auto b = gen.boxes(1, 4);
    EXPECT_EQ(solve_line({b}).thresholds.z[0], weitzman_reservation(b[0]));
  }
}

TEST(SolveLine, NegativeThresholdWhenCostExceedsMean) {
  LineInstance line{{{"a", R(2), DiscreteDistribution::point(R(1))}}};
  auto sol = solve_line(line);
  EXPECT_EQ(sol.thresholds.z[0], R(-1));
  EXPECT_EQ(sol.table.value(), R(0));
}

TEST(SolveLine, RejectsEmptyLine) { EXPECT_THROW(solve_line(LineInstance{}), ValidationError); }

TEST(ComputeThreshold, SpecExamples) {
  BoxSpec guard_box{"g", R(1), DiscreteDistribution::point(R(0))};
  LineInstance tail{{{"b", R(0), DiscreteDistribution::point(R(2))}}};
  EXPECT_EQ(compute_threshold(guard_box, tail), R(1));

  BoxSpec lone{"a", R(1), coin(R(3))};
  EXPECT_EQ(compute_threshold(lone, LineInstance{}), weitzman_reservation(lone));

  BoxSpec free_five{"f", R(0), DiscreteDistribution::point(R(5))};
  testkit::Generator gen(22);
  for (int trial = 0; trial < 50; ++trial) {
    auto boxes = gen.boxes(static_cast<std::size_t>(gen.integer(1, 4)), 3);
    for (auto& b : boxes) b.reward = round_down(b.reward, R(1));
    bool capped = true;
    for (const auto& b : boxes) capped = capped && b.reward.max_value() <= 5;
    if (!capped) continue;
    EXPECT_EQ(compute_threshold(free_five, LineInstance{boxes}), R(5));
  }
}

TEST(ComputeThreshold, EqualsPrependedSolve) {
  testkit::Generator gen(23);
  for (int trial = 0; trial < 200; ++trial) {
    auto line = random_line(gen, 5, 3);
    auto head = gen.boxes(1, 3)[0];
    head.id = "head";
    LineInstance full{{head}};
    full.boxes.insert(full.boxes.end(), line.boxes.begin(), line.boxes.end());
    EXPECT_EQ(compute_threshold(head, ValueTable(line)), solve_line(full).thresholds.z[0]);
  }
}

TEST(MacroPartition, SpecExamples) {
  EXPECT_EQ(macro_partition(std::vector{R(5), R(3), R(2)}).boundaries, (std::vector<std::size_t>{1, 2, 3}));
  EXPECT_EQ(macro_partition(std::vector{R(3), R(6), R(2)}).boundaries, (std::vector<std::size_t>{1, 3}));
  EXPECT_EQ(macro_partition(std::vector{R(4)}).boundaries, (std::vector<std::size_t>{1}));
}

TEST(DependenceHorizon, StrictInequality) {
  EXPECT_EQ(dependence_horizon(std::vector{R(3), R(3), R(2)}), (std::vector<std::size_t>{2, 2, 3}));
  EXPECT_EQ(dependence_horizon(std::vector{R(3), R(6), R(2)}), (std::vector<std::size_t>{2, 2, 3}));
  EXPECT_EQ(dependence_horizon(std::vector{R(1), R(2), R(3)}), (std::vector<std::size_t>{3, 3, 3}));
}

TEST(LineProperties, MonotoneAppend) {
  testkit::Generator gen(24);
  for (int trial = 0; trial < 300; ++trial) {
    auto line = random_line(gen, 5, 3);
    auto before = solve_line(line).thresholds.z;
    auto extra = gen.boxes(1, 3)[0];
    extra.id = "tail";
    line.boxes.push_back(extra);
    auto after = solve_line(line).thresholds.z;
    for (std::size_t i = 0; i < before.size(); ++i) EXPECT_GE(after[i], before[i]);
  }
}

TEST(LineProperties, PrefixDependence) {
  testkit::Generator gen(25);
  for (int trial = 0; trial < 300; ++trial) {
    auto line = random_line(gen, 6, 3);
    auto sol = solve_line(line);
    for (std::size_t i = 1; i <= line.boxes.size(); ++i) {
      auto d = sol.thresholds.d[i - 1];
      LineInstance part{{line.boxes.begin() + static_cast<std::ptrdiff_t>(i - 1),
                         line.boxes.begin() + static_cast<std::ptrdiff_t>(d)}};
      EXPECT_EQ(solve_line(part).thresholds.z[0], sol.thresholds.z[i - 1]);
      if (d == i) {
        EXPECT_EQ(sol.thresholds.z[i - 1], weitzman_reservation(line.boxes[i - 1]));
      }
    }
  }
}

TEST(LineProperties, FixedPointMinimalityAndLipschitz) {
  testkit::Generator gen(26);
  for (int trial = 0; trial < 300; ++trial) {
    auto line = random_line(gen, 6, 3);
    ValueTable t(line);
    auto xs = probe_points(t);
    for (std::size_t i = 1; i <= line.boxes.size(); ++i) {
      const auto& z = t.threshold(i);
      EXPECT_EQ(t.phi(z, i), z);
      for (const auto& x : xs) {
        if (x < z) {
          EXPECT_GT(t.phi(x, i), x);
        } else {
          EXPECT_EQ(t.phi(x, i), x);
        }
        if (x >= 0) {
          EXPECT_GE(t.phi(x, i), x);
        }
      }
      for (std::size_t k = 1; k < xs.size(); ++k) {
        auto rise = t.phi(xs[k], i) - t.phi(xs[k - 1], i);
        EXPECT_GE(rise, 0);
        EXPECT_LE(rise, xs[k] - xs[k - 1]);
      }
    }
    for (const auto& x : xs) EXPECT_EQ(t.phi(x, line.boxes.size() + 1), x);
  }
}

TEST(LineProperties, RecursionMatchesDefinition) {
  testkit::Generator gen(27);
  for (int trial = 0; trial < 100; ++trial) {
    auto line = random_line(gen, 5, 3);
    ValueTable t(line);
    for (const auto& x : probe_points(t))
      for (std::size_t i = 1; i <= line.boxes.size(); ++i) {
        const auto& b = line.boxes[i - 1];
        Rational cont = -b.cost;
        for (const auto& a : b.reward.atoms()) cont += a.prob * t.phi(std::max(x, a.value), i + 1);
        EXPECT_EQ(t.continuation(x, i), cont);
        EXPECT_EQ(t.phi(x, i), std::max(x, cont));
      }
  }
}

TEST(LineProperties, MatchesReferenceOptimum) {
  testkit::Generator gen(28);
  for (int trial = 0; trial < 150; ++trial) {
    auto n = static_cast<std::size_t>(gen.integer(1, 6));
    auto inst = gen.line(n, 3);
    EXPECT_EQ(solve_line(line_of(inst)).table.value(), testkit::reference_optimum(inst));
  }
}

// With z_i below every later threshold, the stopping time started from any
// y in [0, z_i] is the same on every realization path.
TEST(LineProperties, StoppingTimeIndependentOfStartBelowStrictMinimum) {
  testkit::Generator gen(29);
  int checked = 0;
  for (int trial = 0; trial < 300; ++trial) {
    auto line = random_line(gen, 5, 3);
    ValueTable t(line);
    const std::size_t n = line.boxes.size();
    for (std::size_t i = 1; i <= n; ++i) {
      bool strict_min = true;
      for (std::size_t j = i + 1; j <= n; ++j) strict_min = strict_min && t.threshold(i) < t.threshold(j);
      if (!strict_min || t.threshold(i) < 0) continue;
      std::vector<Rational> starts{R(0), t.threshold(i)};
      for (const auto& g : t.grid())
        if (g >= 0 && g <= t.threshold(i)) starts.push_back(g);
      auto stop_time = [&](Rational y, const std::vector<Rational>& path) {
        for (std::size_t j = i; j <= n; ++j) {
          if (!t.proceeds(y, j)) return j;
          y = std::max(y, path[j - i]);
        }
        return n + 1;
      };
      std::function<void(std::size_t, std::vector<Rational>&)> walk = [&](std::size_t j,
                                                                          std::vector<Rational>& path) {
        if (j > n) {
          auto ref = stop_time(starts[0], path);
          for (const auto& y : starts) EXPECT_EQ(stop_time(y, path), ref);
          ++checked;
          return;
        }
        for (const auto& a : line.boxes[j - 1].reward.atoms()) {
          path.push_back(a.value);
          walk(j + 1, path);
          path.pop_back();
        }
      };
      std::vector<Rational> path;
      walk(i, path);
    }
  }
  EXPECT_GT(checked, 0);
}

namespace {

/// Net revenue of the optimal rule run on boxes [1, limit) of a realization.
Rational truncated_revenue(const LineInstance& line, const ValueTable& t, const std::vector<Rational>& xs,
                           std::size_t limit) {
  Rational best = 0, spent = 0;
  for (std::size_t j = 1; j < limit; ++j) {
    if (!t.proceeds(best, j)) break;
    spent += line.boxes[j - 1].cost;
    best = std::max(best, xs[j - 1]);
  }
  return best - spent;
}

/// E[M_{k+1} | boxes before j_k] >= M_k for every history, by enumeration.
void check_submartingale(const LineInstance& line) {
  ValueTable t(line);
  auto bounds = macro_partition(t.thresholds()).boundaries;
  bounds.push_back(line.boxes.size() + 1);
  for (std::size_t k = 0; k + 1 < bounds.size(); ++k) {
    const std::size_t here = bounds[k], next = bounds[k + 1];
    std::vector<Rational> xs;
    std::function<void(std::size_t)> history = [&](std::size_t j) {
      if (j == here) {
        Rational m_k = truncated_revenue(line, t, xs, here);
        Rational expected = 0;
        std::function<void(std::size_t, Rational)> future = [&](std::size_t u, Rational p) {
          if (u == next) {
            expected += p * truncated_revenue(line, t, xs, next);
            return;
          }
          for (const auto& a : line.boxes[u - 1].reward.atoms()) {
            xs.push_back(a.value);
            future(u + 1, p * a.prob);
            xs.pop_back();
          }
        };
        future(here, R(1));
        EXPECT_GE(expected, m_k);
        return;
      }
      for (const auto& a : line.boxes[j - 1].reward.atoms()) {
        xs.push_back(a.value);
        history(j + 1);
        xs.pop_back();
      }
    };
    history(1);
  }
}

}  // namespace

TEST(LineProperties, SubmartingaleOverMacroBoxes) {
  testkit::Generator gen(30);
  for (int trial = 0; trial < 150; ++trial) check_submartingale(random_line(gen, 6, 3));
  check_submartingale(guard());
}
