#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>

#include "pandora/pandora.hpp"
#include "support/random_instances.hpp"

using namespace pandora;

namespace {

Rational R(std::int64_t n, std::int64_t d = 1) { return Rational(n) / d; }

int failures = 0;

void report(int id, const std::string& name, bool pass, const std::string& detail) {
  std::cout << "criterion " << id << " " << (pass ? "PASS" : "FAIL") << " " << name << ": " << detail << "\n"
            << std::flush;
  if (!pass) ++failures;
}

void info(const std::string& text) { std::cout << "info " << text << "\n" << std::flush; }

// 1. Tree solver value equals the exact oracle on lines, path forests and trees.
void oracle_equivalence() {
  testkit::Generator gen(1001);
  int checked = 0, bad = 0;
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<Instance> insts{gen.line(static_cast<std::size_t>(gen.integer(1, 8)), 3),
                                gen.path_forest(static_cast<std::size_t>(gen.integer(1, 9)),
                                                static_cast<std::size_t>(gen.integer(1, 3)), 3),
                                gen.tree(static_cast<std::size_t>(gen.integer(1, 9)), 3)};
    if (solve_line(line_of(insts[0])).table.value() != solve_exact(insts[0]).value) ++bad;
    for (const auto& inst : insts) {
      auto sol = solve_tree(inst);
      bool ok = sol.value == solve_exact(inst).value &&
                evaluate_threshold_exact(inst, ThresholdPolicy::from_tree(sol)) == sol.value;
      ++checked;
      if (!ok) ++bad;
    }
  }
  report(1, "tree solver matches exact oracle", bad == 0,
         std::to_string(checked - bad) + "/" + std::to_string(checked) + " instances (200 lines, 200 path forests, 200 trees)");
}

// 2. A star with a zero root reduces to the unconstrained reservation rule.
void weitzman_star() {
  testkit::Generator gen(1002);
  int bad = 0;
  const int trials = 200;
  for (int trial = 0; trial < trials; ++trial) {
    auto leaves = gen.boxes(static_cast<std::size_t>(gen.integer(1, 8)), 3);
    auto inst = builtin::weitzman_star(leaves);
    auto sol = solve_tree(inst);
    bool ok = sol.order.entries.front().id == "root";
    for (const auto& b : leaves) ok = ok && sol.threshold_of(inst, b.id) == weitzman_reservation(b);
    for (std::size_t j = 2; j < sol.order.size(); ++j)
      ok = ok && sol.order.entries[j - 1].threshold >= sol.order.entries[j].threshold;
    auto flat = Instance::create(leaves, {ConstraintKind::unconstrained, {}, {}});
    ok = ok && sol.value == solve_exact(flat).value;
    if (!ok) ++bad;
  }
  report(2, "star recovers reservation values and order", bad == 0,
         std::to_string(trials - bad) + "/" + std::to_string(trials) + " stars");
}

// 3. The order after A depends on X_A and every fixed order loses value.
void figure_one() {
  bool pass = true;
  std::ostringstream detail;
  for (auto eps : {R(13, 10), R(3, 2), R(19, 10)}) {
    auto inst = builtin::figure1(eps);
    auto c = builtin::check_figure1(inst);
    bool ok = c.opens_a_first && c.adaptive_order() && c.fixed_order_suboptimal();
    pass = pass && ok;
    detail << "eps=" << to_string(eps) << " opt=" << to_string(c.oracle_value)
           << " fixed=" << to_string(c.fixed_order_value) << " after_high=" << inst.box(c.second_if_high).id
           << " after_low=" << inst.box(c.second_if_low).id << "; ";
  }
  detail << "with c_C = 1 - eps/2 <= 3/8 the second box is C on both branches";
  report(3, "optimal DAG policy is adaptive in order", pass, detail.str());

  auto boxes = builtin::figure1_boxes(R(3, 2));
  boxes[2].cost = R(17, 16);
  auto variant =
      Instance::create(boxes, {ConstraintKind::dag, {{"A", "B"}, {"A", "C"}, {"B", "D"}, {"C", "D"}}, {"A"}});
  auto v = builtin::check_figure1(variant);
  info("figure1 variant c_C=17/16: opt=" + to_string(v.oracle_value) + " fixed=" + to_string(v.fixed_order_value) +
       " after_high=" + variant.box(v.second_if_high).id + " after_low=" + variant.box(v.second_if_low).id +
       " adaptive_order=" + (v.adaptive_order() ? "true" : "false") +
       " fixed_order_suboptimal=" + (v.fixed_order_suboptimal() ? "true" : "false"));
}

// 4. Line value-function invariants.
bool line_invariants(testkit::Generator& gen) {
  auto n = static_cast<std::size_t>(gen.integer(1, 6));
  LineInstance line{gen.boxes(n, 3)};
  ValueTable t(line);
  auto sol = solve_line(line);
  bool ok = true;

  std::vector<Rational> xs(t.grid().begin(), t.grid().end());
  for (std::size_t k = 1, m = xs.size(); k < m; ++k) xs.push_back((xs[k - 1] + xs[k]) / 2);
  xs.push_back(R(-1));
  std::sort(xs.begin(), xs.end());

  for (std::size_t i = 1; i <= n; ++i) {
    const auto& z = t.threshold(i);
    ok = ok && t.phi(z, i) == z;
    for (const auto& x : xs) {
      ok = ok && (x < z ? t.phi(x, i) > x : t.phi(x, i) == x);
      if (x >= 0) ok = ok && t.phi(x, i) >= x;
    }
    for (std::size_t k = 1; k < xs.size(); ++k) {
      auto rise = t.phi(xs[k], i) - t.phi(xs[k - 1], i);
      ok = ok && rise >= 0 && rise <= xs[k] - xs[k - 1];
    }
    auto d = sol.thresholds.d[i - 1];
    LineInstance part{{line.boxes.begin() + static_cast<std::ptrdiff_t>(i - 1),
                       line.boxes.begin() + static_cast<std::ptrdiff_t>(d)}};
    ok = ok && solve_line(part).thresholds.z[0] == z;
  }

  auto longer = line;
  auto extra = gen.boxes(1, 3)[0];
  extra.id = "tail";
  longer.boxes.push_back(extra);
  auto after = solve_line(longer).thresholds.z;
  for (std::size_t i = 0; i < n; ++i) ok = ok && after[i] >= sol.thresholds.z[i];

  // Submartingale over macro-boxes, by enumeration of realizations.
  auto revenue = [&](const std::vector<Rational>& draws, std::size_t limit) {
    Rational best = 0, spent = 0;
    for (std::size_t j = 1; j < limit; ++j) {
      if (!t.proceeds(best, j)) break;
      spent += line.boxes[j - 1].cost;
      best = std::max(best, draws[j - 1]);
    }
    return best - spent;
  };
  auto bounds = macro_partition(t.thresholds()).boundaries;
  bounds.push_back(n + 1);
  for (std::size_t k = 0; k + 1 < bounds.size(); ++k) {
    const std::size_t here = bounds[k], next = bounds[k + 1];
    std::vector<Rational> draws;
    std::function<void(std::size_t)> history = [&](std::size_t j) {
      if (j == here) {
        Rational expected = 0;
        std::function<void(std::size_t, Rational)> future = [&](std::size_t u, Rational p) {
          if (u == next) {
            expected += p * revenue(draws, next);
            return;
          }
          for (const auto& a : line.boxes[u - 1].reward.atoms()) {
            draws.push_back(a.value);
            future(u + 1, p * a.prob);
            draws.pop_back();
          }
        };
        future(here, R(1));
        ok = ok && expected >= revenue(draws, here);
        return;
      }
      for (const auto& a : line.boxes[j - 1].reward.atoms()) {
        draws.push_back(a.value);
        history(j + 1);
        draws.pop_back();
      }
    };
    history(1);
  }
  return ok;
}

void claim_four() {
  testkit::Generator gen(1004);
  const int trials = 500;
  int bad = 0;
  for (int trial = 0; trial < trials; ++trial)
    if (!line_invariants(gen)) ++bad;
  report(4, "line thresholds: fixed point, Lipschitz, prefix dependence, monotone append, submartingale", bad == 0,
         std::to_string(trials - bad) + "/" + std::to_string(trials) + " lines");
}

// 5. The approximate policy's start value dominates every feasible fixed set.
void dominance() {
  testkit::Generator gen(1005);
  const int trials = 100;
  int bad = 0;
  Rational worst = 0;
  bool first = true;
  for (int trial = 0; trial < trials; ++trial) {
    auto base = gen.tree(static_cast<std::size_t>(gen.integer(4, 12)), 2);
    auto inst = base.with_side(gen.knapsack(base));
    auto r = verify_guarantee(inst, solve_approx(inst));
    if (r.set_margin < 0) ++bad;
    if (first || r.set_margin < worst) worst = r.set_margin;
    first = false;
  }
  report(5, "approx value dominates every feasible set", bad == 0,
         std::to_string(trials - bad) + "/" + std::to_string(trials) + " tree+knapsack instances, min margin " +
             to_string(worst));
}

// 6. Realized value of the approximate policy is at least half the benchmark.
void half_guarantee() {
  testkit::Generator gen(1006);
  const int trials = 100;
  int bad = 0;
  for (int trial = 0; trial < trials; ++trial) {
    auto base = gen.tree(static_cast<std::size_t>(gen.integer(2, 10)), 2);
    auto inst = base.with_side(gen.knapsack(base));
    auto pol = solve_approx(inst);
    auto r = verify_guarantee(inst, pol);
    bool ok = r.guarantee_margin && *r.guarantee_margin >= 0 && evaluate_approx_exact(inst, pol) == r.start_value;
    if (!ok) ++bad;
  }
  int frontier_bad = 0;
  const int small = 50;
  for (int trial = 0; trial < small; ++trial) {
    auto base = gen.tree(static_cast<std::size_t>(gen.integer(1, 4)), 3);
    auto inst = base.with_side(gen.knapsack(base));
    auto value = evaluate_approx_exact(inst, solve_approx(inst));
    for (const auto& p : policy_outcome_frontier(inst))
      if (value < p.e_max / 2 - p.e_cost) {
        ++frontier_bad;
        break;
      }
  }
  report(6, "approx policy earns at least E[max]/2 - E[cost] of every policy", bad == 0 && frontier_bad == 0,
         std::to_string(trials - bad) + "/" + std::to_string(trials) + " against the exact sup, " +
             std::to_string(small - frontier_bad) + "/" + std::to_string(small) + " against the full frontier (n<=4)");
}

// 7. Adaptivity gap family.
void adaptivity_gap() {
  bool pass = true;
  std::ostringstream detail;
  for (auto p : {R(1, 5), R(1, 10)}) {
    auto n = builtin::adaptivity_gap_default_n(p);
    auto c = builtin::check_adaptivity_gap(p, n);
    double pd = to_double(p);
    bool ok = to_double(c.adaptive_value) >= 0.99 / (2 * pd) && c.best_fixed_set_value <= R(1, 2) &&
              c.ratio >= 0.9 / pd;
    pass = pass && ok;
    detail << "p=" << to_string(p) << " n=" << n << " adaptive=" << format_double(to_double(c.adaptive_value))
           << " best_fixed=" << format_double(to_double(c.best_fixed_set_value)) << " (k=" << c.best_k
           << ") ratio=" << format_double(c.ratio) << "; ";
  }
  report(7, "adaptivity gap grows like 1/p", pass, detail.str());
}

// 8. Learned policies are within epsilon with frequency at least 1 - delta.
void learning() {
  testkit::Generator gen(1008);
  const auto eps = R(1, 10), delta = R(1, 10);
  const auto samples = sample_bound(5, 0.1, 0.1, SampleMode::tree);
  const int trials = 100;
  int misses = 0;
  Rational worst = 0;
  for (int trial = 0; trial < trials; ++trial) {
    auto inst = gen.tree_from(gen.unit_boxes(5, 3));
    auto learned = learn_and_solve(inst, LearningConfig::make(eps, delta, samples), static_cast<std::uint64_t>(trial));
    if (learned.report.gap > eps) ++misses;
    worst = std::max(worst, learned.report.gap);
  }
  report(8, "learned policy within epsilon", misses <= 15,
         std::to_string(misses) + "/" + std::to_string(trials) + " trials with gap > 1/10 (allowed 15), N=" +
             std::to_string(samples) + ", max gap " + format_double(to_double(worst)));
}

// 9. Monte Carlo estimates agree with exact values.
void calibration() {
  testkit::Generator gen(1009);
  const int pairs = 100;
  const std::uint64_t trials = 10000;
  int within = 0;
  for (int k = 0; k < pairs; ++k) {
    auto inst = gen.tree(static_cast<std::size_t>(gen.integer(2, 8)), 3);
    auto policy = ThresholdPolicy::from_tree(solve_tree(inst));
    auto exact = to_double(evaluate_threshold_exact(inst, policy));
    auto s = simulate(inst, policy, trials, static_cast<std::uint64_t>(k));
    if (std::abs(s.mean - exact) <= 4 * s.stddev / std::sqrt(static_cast<double>(trials)) + 1e-9) ++within;
  }
  report(9, "simulation within 4 standard errors of exact value", within >= 95,
         std::to_string(within) + "/" + std::to_string(pairs) + " pairs at 10000 trials");
}

// 10. CLI output is byte-identical across runs.
std::pair<int, std::string> run_cli(const std::string& args) {
  std::string cmd = std::string(PANDORA_CLI) + " " + args + " 2>/dev/null";
  std::string out;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return {-1, out};
  char buf[4096];
  std::size_t got = 0;
  while ((got = fread(buf, 1, sizeof buf, pipe)) > 0) out.append(buf, got);
  int status = pclose(pipe);
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

void cli_determinism() {
  testkit::Generator gen(1010);
  auto tree = gen.tree(7, 3);
  auto capped = gen.tree(7, 3);
  capped = capped.with_side(gen.knapsack(capped));
  auto unit = gen.tree_from(gen.unit_boxes(6, 3));
  auto dir = std::filesystem::temp_directory_path();
  auto unit_path = (dir / "pandora_acceptance_unit.json").string();
  std::ofstream(unit_path) << dump_instance(unit);
  auto tree_path = (dir / "pandora_acceptance_tree.json").string();
  auto capped_path = (dir / "pandora_acceptance_capped.json").string();
  std::ofstream(tree_path) << dump_instance(tree);
  std::ofstream(capped_path) << dump_instance(capped);

  const std::vector<std::string> commands = {
      "solve --input " + tree_path,
      "solve --json --input " + tree_path,
      "evaluate --input " + tree_path + " --set b00,b01",
      "simulate --input " + tree_path + " --seed 11 --trials 5000",
      "oracle --input " + capped_path,
      "approx --input " + capped_path + " --seed 3",
      "learn --input " + unit_path + " --seed 5 --samples 2000",
      "example figure1 --json",
      "example adaptivity-gap --p 1/5",
  };
  int same = 0;
  std::string broken;
  for (const auto& c : commands) {
    auto a = run_cli(c);
    auto b = run_cli(c);
    if (a.first == 0 && !a.second.empty() && a == b)
      ++same;
    else
      broken += "; failed: " + c.substr(0, c.find(' ')) + " (exit " + std::to_string(a.first) + ")";
  }
  std::filesystem::remove(tree_path);
  std::filesystem::remove(capped_path);
  std::filesystem::remove(unit_path);
  report(10, "CLI output byte-identical across runs", same == static_cast<int>(commands.size()),
         std::to_string(same) + "/" + std::to_string(commands.size()) + " commands" + broken);
}

void runtime_scaling() {
  testkit::Generator gen(1011);
  std::ostringstream line;
  line << "solve_tree runtime (support 3):";
  double first_ms = 0, last_ms = 0;
  for (std::size_t n : {25u, 50u, 100u, 200u}) {
    auto inst = gen.tree(n, 3);
    auto start = std::chrono::steady_clock::now();
    auto sol = solve_tree(inst);
    auto ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    if (n == 25) first_ms = ms;
    last_ms = ms;
    line << " n=" << n << " " << format_double(std::round(ms * 10) / 10) << "ms";
    (void)sol;
  }
  line << "; log-log slope 25->200 = " << format_double(std::round(std::log(last_ms / first_ms) / std::log(8.0) * 100) / 100);
  info(line.str());
}

}  // namespace

int main() {
  oracle_equivalence();
  weitzman_star();
  figure_one();
  claim_four();
  dominance();
  half_guarantee();
  adaptivity_gap();
  learning();
  calibration();
  cli_determinism();
  runtime_scaling();
  std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed") << "\n";
  return failures == 0 ? 0 : 1;
}
