#pragma once

/// Learn-then-solve from samples: round each reward down to a grid of step
/// epsilon, estimate the rounded distributions empirically, solve the
/// empirical instance and measure the policy on the true instance.

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "pandora/error.hpp"
#include "pandora/instance.hpp"
#include "pandora/rational.hpp"
#include "pandora/rng.hpp"
#include "pandora/strategy.hpp"
#include "pandora/tree_solver.hpp"

namespace pandora {

enum class SampleMode { general, tree };

struct LearningConfig {
  Rational epsilon;
  Rational delta;
  std::uint64_t samples_per_box = 0;
  Rational grid_step;  // defaults to epsilon when zero

  static LearningConfig make(Rational epsilon, Rational delta, std::uint64_t samples_per_box) {
    LearningConfig c{epsilon, std::move(delta), samples_per_box, epsilon};
    c.validate();
    return c;
  }

  const Rational& step() const { return grid_step == 0 ? epsilon : grid_step; }

  void validate() const {
    if (!(epsilon > 0 && epsilon < 1)) throw ValidationError("epsilon must lie in (0, 1)");
    if (!(delta > 0 && delta < 1)) throw ValidationError("delta must lie in (0, 1)");
    if (samples_per_box == 0) throw ValidationError("need at least one sample per box");
    const auto& s = step();
    if (s <= 0) throw ValidationError("grid step must be positive");
    Rational q = Rational(1) / s;
    if (boost::multiprecision::denominator(q) != 1) throw ValidationError("grid step must divide 1 exactly");
  }
};

/// Samples sufficient for an additive-epsilon policy with probability
/// 1 - delta, natural logs, constant = `constant` (1 by default):
///   general: C n^3 / eps^3 log(n / (eps delta))
///   tree:    C n / eps^2 log^2(1/eps) log(n/eps) log(n / (eps delta))
inline std::uint64_t sample_bound(std::uint64_t n, double epsilon, double delta, SampleMode mode,
                                  double constant = 1.0) {
  if (n == 0) throw ValidationError("sample_bound needs n >= 1");
  if (!(epsilon > 0 && epsilon < 1) || !(delta > 0 && delta < 1))
    throw ValidationError("epsilon and delta must lie in (0, 1)");
  const double nn = static_cast<double>(n);
  double v = 0;
  if (mode == SampleMode::general) {
    v = constant * nn * nn * nn / (epsilon * epsilon * epsilon) * std::log(nn / (epsilon * delta));
  } else {
    double l = std::log(1.0 / epsilon);
    v = constant * nn / (epsilon * epsilon) * l * l * std::log(nn / epsilon) * std::log(nn / (epsilon * delta));
  }
  return static_cast<std::uint64_t>(std::ceil(v));
}

struct EmpiricalModel {
  std::vector<DiscreteDistribution> rewards;  // by box index, atoms on grid multiples
  std::vector<std::vector<std::uint64_t>> counts;
  std::uint64_t samples_per_box = 0;
};

inline void require_learning_regime(const Instance& inst) {
  for (const auto& b : inst.boxes()) {
    if (b.reward.min_value() < 0 || b.reward.max_value() > 1)
      throw ValidationError("box '" + b.id + "' has rewards outside [0, 1]");
    if (b.cost < 0 || b.cost > 1) throw ValidationError("box '" + b.id + "' has cost outside [0, 1]");
  }
}

/// Distribution of X rounded down to multiples of `step`.
inline DiscreteDistribution round_down(const DiscreteDistribution& dist, const Rational& step) {
  std::vector<Atom> atoms;
  for (const auto& a : dist.atoms()) atoms.push_back({floor_to_multiple(a.value, step), a.prob});
  return DiscreteDistribution::from_atoms(std::move(atoms));
}

/// N draws per box, each from a stream derived from (seed, box index).
inline EmpiricalModel learn_model(const Instance& inst, const LearningConfig& config, std::uint64_t seed) {
  config.validate();
  require_learning_regime(inst);
  EmpiricalModel model;
  model.samples_per_box = config.samples_per_box;
  for (std::size_t i = 0; i < inst.size(); ++i) {
    auto rounded = round_down(inst.box(i).reward, config.step());
    AtomSampler sampler(rounded);
    auto rng = CounterRng::derived(seed, i);
    std::vector<std::uint64_t> counts(rounded.size(), 0);
    for (std::uint64_t t = 0; t < config.samples_per_box; ++t) ++counts[sampler(rng)];
    std::vector<Atom> atoms;
    for (std::size_t k = 0; k < counts.size(); ++k)
      if (counts[k] > 0)
        atoms.push_back({rounded.atoms()[k].value, make_rational(Integer(counts[k]), Integer(config.samples_per_box))});
    model.rewards.push_back(DiscreteDistribution::from_atoms(std::move(atoms)));
    model.counts.push_back(std::move(counts));
  }
  return model;
}

struct LearningReport {
  Rational true_opt;
  Rational learned_policy_value;
  Rational gap;
  Rational epsilon;
  std::uint64_t samples = 0;
};

/// Key-value block: true_opt=, learned_policy_value=, gap=, epsilon=, N=.
inline std::string to_key_value(const LearningReport& r) {
  return "true_opt=" + to_string(r.true_opt) + "\nlearned_policy_value=" + to_string(r.learned_policy_value) +
         "\ngap=" + to_string(r.gap) + "\nepsilon=" + to_string(r.epsilon) + "\nN=" + std::to_string(r.samples) +
         "\n";
}

struct LearnedPolicy {
  ThresholdPolicy policy;
  TreeSolution empirical_solution;
  EmpiricalModel model;
  LearningReport report;
};

inline LearnedPolicy learn_and_solve(const Instance& inst, const LearningConfig& config, std::uint64_t seed) {
  auto model = learn_model(inst, config, seed);
  auto empirical = inst.with_rewards(model.rewards);
  auto learned = solve_tree(empirical);
  auto policy = ThresholdPolicy::from_tree(learned);

  LearningReport report;
  report.true_opt = solve_tree(inst).value;
  report.learned_policy_value = evaluate_threshold_exact(inst, policy);
  report.gap = report.true_opt - report.learned_policy_value;
  report.epsilon = config.epsilon;
  report.samples = config.samples_per_box;
  return {std::move(policy), std::move(learned), std::move(model), std::move(report)};
}

}  // namespace pandora
