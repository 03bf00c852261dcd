#pragma once

#include <algorithm>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "pandora/error.hpp"
#include "pandora/rational.hpp"

namespace pandora {

struct Atom {
  Rational value;
  Rational prob;

  friend bool operator==(const Atom&, const Atom&) = default;
};

/// Finite-support reward distribution with exact probabilities.
///
/// Atoms are kept strictly increasing by value, every probability is
/// positive and the probabilities sum to exactly one.
class DiscreteDistribution {
 public:
  DiscreteDistribution() : atoms_{{Rational(0), Rational(1)}} {}

  /// Builds a validated distribution. Atoms may arrive in any order and
  /// repeated values are merged; zero-probability atoms are rejected.
  static DiscreteDistribution from_atoms(std::vector<Atom> atoms) {
    if (atoms.empty()) throw ValidationError("distribution has empty support");
    std::sort(atoms.begin(), atoms.end(),
              [](const Atom& a, const Atom& b) { return a.value < b.value; });
    std::vector<Atom> merged;
    Rational total = 0;
    for (auto& a : atoms) {
      if (a.prob <= 0)
        throw ValidationError("atom at value " + to_string(a.value) + " has non-positive probability " +
                              to_string(a.prob));
      total += a.prob;
      if (!merged.empty() && merged.back().value == a.value)
        merged.back().prob += a.prob;
      else
        merged.push_back(std::move(a));
    }
    if (total != 1) throw ValidationError("probabilities sum to " + to_string(total) + ", expected 1");
    DiscreteDistribution d;
    d.atoms_ = std::move(merged);
    return d;
  }

  static DiscreteDistribution point(Rational value) {
    return from_atoms({{std::move(value), Rational(1)}});
  }

  std::span<const Atom> atoms() const { return atoms_; }
  std::size_t size() const { return atoms_.size(); }
  const Rational& min_value() const { return atoms_.front().value; }
  const Rational& max_value() const { return atoms_.back().value; }

  Rational mean() const {
    Rational m = 0;
    for (const auto& a : atoms_) m += a.value * a.prob;
    return m;
  }

  /// P[X <= x].
  Rational cdf(const Rational& x) const {
    Rational c = 0;
    for (const auto& a : atoms_) {
      if (a.value > x) break;
      c += a.prob;
    }
    return c;
  }

  friend bool operator==(const DiscreteDistribution&, const DiscreteDistribution&) = default;

 private:
  std::vector<Atom> atoms_;
};

/// E[(X - z)_+], exact.
inline Rational expected_excess(const DiscreteDistribution& dist, const Rational& z) {
  Rational e = 0;
  for (const auto& a : dist.atoms())
    if (a.value > z) e += a.prob * (a.value - z);
  return e;
}

/// Smallest z with E[(X - z)_+] = cost. Negative when cost > E[X].
///
/// The excess is piecewise linear and nonincreasing with breakpoints at the
/// support values, so the crossing segment is located by a downward sweep
/// and the linear piece inverted.
inline Rational reservation_value(const DiscreteDistribution& dist, const Rational& cost) {
  if (cost < 0) throw ValidationError("reservation value undefined for negative cost " + to_string(cost));
  auto atoms = dist.atoms();
  if (cost == 0) return dist.max_value();

  // Sweep down: excess at atoms[k] is sum_{j>k} p_j (v_j - v_k).
  Rational tail_prob = 0;  // sum of probabilities strictly above atoms[k]
  Rational excess = 0;     // excess at atoms[k]
  for (std::size_t k = atoms.size(); k-- > 0;) {
    if (k + 1 < atoms.size()) {
      tail_prob += atoms[k + 1].prob;
      excess += tail_prob * (atoms[k + 1].value - atoms[k].value);
    }
    if (excess >= cost) return atoms[k].value + (excess - cost) / tail_prob;
  }
  // Below the minimum support value the excess is E[X] - z.
  return atoms.front().value - (cost - excess);
}

/// Distribution of max_i X_i for independent X_i.
inline DiscreteDistribution max_distribution(std::span<const DiscreteDistribution> dists) {
  if (dists.empty()) throw ValidationError("max_distribution needs at least one distribution");
  std::vector<Rational> values;
  for (const auto& d : dists)
    for (const auto& a : d.atoms()) values.push_back(a.value);
  std::sort(values.begin(), values.end());
  values.erase(std::unique(values.begin(), values.end()), values.end());

  // P[max <= v] = prod_i P[X_i <= v]; differences give the atoms.
  std::vector<Atom> atoms;
  Rational previous = 0;
  std::vector<std::size_t> cursor(dists.size(), 0);
  std::vector<Rational> cdf(dists.size(), Rational(0));
  for (const auto& v : values) {
    Rational joint = 1;
    for (std::size_t i = 0; i < dists.size(); ++i) {
      auto atoms_i = dists[i].atoms();
      while (cursor[i] < atoms_i.size() && atoms_i[cursor[i]].value <= v) cdf[i] += atoms_i[cursor[i]++].prob;
      joint *= cdf[i];
    }
    if (joint > previous) atoms.push_back({v, joint - previous});
    previous = joint;
  }
  return DiscreteDistribution::from_atoms(std::move(atoms));
}

/// E[max(y, X)], the expected running maximum after one more draw.
inline Rational expected_max_with(const DiscreteDistribution& dist, const Rational& y) {
  return y + expected_excess(dist, y);
}

}  // namespace pandora
