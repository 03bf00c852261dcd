#pragma once

#include <cstdint>
#include <vector>

#include "pandora/distribution.hpp"
#include "pandora/rational.hpp"

namespace pandora {

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Counter-based generator: the k-th output is a pure function of
/// (key, k), so streams are reproducible on every platform.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t key) : key_(key) {}

  /// Independent stream for sub-task `index` of a run seeded with `seed`.
  static CounterRng derived(std::uint64_t seed, std::uint64_t index) {
    return CounterRng(mix64(seed ^ mix64(index + 0x632BE59BD9B4E019ULL)));
  }

  std::uint64_t next() { return mix64(key_ + 0xD1B54A32D192ED03ULL * ++counter_); }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

/// Inverse-CDF sampler over the sorted atoms. Cumulative probabilities are
/// converted once to exact 64-bit cut points, so sampling is pure integer
/// comparison.
class AtomSampler {
 public:
  explicit AtomSampler(const DiscreteDistribution& dist) {
    const Integer two64 = Integer(1) << 64;
    Rational cum = 0;
    auto atoms = dist.atoms();
    for (std::size_t k = 0; k + 1 < atoms.size(); ++k) {
      cum += atoms[k].prob;
      Rational scaled = cum * Rational(two64);
      Integer cut = boost::multiprecision::numerator(scaled) / boost::multiprecision::denominator(scaled);
      cuts_.push_back(cut >= two64 ? ~std::uint64_t{0} : cut.convert_to<std::uint64_t>());
    }
  }

  /// Index of the sampled atom.
  std::size_t operator()(CounterRng& rng) const {
    std::uint64_t u = rng.next();
    std::size_t k = 0;
    while (k < cuts_.size() && u >= cuts_[k]) ++k;
    return k;
  }

 private:
  std::vector<std::uint64_t> cuts_;
};

}  // namespace pandora
