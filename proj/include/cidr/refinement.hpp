#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <iterator>
#include <map>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "cidr/attribution.hpp"
#include "cidr/classifier.hpp"
#include "cidr/error.hpp"
#include "cidr/knapsack.hpp"
#include "cidr/toy_model.hpp"

namespace cidr {

struct CidrConfig {
  double beta = kDefaultBeta;
  double t = 0.5;        // feature-essence probability threshold
  double epsilon = 0.5;  // minimum candidate frequency for a pair to be retained
  std::size_t n_iter = 10;
  std::size_t m = kDefaultIgSteps;
  int q = knapsack::kDefaultDigits;
  std::uint64_t seed = 42;

  void validate() const {
    check_beta(beta);
    if (!(t > 0.0 && t < 1.0)) throw ConfigError("t must lie in (0, 1)");
    if (!(epsilon > 0.0 && epsilon <= 1.0)) throw ConfigError("epsilon must lie in (0, 1]");
    if (n_iter == 0) throw ConfigError("n_iter must be at least 1");
    if (m == 0) throw ConfigError("m must be at least 1");
    if (q < 0) throw ConfigError("q must be non-negative");
  }
};

// ---------------------------------------------------------------------------
// Upper bounds on the CIG mass that may be excluded from the feature set.

/// 2 (|S_pos| - 1) * sum of positive IG.
inline double upper_bound_u1(const AttributionSet& ig) {
  if (ig.positive.size() <= 1) return 0.0;
  return 2.0 * static_cast<double>(ig.positive.size() - 1) * ig.positive_sum();
}

/// beta * sum over positive pairs of both leave-one-out terms.
inline double upper_bound_u2(const PairScoreMap& pairs) {
  double s = 0.0;
  for (const TokenPair& p : pairs.positive) {
    const PairScore& r = pairs.at(p);
    s += r.loo_first + r.loo_second;
  }
  return pairs.beta * s;
}

struct PerturbationMap {
  std::vector<TokenPair> pairs;  // sorted
  std::vector<double> values;    // values[k] belongs to pairs[k], each in (0, 1)
  std::uint64_t seed = 0;
  std::size_t iteration = 0;

  double at(TokenPair p) const {
    auto it = std::lower_bound(pairs.begin(), pairs.end(), p);
    if (it == pairs.end() || *it != p) {
      throw InternalError("perturbation map has no entry for pair (" + std::to_string(p.first) + ", " +
                          std::to_string(p.second) + ")");
    }
    return values[static_cast<std::size_t>(it - pairs.begin())];
  }
};

/// beta * sum over positive pairs of v * (both leave-one-out terms).
inline double perturbed_upper_bound(const PairScoreMap& pairs, const PerturbationMap& v) {
  double s = 0.0;
  for (const TokenPair& p : pairs.positive) {
    const PairScore& r = pairs.at(p);
    s += v.at(p) * (r.loo_first + r.loo_second);
  }
  return pairs.beta * s;
}

namespace detail {

inline std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Uniform in (0, 1) from the top 53 bits.
inline double open_unit(std::uint64_t bits) { return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53; }

inline double standard_normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

}  // namespace detail

/// One standard Gaussian draw per pair, keyed by (seed, iteration, pair) so
/// the value does not depend on which other pairs are present, then mapped
/// into (0, 1) through the Gaussian CDF.
inline PerturbationMap sample_perturbations(std::vector<TokenPair> pairs, std::uint64_t seed, std::size_t iteration) {
  std::sort(pairs.begin(), pairs.end());
  pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());
  PerturbationMap map;
  map.seed = seed;
  map.iteration = iteration;
  map.values.reserve(pairs.size());
  const double lo = std::numeric_limits<double>::min();
  const double hi = std::nextafter(1.0, 0.0);
  for (const TokenPair& p : pairs) {
    std::uint64_t h = detail::splitmix(seed);
    h = detail::splitmix(h ^ static_cast<std::uint64_t>(iteration));
    h = detail::splitmix(h ^ static_cast<std::uint64_t>(p.first));
    h = detail::splitmix(h ^ static_cast<std::uint64_t>(p.second));
    const double u1 = detail::open_unit(h);
    const double u2 = detail::open_unit(detail::splitmix(h ^ 0x5851f42d4c957f2dULL));
    const double z = std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    map.values.push_back(std::clamp(detail::standard_normal_cdf(z), lo, hi));
  }
  map.pairs = std::move(pairs);
  return map;
}

// ---------------------------------------------------------------------------
// Refinement.

struct Bounds {
  double u1 = 0.0;
  double u2 = 0.0;
};

/// One knapsack solve. `excluded` are the knapsack-selected pairs; the
/// candidate feature set is the positive pairs minus those.
struct IterationRecord {
  std::size_t iteration = 0;
  double u2_perturbed = 0.0;
  double capacity = 0.0;
  std::vector<TokenPair> excluded;
  double excluded_cig = 0.0;
  std::vector<TokenPair> candidate;
};

struct RetainedPair {
  TokenPair pair;
  double frequency = 0.0;               // f / n_c
  std::vector<std::size_t> iterations;  // iterations whose candidate contained the pair
};

struct MinimalFeatureSet {
  std::vector<RetainedPair> pairs;  // lexicographic
  std::size_t candidates = 0;
  bool degenerate = false;

  std::vector<TokenPair> pair_ids() const {
    std::vector<TokenPair> out;
    for (const auto& r : pairs) out.push_back(r.pair);
    return out;
  }

  /// Sorted union of pair members.
  std::vector<std::size_t> words() const {
    std::vector<std::size_t> out;
    for (const auto& r : pairs) {
      out.push_back(r.pair.first);
      out.push_back(r.pair.second);
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  }
};

/// Full trace of one explanation.
struct Explanation {
  std::size_t target = 0;
  double probability = 0.0;
  AttributionSet ig;
  PairScoreMap pairs;
  Bounds bounds;
  std::vector<IterationRecord> iterations;
  MinimalFeatureSet mfs;
  CidrConfig config;
};

namespace detail {

inline std::vector<TokenPair> set_difference(const std::vector<TokenPair>& all, std::vector<TokenPair> removed) {
  std::sort(removed.begin(), removed.end());
  std::vector<TokenPair> out;
  std::set_difference(all.begin(), all.end(), removed.begin(), removed.end(), std::back_inserter(out));
  return out;
}

inline double cig_sum(const PairScoreMap& pairs, const std::vector<TokenPair>& subset) {
  double s = 0.0;
  for (const TokenPair& p : subset) s += pairs.at(p).cig;
  return s;
}

}  // namespace detail

/// Solve one knapsack: maximize the summed perturbation of excluded pairs
/// subject to their summed CIG staying within U1 + U2'. A negative capacity
/// is clamped to zero.
inline IterationRecord solve_iteration(const PairScoreMap& pairs, double u1, const PerturbationMap& v, int digits,
                                       std::size_t iteration) {
  IterationRecord rec;
  rec.iteration = iteration;
  rec.u2_perturbed = perturbed_upper_bound(pairs, v);
  rec.capacity = std::max(0.0, u1 + rec.u2_perturbed);

  knapsack::Instance<TokenPair> inst;
  inst.items = pairs.positive;
  inst.capacity = rec.capacity;
  inst.digits = digits;
  for (const TokenPair& p : pairs.positive) {
    inst.weights.push_back(pairs.at(p).cig);
    inst.values.push_back(v.at(p));
  }
  const auto sol = knapsack::solve_dp(knapsack::quantize(inst, knapsack::Rounding::up));
  rec.excluded = sol.selected;
  rec.excluded_cig = detail::cig_sum(pairs, rec.excluded);
  rec.candidate = detail::set_difference(pairs.positive, rec.excluded);
  return rec;
}

/// Count each pair's occurrences across candidates and keep those whose
/// frequency reaches epsilon.
inline MinimalFeatureSet aggregate_candidates(const std::vector<IterationRecord>& iterations, double epsilon) {
  MinimalFeatureSet mfs;
  mfs.candidates = iterations.size();
  std::map<TokenPair, std::vector<std::size_t>> seen;
  for (const auto& rec : iterations) {
    for (const TokenPair& p : rec.candidate) seen[p].push_back(rec.iteration);
  }
  const auto n_c = static_cast<double>(mfs.candidates);
  for (auto& [pair, its] : seen) {
    const double freq = static_cast<double>(its.size()) / n_c;
    if (freq >= epsilon) mfs.pairs.push_back({pair, freq, std::move(its)});
  }
  return mfs;
}

/// Refinement on precomputed scores; `ig` and `pairs` must describe the same
/// instance and class.
inline Explanation refine_scores(const AttributionSet& ig, const PairScoreMap& pairs, const CidrConfig& config) {
  config.validate();
  Explanation ex;
  ex.config = config;
  ex.target = ig.target;
  ex.ig = ig;
  ex.pairs = pairs;
  ex.bounds = {upper_bound_u1(ig), upper_bound_u2(pairs)};
  if (pairs.degenerate || pairs.positive.empty()) {
    ex.mfs.degenerate = true;
    return ex;
  }
  for (std::size_t k = 0; k < config.n_iter; ++k) {
    const PerturbationMap v = sample_perturbations(pairs.positive, config.seed, k);
    ex.iterations.push_back(solve_iteration(pairs, ex.bounds.u1, v, config.q, k));
  }
  ex.mfs = aggregate_candidates(ex.iterations, config.epsilon);
  return ex;
}

/// Greedy exclusion under the unperturbed bound U1 + U2, every item valued
/// equally; the feature set is what remains.
inline Explanation greedy_scores(const AttributionSet& ig, const PairScoreMap& pairs, const CidrConfig& config) {
  config.validate();
  Explanation ex;
  ex.config = config;
  ex.target = ig.target;
  ex.ig = ig;
  ex.pairs = pairs;
  ex.bounds = {upper_bound_u1(ig), upper_bound_u2(pairs)};
  if (pairs.degenerate || pairs.positive.empty()) {
    ex.mfs.degenerate = true;
    return ex;
  }
  std::vector<knapsack::ScoredItem<TokenPair>> items;
  for (const TokenPair& p : pairs.positive) items.push_back({p, pairs.at(p).cig});

  IterationRecord rec;
  rec.u2_perturbed = ex.bounds.u2;
  rec.capacity = ex.bounds.u1 + ex.bounds.u2;
  rec.excluded = knapsack::solve_greedy(std::move(items), rec.capacity);
  std::sort(rec.excluded.begin(), rec.excluded.end());
  rec.excluded_cig = detail::cig_sum(pairs, rec.excluded);
  rec.candidate = detail::set_difference(pairs.positive, rec.excluded);
  ex.iterations.push_back(rec);
  ex.mfs = aggregate_candidates(ex.iterations, 1.0);
  return ex;
}

namespace detail {

template <DifferentiableClassifier M>
std::pair<AttributionSet, PairScoreMap> score_instance(const M& model, const Instance& inst, const CidrConfig& config,
                                                       Explanation& ex) {
  const auto probs = model.forward(inst.embedding());
  ex.target = argmax(probs);
  ex.probability = probs[ex.target];
  AttributionSet ig = integrated_gradients(model, inst, ex.target, config.m);
  PairScoreMap pairs = cooperative_integrated_gradients(model, inst, ig, config.beta);
  return {std::move(ig), std::move(pairs)};
}

}  // namespace detail

/// Minimal feature refinement for the model's predicted class. CIG is
/// computed once; each of the n_iter iterations resamples perturbations and
/// solves one knapsack.
template <DifferentiableClassifier M>
Explanation refine(const M& model, const Instance& inst, const CidrConfig& config) {
  config.validate();
  Explanation head;
  auto [ig, pairs] = detail::score_instance(model, inst, config, head);
  Explanation ex = refine_scores(ig, pairs, config);
  ex.probability = head.probability;
  return ex;
}

template <DifferentiableClassifier M>
Explanation cidr_without_refinement(const M& model, const Instance& inst, const CidrConfig& config) {
  config.validate();
  Explanation head;
  auto [ig, pairs] = detail::score_instance(model, inst, config, head);
  Explanation ex = greedy_scores(ig, pairs, config);
  ex.probability = head.probability;
  return ex;
}

/// Counts, over the retained pairs, how often CIG is non-positive and how
/// often the leave-one-out assumption 0 < IG_{i, X without w_j} <= IG_i fails
/// for either member.
struct AssumptionReport {
  std::size_t pairs = 0;
  std::size_t nonpositive_cig = 0;
  std::size_t assumption_failures = 0;
};

inline AssumptionReport check_assumptions(const Explanation& ex) {
  AssumptionReport r;
  for (const auto& kept : ex.mfs.pairs) {
    const PairScore& s = ex.pairs.at(kept.pair);
    ++r.pairs;
    if (!(s.cig > 0.0)) ++r.nonpositive_cig;
    const bool ok = s.loo_first > 0.0 && s.loo_first <= s.ig_first && s.loo_second > 0.0 && s.loo_second <= s.ig_second;
    if (!ok) ++r.assumption_failures;
  }
  return r;
}

}  // namespace cidr
