#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "cidr/attribution.hpp"
#include "cidr/classifier.hpp"
#include "cidr/error.hpp"
#include "cidr/toy_model.hpp"

namespace cidr::metrics {

inline constexpr double kProbabilityFloor = 1e-12;

enum class RemovalMode { pairs, words };

/// K = min(max(1, floor(0.1 n)), |S|).
struct RemovalProtocol {
  std::size_t k = 0;
  RemovalMode mode = RemovalMode::pairs;

  static std::size_t base_k(std::size_t tokens) { return std::max<std::size_t>(1, tokens / 10); }

  static RemovalProtocol for_set(std::size_t tokens, std::size_t set_size, RemovalMode mode) {
    return {std::min(base_k(tokens), set_size), mode};
  }
};

struct MetricsRow {
  std::string method;
  double lo = 0.0;
  double comp = 0.0;
  double fms = 0.0;
  std::size_t n = 0;
  std::uint64_t seed = 0;
};

/// Sorted, de-duplicated token positions covered by a set of pairs.
inline std::vector<std::size_t> positions_of(std::span<const TokenPair> pairs) {
  std::vector<std::size_t> out;
  for (const auto& p : pairs) {
    out.push_back(p.first);
    out.push_back(p.second);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

/// Indices of the k largest scores, best first; ties go to the lower index.
/// k is clamped to the number of scores.
inline std::vector<std::size_t> top_k_baseline(std::span<const double> scores, std::size_t k) {
  std::vector<std::size_t> idx(scores.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  idx.resize(std::min(k, idx.size()));
  return idx;
}

/// The k pairs of `set` with the largest CIG, best first; ties lexicographic.
inline std::vector<TokenPair> top_k_pairs(const PairScoreMap& scores, std::vector<TokenPair> set, std::size_t k) {
  std::sort(set.begin(), set.end(), [&](const TokenPair& a, const TokenPair& b) {
    const double sa = scores.at(a).cig;
    const double sb = scores.at(b).cig;
    if (sa != sb) return sa > sb;
    return a < b;
  });
  set.resize(std::min(k, set.size()));
  return set;
}

namespace detail {

template <Classifier M>
double class_probability(const M& model, const Instance& inst, std::size_t c) {
  return model.forward(inst.embedding())[c];
}

template <Classifier M>
std::size_t predicted_class(const M& model, const Instance& inst) {
  return argmax(model.forward(inst.embedding()));
}

template <class T>
void check_corpus(std::span<const Instance> instances, std::span<const T> sets) {
  if (instances.empty()) throw InputError("metrics: empty corpus");
  if (instances.size() != sets.size()) throw InputError("metrics: one removal set per instance is required");
}

}  // namespace detail

/// Probability drop on the predicted class after padding `removed`.
template <Classifier M>
double instance_comprehensiveness(const M& model, const Instance& inst, std::span<const std::size_t> removed) {
  const auto before = model.forward(inst.embedding());
  const std::size_t c = argmax(before);
  if (removed.empty()) return 0.0;
  return before[c] - detail::class_probability(model, inst.with_padded(removed), c);
}

/// ln F(X_removed | c) - ln F(X | c), both probabilities floored at 1e-12.
template <Classifier M>
double instance_log_odds(const M& model, const Instance& inst, std::span<const std::size_t> removed) {
  const auto before = model.forward(inst.embedding());
  const std::size_t c = argmax(before);
  if (removed.empty()) return 0.0;
  const double after = detail::class_probability(model, inst.with_padded(removed), c);
  return std::log(std::max(after, kProbabilityFloor)) - std::log(std::max(before[c], kProbabilityFloor));
}

template <Classifier M>
double comprehensiveness(const M& model, std::span<const Instance> instances,
                         std::span<const std::vector<std::size_t>> removals) {
  detail::check_corpus(instances, removals);
  double s = 0.0;
  for (std::size_t k = 0; k < instances.size(); ++k) s += instance_comprehensiveness(model, instances[k], removals[k]);
  return s / static_cast<double>(instances.size());
}

template <Classifier M>
double log_odds(const M& model, std::span<const Instance> instances,
                std::span<const std::vector<std::size_t>> removals) {
  detail::check_corpus(instances, removals);
  double s = 0.0;
  for (std::size_t k = 0; k < instances.size(); ++k) s += instance_log_odds(model, instances[k], removals[k]);
  return s / static_cast<double>(instances.size());
}

/// Feature-minimality indicator for one instance. Each element of `groups`
/// is a set of positions (a pair or a single word). The score is 1 when
/// padding every group drives F(.|c) to <= t and restoring any single group,
/// with the others still padded, lifts it above t; 0 otherwise, including
/// when there are no groups.
template <Classifier M>
double instance_minimality(const M& model, const Instance& inst, const std::vector<std::vector<std::size_t>>& groups,
                           double t) {
  if (!(t > 0.0 && t < 1.0)) throw ConfigError("metrics: t must lie in (0, 1)");
  if (groups.empty()) return 0.0;
  const std::size_t c = detail::predicted_class(model, inst);

  auto pad_all_but = [&](std::size_t skip) {
    std::vector<std::size_t> pos;
    for (std::size_t g = 0; g < groups.size(); ++g) {
      if (g != skip) pos.insert(pos.end(), groups[g].begin(), groups[g].end());
    }
    return inst.with_padded(pos);
  };

  if (detail::class_probability(model, pad_all_but(groups.size()), c) > t) return 0.0;
  for (std::size_t g = 0; g < groups.size(); ++g) {
    if (!(detail::class_probability(model, pad_all_but(g), c) > t)) return 0.0;
  }
  return 1.0;
}

template <Classifier M>
double instance_fms_pairs(const M& model, const Instance& inst, std::span<const TokenPair> pairs, double t) {
  std::vector<std::vector<std::size_t>> groups;
  for (const auto& p : pairs) groups.push_back({p.first, p.second});
  return instance_minimality(model, inst, groups, t);
}

template <Classifier M>
double instance_fms_words(const M& model, const Instance& inst, std::span<const std::size_t> words, double t) {
  std::vector<std::vector<std::size_t>> groups;
  for (std::size_t w : words) groups.push_back({w});
  return instance_minimality(model, inst, groups, t);
}

template <Classifier M>
double fms_pairs(const M& model, std::span<const Instance> instances, std::span<const std::vector<TokenPair>> sets,
                 double t) {
  detail::check_corpus(instances, sets);
  double s = 0.0;
  for (std::size_t k = 0; k < instances.size(); ++k) s += instance_fms_pairs(model, instances[k], sets[k], t);
  return s / static_cast<double>(instances.size());
}

template <Classifier M>
double fms_words(const M& model, std::span<const Instance> instances, std::span<const std::vector<std::size_t>> sets,
                 double t) {
  detail::check_corpus(instances, sets);
  double s = 0.0;
  for (std::size_t k = 0; k < instances.size(); ++k) s += instance_fms_words(model, instances[k], sets[k], t);
  return s / static_cast<double>(instances.size());
}

}  // namespace cidr::metrics
