#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "cidr/error.hpp"

namespace cidr::knapsack {

inline constexpr int kDefaultDigits = 3;

/// Largest DP table (items x capacity cells) solve_dp will allocate.
inline constexpr std::uint64_t kMaxTableCells = std::uint64_t{1} << 31;
inline constexpr std::int64_t kMaxCapacity = std::int64_t{1} << 40;
inline constexpr std::size_t kMaxBruteForceItems = 20;

/// 0/1 knapsack over real weights. `items[k]` identifies the k-th item.
template <class Id>
struct Instance {
  std::vector<Id> items;
  std::vector<double> weights;
  std::vector<double> values;
  double capacity = 0.0;
  int digits = kDefaultDigits;
};

template <class Id>
struct IntegerInstance {
  std::vector<Id> items;
  std::vector<std::int64_t> weights;
  std::vector<double> values;
  std::int64_t capacity = 0;
};

template <class Id>
struct Solution {
  std::vector<Id> selected;  // in item order
  double value = 0.0;
  double weight = 0.0;       // in the units of the instance that was solved
};

enum class Rounding {
  nearest,  // round(w * 10^q)
  up,       // ceil(w * 10^q), capacity floored: integer-feasible implies real-feasible
};

namespace detail {

template <class Id>
void check_shape(const std::vector<Id>& items, std::size_t weights, std::size_t values) {
  if (items.size() != weights || items.size() != values) {
    throw InputError("knapsack: items, weights and values must have equal length");
  }
}

template <class W>
void check_positive(const std::vector<W>& weights) {
  for (const auto& w : weights) {
    if (!(w > 0)) throw InputError("knapsack: weights must be strictly positive");
  }
}

}  // namespace detail

/// Scale weights and capacity by 10^digits. Integer weights of 0 are clamped to 1.
template <class Id>
IntegerInstance<Id> quantize(const Instance<Id>& inst, Rounding rounding = Rounding::nearest) {
  detail::check_shape(inst.items, inst.weights.size(), inst.values.size());
  detail::check_positive(inst.weights);
  if (inst.digits < 0) throw ConfigError("knapsack: quantization digits must be non-negative");
  if (!(inst.capacity >= 0.0)) throw InputError("knapsack: capacity must be non-negative");
  const double scale = std::pow(10.0, inst.digits);

  IntegerInstance<Id> out;
  out.items = inst.items;
  out.values = inst.values;
  const double inf = std::numeric_limits<double>::infinity();
  // Rounding::up also nudges both products by one ulp so that floating-point
  // error in the scaling cannot make a quantized-feasible selection infeasible.
  const double cap = rounding == Rounding::nearest ? std::floor(inst.capacity * scale)
                                                   : std::floor(std::nextafter(inst.capacity * scale, 0.0));
  if (!(cap <= static_cast<double>(kMaxCapacity))) {
    throw ConfigError("knapsack: quantized capacity " + std::to_string(cap) + " exceeds the index range; lower the digits");
  }
  out.capacity = static_cast<std::int64_t>(cap);
  out.weights.reserve(inst.weights.size());
  for (double w : inst.weights) {
    const double scaled =
        rounding == Rounding::nearest ? std::round(w * scale) : std::ceil(std::nextafter(w * scale, inf));
    if (!(scaled <= static_cast<double>(kMaxCapacity))) throw ConfigError("knapsack: quantized weight overflows");
    out.weights.push_back(std::max<std::int64_t>(1, static_cast<std::int64_t>(scaled)));
  }
  return out;
}

/// Exact optimum by dynamic programming over integer capacities,
///   f[i][c] = max(f[i-1][c], f[i-1][c - W_i] + V_i),
/// with the selection recovered by backtracking. An item is taken only when
/// taking it is strictly better, so among optimal selections the one that
/// leaves out the highest-indexed items wins.
template <class Id>
Solution<Id> solve_dp(const IntegerInstance<Id>& inst) {
  detail::check_shape(inst.items, inst.weights.size(), inst.values.size());
  detail::check_positive(inst.weights);
  if (inst.capacity < 0) throw InputError("knapsack: capacity must be non-negative");

  Solution<Id> sol;
  const std::size_t n = inst.items.size();
  if (n == 0 || inst.capacity == 0) return sol;

  // Capacities beyond the total weight add nothing.
  const std::int64_t total = std::accumulate(inst.weights.begin(), inst.weights.end(), std::int64_t{0});
  const std::int64_t cap = std::min(inst.capacity, total);
  const auto width = static_cast<std::size_t>(cap) + 1;
  if (static_cast<std::uint64_t>(width) * n > kMaxTableCells) {
    throw ConfigError("knapsack: DP table of " + std::to_string(n) + " x " + std::to_string(width) +
                      " cells is too large; lower the quantization digits");
  }

  std::vector<double> prev(width, 0.0), cur(width, 0.0);
  std::vector<std::vector<bool>> take(n, std::vector<bool>(width, false));
  for (std::size_t i = 0; i < n; ++i) {
    const auto w = static_cast<std::size_t>(inst.weights[i]);
    const double v = inst.values[i];
    for (std::size_t c = 0; c < width; ++c) {
      cur[c] = prev[c];
      if (c >= w) {
        const double with = prev[c - w] + v;
        if (with > prev[c]) {
          cur[c] = with;
          take[i][c] = true;
        }
      }
    }
    std::swap(prev, cur);
  }

  std::size_t c = width - 1;
  std::vector<std::size_t> chosen;
  for (std::size_t i = n; i-- > 0;) {
    if (take[i][c]) {
      chosen.push_back(i);
      c -= static_cast<std::size_t>(inst.weights[i]);
    }
  }
  std::reverse(chosen.begin(), chosen.end());
  for (std::size_t i : chosen) {
    sol.selected.push_back(inst.items[i]);
    sol.value += inst.values[i];
    sol.weight += static_cast<double>(inst.weights[i]);
  }
  return sol;
}

/// Exhaustive subset enumeration with the same tie-break as solve_dp. Test oracle.
template <class Id, class W>
Solution<Id> solve_bruteforce(const std::vector<Id>& items, const std::vector<W>& weights,
                              const std::vector<double>& values, W capacity) {
  detail::check_shape(items, weights.size(), values.size());
  if (items.size() > kMaxBruteForceItems) {
    throw InputError("knapsack: brute force refuses more than " + std::to_string(kMaxBruteForceItems) + " items");
  }
  const std::size_t n = items.size();
  std::uint32_t best_mask = 0;
  double best_value = 0.0;
  for (std::uint32_t mask = 1; mask < (std::uint32_t{1} << n); ++mask) {
    W weight{};
    double value = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (mask & (std::uint32_t{1} << i)) {
        weight += weights[i];
        value += values[i];
      }
    }
    if (weight > capacity) continue;
    bool better = value > best_value;
    if (!better && value == best_value) {
      // Prefer the selection that omits the highest differing item.
      const std::uint32_t diff = mask ^ best_mask;
      const int top = 31 - std::countl_zero(diff);
      better = (best_mask >> top) & 1u;
    }
    if (better) {
      best_mask = mask;
      best_value = value;
    }
  }
  Solution<Id> sol;
  for (std::size_t i = 0; i < n; ++i) {
    if (best_mask & (std::uint32_t{1} << i)) {
      sol.selected.push_back(items[i]);
      sol.value += values[i];
      sol.weight += static_cast<double>(weights[i]);
    }
  }
  return sol;
}

template <class Id>
Solution<Id> solve_bruteforce(const IntegerInstance<Id>& inst) {
  return solve_bruteforce(inst.items, inst.weights, inst.values, inst.capacity);
}

template <class Id>
Solution<Id> solve_bruteforce(const Instance<Id>& inst) {
  return solve_bruteforce(inst.items, inst.weights, inst.values, inst.capacity);
}

template <class Id>
struct ScoredItem {
  Id id;
  double score = 0.0;
};

/// Walk items in decreasing score order (ties by ascending id), adding each
/// while the running score sum before the addition is still below `bound`.
/// The check precedes each addition, so the final sum may exceed the bound.
template <class Id>
std::vector<Id> solve_greedy(std::vector<ScoredItem<Id>> items, double bound) {
  for (const auto& it : items) {
    if (!std::isfinite(it.score)) throw NumericError("knapsack: non-finite greedy score");
  }
  std::sort(items.begin(), items.end(), [](const ScoredItem<Id>& a, const ScoredItem<Id>& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.id < b.id;
  });
  std::vector<Id> out;
  double sum = 0.0;
  for (const auto& it : items) {
    if (!(sum < bound)) break;
    out.push_back(it.id);
    sum += it.score;
  }
  return out;
}

}  // namespace cidr::knapsack
