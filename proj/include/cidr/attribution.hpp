#pragma once

#include <algorithm>
#include <cmath>
#include <compare>
#include <cstddef>
#include <vector>

#include "cidr/classifier.hpp"
#include "cidr/error.hpp"
#include "cidr/toy_model.hpp"

namespace cidr {

inline constexpr std::size_t kDefaultIgSteps = 50;
inline constexpr double kDefaultBeta = 0.5;

/// Unordered token pair, stored with first < second.
struct TokenPair {
  std::size_t first = 0;
  std::size_t second = 0;

  static TokenPair of(std::size_t a, std::size_t b) { return a < b ? TokenPair{a, b} : TokenPair{b, a}; }
  friend auto operator<=>(const TokenPair&, const TokenPair&) = default;
};

/// Position of (i, j), i < j, in the lexicographic listing of all pairs over n tokens.
inline std::size_t pair_index(TokenPair p, std::size_t n) {
  return p.first * n - p.first * (p.first + 1) / 2 + (p.second - p.first - 1);
}

struct AttributionSet {
  std::vector<double> scores;
  std::vector<std::size_t> positive;  // { i : scores[i] > 0 }
  std::size_t steps = 0;
  std::size_t target = 0;

  double positive_sum() const {
    double s = 0.0;
    for (std::size_t i : positive) s += scores[i];
    return s;
  }
};

inline AttributionSet make_attribution_set(std::vector<double> scores, std::size_t steps, std::size_t target) {
  AttributionSet out;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (!std::isfinite(scores[i])) throw NumericError("attribution: non-finite score");
    if (scores[i] > 0.0) out.positive.push_back(i);
  }
  out.scores = std::move(scores);
  out.steps = steps;
  out.target = target;
  return out;
}

namespace detail {

/// Trapezoidal average of input gradients along baseline + a (endpoint - baseline), a in [0, 1].
template <DifferentiableClassifier M>
Matrix path_gradient_average(const M& model, const Matrix& baseline, const Matrix& endpoint, std::size_t target,
                             std::size_t steps) {
  const Matrix delta = endpoint - baseline;
  Matrix acc = Matrix::Zero(baseline.rows(), baseline.cols());
  for (std::size_t k = 0; k <= steps; ++k) {
    const double alpha = static_cast<double>(k) / static_cast<double>(steps);
    const double weight = (k == 0 || k == steps) ? 0.5 : 1.0;
    acc += weight * model.input_gradient(Matrix(baseline + alpha * delta), target);
  }
  return acc / static_cast<double>(steps);
}

/// Sum over embedding coordinates of (x_i - x'_i) * g_i, accumulated left to right.
inline double row_inner(const Matrix& input, const Matrix& baseline, const Matrix& grad, Eigen::Index row) {
  double s = 0.0;
  for (Eigen::Index c = 0; c < input.cols(); ++c) s += (input(row, c) - baseline(row, c)) * grad(row, c);
  return s;
}

inline void check_steps(std::size_t steps) {
  if (steps == 0) throw InputError("integrated gradients: step count must be at least 1");
}

}  // namespace detail

/// Integrated gradients of F(.)[target] from `baseline` to `input`, one score per row.
template <DifferentiableClassifier M>
std::vector<double> integrated_gradients(const M& model, const Matrix& input, const Matrix& baseline,
                                         std::size_t target, std::size_t steps) {
  detail::check_steps(steps);
  const Matrix avg = detail::path_gradient_average(model, baseline, input, target, steps);
  std::vector<double> scores(static_cast<std::size_t>(input.rows()));
  for (Eigen::Index i = 0; i < input.rows(); ++i) scores[static_cast<std::size_t>(i)] = detail::row_inner(input, baseline, avg, i);
  return scores;
}

/// IG against the all-PAD baseline.
template <DifferentiableClassifier M>
AttributionSet integrated_gradients(const M& model, const Instance& inst, std::size_t target,
                                    std::size_t steps = kDefaultIgSteps) {
  return make_attribution_set(integrated_gradients(model, inst.embedding(), inst.baseline(), target, steps), steps,
                              target);
}

/// IG of token i along the path from the baseline to the input with token j padded.
/// Swapping i and j gives the symmetric term.
template <DifferentiableClassifier M>
double loo_integrated_gradients(const M& model, const Instance& inst, std::size_t i, std::size_t j,
                                std::size_t target, std::size_t steps = kDefaultIgSteps) {
  detail::check_steps(steps);
  if (i == j) throw InputError("leave-one-out IG: i and j must differ");
  if (i >= inst.size() || j >= inst.size()) throw InputError("leave-one-out IG: position out of range");
  const Matrix x = inst.embedding();
  const Matrix base = inst.baseline();
  const Matrix endpoint = inst.with_padded({j}).embedding();
  const Matrix avg = detail::path_gradient_average(model, base, endpoint, target, steps);
  return detail::row_inner(x, base, avg, static_cast<Eigen::Index>(i));
}

/// All directed leave-one-out terms: loo[j][i] = IG_{i, X without w_j}. One
/// path integral per padded position j serves every i.
template <DifferentiableClassifier M>
std::vector<std::vector<double>> loo_table(const M& model, const Instance& inst, std::size_t target,
                                           std::size_t steps) {
  detail::check_steps(steps);
  const std::size_t n = inst.size();
  const Matrix x = inst.embedding();
  const Matrix base = inst.baseline();
  std::vector<std::vector<double>> loo(n, std::vector<double>(n, 0.0));
  for (std::size_t j = 0; j < n; ++j) {
    const Matrix endpoint = inst.with_padded({j}).embedding();
    const Matrix avg = detail::path_gradient_average(model, base, endpoint, target, steps);
    for (std::size_t i = 0; i < n; ++i) {
      if (i != j) loo[j][i] = detail::row_inner(x, base, avg, static_cast<Eigen::Index>(i));
    }
  }
  return loo;
}

struct PairScore {
  TokenPair pair;
  double cig = 0.0;
  double ig_first = 0.0;   // IG_i
  double ig_second = 0.0;  // IG_j
  double loo_first = 0.0;  // IG_{i, X without w_j}
  double loo_second = 0.0; // IG_{j, X without w_i}
};

/// CIG for every unordered pair, in lexicographic pair order.
struct PairScoreMap {
  std::size_t tokens = 0;
  double beta = kDefaultBeta;
  std::vector<PairScore> scores;
  std::vector<TokenPair> positive;  // pairs with cig > 0, lexicographic
  bool degenerate = false;

  const PairScore& at(std::size_t i, std::size_t j) const {
    if (i == j || i >= tokens || j >= tokens) throw InputError("pair score lookup out of range");
    return scores[pair_index(TokenPair::of(i, j), tokens)];
  }
  const PairScore& at(TokenPair p) const { return at(p.first, p.second); }
};

inline void check_beta(double beta) {
  if (!(beta >= 0.0 && beta <= 1.0)) throw ConfigError("beta must lie in [0, 1]");
}

/// Assemble a PairScoreMap from per-token IG and a directed leave-one-out table.
inline PairScoreMap combine_pair_scores(const std::vector<double>& ig, const std::vector<std::vector<double>>& loo,
                                        double beta) {
  check_beta(beta);
  PairScoreMap map;
  map.tokens = ig.size();
  map.beta = beta;
  if (ig.size() < 2) {
    map.degenerate = true;
    return map;
  }
  map.scores.reserve(ig.size() * (ig.size() - 1) / 2);
  for (std::size_t i = 0; i < ig.size(); ++i) {
    for (std::size_t j = i + 1; j < ig.size(); ++j) {
      PairScore s;
      s.pair = {i, j};
      s.ig_first = ig[i];
      s.ig_second = ig[j];
      s.loo_first = loo[j][i];
      s.loo_second = loo[i][j];
      s.cig = s.ig_first + s.ig_second + beta * (s.loo_first + s.loo_second);
      if (!std::isfinite(s.cig)) throw NumericError("cooperative IG: non-finite pair score");
      if (s.cig > 0.0) map.positive.push_back(s.pair);
      map.scores.push_back(s);
    }
  }
  return map;
}

template <DifferentiableClassifier M>
PairScoreMap cooperative_integrated_gradients(const M& model, const Instance& inst, const AttributionSet& ig,
                                              double beta) {
  check_beta(beta);
  if (inst.size() < 2) {
    PairScoreMap map;
    map.tokens = inst.size();
    map.beta = beta;
    map.degenerate = true;
    return map;
  }
  return combine_pair_scores(ig.scores, loo_table(model, inst, ig.target, ig.steps), beta);
}

template <DifferentiableClassifier M>
PairScoreMap cooperative_integrated_gradients(const M& model, const Instance& inst, std::size_t target,
                                              double beta = kDefaultBeta, std::size_t steps = kDefaultIgSteps) {
  check_beta(beta);
  detail::check_steps(steps);
  if (inst.size() < 2) {
    PairScoreMap map;
    map.tokens = inst.size();
    map.beta = beta;
    map.degenerate = true;
    return map;
  }
  return cooperative_integrated_gradients(model, inst, integrated_gradients(model, inst, target, steps), beta);
}

/// Gradient*Input: per-token inner product of the embedding row with its gradient.
template <DifferentiableClassifier M>
std::vector<double> gradient_times_input(const M& model, const Instance& inst, std::size_t target) {
  const Matrix x = inst.embedding();
  const Matrix g = model.input_gradient(x, target);
  std::vector<double> scores(inst.size());
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    double s = 0.0;
    for (Eigen::Index c = 0; c < x.cols(); ++c) s += x(i, c) * g(i, c);
    scores[static_cast<std::size_t>(i)] = s;
  }
  return scores;
}

}  // namespace cidr
