#pragma once

// Test doubles and fixtures shared by the unit and acceptance suites.

#include <cmath>
#include <cstddef>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "cidr/cidr.hpp"

namespace cidr::testing {

/// Two-class model whose class-1 probability is affine in the input:
///   F1(x) = bias + w . mean(x),  F0 = 1 - F1.
/// Its input gradient is constant, so IG and leave-one-out IG have exact
/// closed forms for every step count.
struct LinearProbabilityModel {
  Vector w;
  double bias = 0.5;

  std::size_t num_classes() const { return 2; }

  std::vector<double> forward(const Matrix& x) const {
    const Vector pooled = x.colwise().mean().transpose();
    const double p1 = bias + w.dot(pooled);
    return {1.0 - p1, p1};
  }

  Matrix input_gradient(const Matrix& x, std::size_t c) const {
    if (c >= 2) throw InputError("class index out of range");
    const double sign = c == 1 ? 1.0 : -1.0;
    return (sign * w / static_cast<double>(x.rows())).transpose().replicate(x.rows(), 1);
  }

  /// IG_i (and IG_i with any other token padded) for class 1.
  double closed_form_ig(const Instance& inst, std::size_t i) const {
    const Vector diff = inst.embedding().row(static_cast<Eigen::Index>(i)).transpose() - inst.pad_row;
    return w.dot(diff) / static_cast<double>(inst.size());
  }
};

/// Probability table keyed by the set of padded positions. Instances come from
/// scripted_instance(n): word rows are one-hot, the PAD row is zero, so the
/// padded set can be read off the input. Unlisted sets get `fallback`.
struct ScriptedModel {
  std::map<std::vector<std::size_t>, double> class1;
  double fallback = 0.9;

  std::size_t num_classes() const { return 2; }

  std::vector<double> forward(const Matrix& x) const {
    std::vector<std::size_t> padded;
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      if (x.row(i).isZero()) padded.push_back(static_cast<std::size_t>(i));
    }
    const auto it = class1.find(padded);
    const double p = it == class1.end() ? fallback : it->second;
    return {1.0 - p, p};
  }
};

inline Instance scripted_instance(std::size_t n) {
  Matrix table = Matrix::Zero(static_cast<Eigen::Index>(n + 1), static_cast<Eigen::Index>(n));
  std::vector<std::size_t> tokens;
  for (std::size_t i = 0; i < n; ++i) {
    table(static_cast<Eigen::Index>(i + 1), static_cast<Eigen::Index>(i)) = 1.0;
    tokens.push_back(i + 1);
  }
  return make_instance(table, tokens, std::vector<bool>(n, false), 1);
}

inline Matrix random_matrix(std::mt19937_64& rng, Eigen::Index rows, Eigen::Index cols, double scale) {
  std::normal_distribution<double> dist(0.0, scale);
  Matrix m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = dist(rng);
  return m;
}

inline Vector random_vector(std::mt19937_64& rng, Eigen::Index size, double scale) {
  return random_matrix(rng, size, 1, scale).col(0);
}

/// Toy model with Gaussian parameters and vocabulary "w1".."w{vocab-1}".
inline ToyModel random_toy_model(std::mt19937_64& rng, std::size_t vocab = 20, std::size_t dim = 6,
                                 std::size_t hidden = 5, std::size_t classes = 2, double scale = 1.0) {
  ToyModel m;
  for (std::size_t v = 1; v < vocab; ++v) m.vocab.add("w" + std::to_string(v));
  m.embedding = random_matrix(rng, static_cast<Eigen::Index>(vocab), static_cast<Eigen::Index>(dim), scale);
  m.w1 = random_matrix(rng, static_cast<Eigen::Index>(hidden), static_cast<Eigen::Index>(dim), scale);
  m.b1 = random_vector(rng, static_cast<Eigen::Index>(hidden), scale);
  m.w2 = random_matrix(rng, static_cast<Eigen::Index>(classes), static_cast<Eigen::Index>(hidden), scale);
  m.b2 = random_vector(rng, static_cast<Eigen::Index>(classes), scale);
  return m;
}

/// Random non-PAD tokens of the given length.
inline Instance random_instance(const ToyModel& model, std::mt19937_64& rng, std::size_t n) {
  std::uniform_int_distribution<std::size_t> pick(1, static_cast<std::size_t>(model.embedding.rows()) - 1);
  std::vector<std::size_t> tokens(n);
  for (auto& t : tokens) t = pick(rng);
  return make_instance(model.embedding, tokens, std::vector<bool>(n, false), 0);
}

inline std::string data_path(const std::string& name) { return std::string(CIDR_DATA_DIR) + "/" + name; }

inline const std::vector<CorpusRecord>& bundled_corpus() {
  static const std::vector<CorpusRecord> corpus = load_corpus(data_path("toy_corpus.jsonl"));
  return corpus;
}

/// Toy model trained on the bundled corpus with the default configuration.
inline const ToyModel& trained_model(std::uint64_t seed = 42) {
  static std::map<std::uint64_t, ToyModel> cache;
  auto it = cache.find(seed);
  if (it == cache.end()) {
    TrainConfig cfg;
    cfg.seed = seed;
    it = cache.emplace(seed, train_toy(labeled_texts(bundled_corpus()), cfg)).first;
  }
  return it->second;
}

inline std::vector<Instance> bundled_instances(const ToyModel& model) {
  std::vector<Instance> out;
  for (const auto& rec : bundled_corpus()) out.push_back(model.instance(rec.tokens, rec.label));
  return out;
}

/// The six-token sentence used by the golden fixtures.
inline std::vector<std::string> fixture_sentence() { return {"the", "plot", "was", "awful", "and", "dull"}; }

}  // namespace cidr::testing
