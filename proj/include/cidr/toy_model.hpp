#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <optional>
#include <random>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "cidr/classifier.hpp"
#include "cidr/error.hpp"

namespace cidr {

/// Whitespace split followed by ASCII lowercasing.
inline std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> out;
  std::istringstream in{std::string(text)};
  std::string word;
  while (in >> word) {
    std::transform(word.begin(), word.end(), word.begin(),
                   [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
    out.push_back(std::move(word));
  }
  return out;
}

/// Dense token index. Index 0 is always the padding token.
class Vocabulary {
 public:
  static constexpr std::size_t kPad = 0;
  static constexpr std::string_view kPadToken = "[PAD]";

  Vocabulary() { add(kPadToken); }

  std::size_t add(std::string_view token) {
    if (auto it = index_.find(std::string(token)); it != index_.end()) return it->second;
    const std::size_t id = tokens_.size();
    tokens_.emplace_back(token);
    index_.emplace(tokens_.back(), id);
    return id;
  }

  std::optional<std::size_t> find(std::string_view token) const {
    if (auto it = index_.find(std::string(token)); it != index_.end()) return it->second;
    return std::nullopt;
  }

  const std::string& token(std::size_t id) const { return tokens_.at(id); }
  std::size_t size() const noexcept { return tokens_.size(); }
  const std::vector<std::string>& tokens() const noexcept { return tokens_; }

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, std::size_t> index_;
};

/// Row-wise lookup of `tokens` in `table`; positions with `pad_mask[i]` set
/// take the PAD row instead.
inline Matrix embed(const Matrix& table, std::span<const std::size_t> tokens,
                    const std::vector<bool>& pad_mask) {
  if (pad_mask.size() != tokens.size()) throw InputError("embed: mask length differs from token count");
  const auto rows = static_cast<Eigen::Index>(tokens.size());
  Matrix out(rows, table.cols());
  for (Eigen::Index i = 0; i < rows; ++i) {
    const std::size_t id = tokens[static_cast<std::size_t>(i)];
    if (id >= static_cast<std::size_t>(table.rows())) {
      throw InputError("embed: token index " + std::to_string(id) + " outside vocabulary of size " +
                       std::to_string(table.rows()));
    }
    const auto src = pad_mask[static_cast<std::size_t>(i)] ? Vocabulary::kPad : id;
    out.row(i) = table.row(static_cast<Eigen::Index>(src));
  }
  return out;
}

/// A tokenized sentence together with the embeddings it needs. `word_rows`
/// holds the unmasked embedding of every position; `embedding()` applies the
/// pad mask so the padded rows always equal `pad_row`.
struct Instance {
  std::vector<std::size_t> tokens;
  Matrix word_rows;
  Vector pad_row;
  std::vector<bool> pad_mask;
  std::size_t label = 0;

  std::size_t size() const noexcept { return tokens.size(); }
  std::size_t dim() const noexcept { return static_cast<std::size_t>(pad_row.size()); }

  Matrix embedding() const {
    Matrix out = word_rows;
    for (std::size_t i = 0; i < pad_mask.size(); ++i) {
      if (pad_mask[i]) out.row(static_cast<Eigen::Index>(i)) = pad_row.transpose();
    }
    return out;
  }

  /// All-PAD input of the same length.
  Matrix baseline() const {
    return pad_row.transpose().replicate(static_cast<Eigen::Index>(size()), 1);
  }

  /// Copy with the given positions padded in addition to those already padded.
  Instance with_padded(std::span<const std::size_t> positions) const {
    Instance out = *this;
    for (std::size_t p : positions) {
      if (p >= size()) throw InputError("with_padded: position out of range");
      out.pad_mask[p] = true;
    }
    return out;
  }

  Instance with_padded(std::initializer_list<std::size_t> positions) const {
    return with_padded(std::span<const std::size_t>(positions.begin(), positions.size()));
  }
};

/// Build an instance from vocabulary indices. The unmasked rows come from
/// `table`, the PAD row from `table.row(Vocabulary::kPad)`.
inline Instance make_instance(const Matrix& table, std::vector<std::size_t> tokens,
                              std::vector<bool> pad_mask, std::size_t label) {
  Instance inst;
  inst.word_rows = embed(table, tokens, std::vector<bool>(tokens.size(), false));
  inst.pad_row = table.row(static_cast<Eigen::Index>(Vocabulary::kPad)).transpose();
  inst.tokens = std::move(tokens);
  inst.pad_mask = std::move(pad_mask);
  inst.label = label;
  return inst;
}

/// Vocabulary lookup result. Out-of-vocabulary words map to PAD and are
/// marked in the mask.
struct EncodedText {
  std::vector<std::size_t> tokens;
  std::vector<bool> pad_mask;
  std::size_t oov = 0;
};

inline EncodedText encode(const Vocabulary& vocab, std::span<const std::string> words) {
  EncodedText out;
  for (const auto& w : words) {
    if (auto id = vocab.find(w); id && *id != Vocabulary::kPad) {
      out.tokens.push_back(*id);
      out.pad_mask.push_back(false);
    } else {
      out.tokens.push_back(Vocabulary::kPad);
      out.pad_mask.push_back(true);
      ++out.oov;
    }
  }
  return out;
}

struct TrainConfig {
  double learning_rate = 0.5;
  std::size_t epochs = 30;
  std::size_t batch_size = 8;
  std::uint64_t seed = 42;
  std::size_t embedding_dim = 8;
  std::size_t hidden_dim = 8;

  void validate() const {
    if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) {
      throw ConfigError("learning_rate must be a finite non-negative number");
    }
    if (epochs == 0 || batch_size == 0) throw ConfigError("epochs and batch_size must be positive");
    if (embedding_dim == 0 || hidden_dim == 0) throw ConfigError("embedding_dim and hidden_dim must be positive");
  }
};

struct LabeledText {
  std::vector<std::string> tokens;
  std::size_t label = 0;
};

/// Mean-pooled two-layer perceptron over token embeddings:
///   p = softmax(W2 tanh(W1 mean(x) + b1) + b2).
class ToyModel {
 public:
  Vocabulary vocab;
  Matrix embedding;  // V x d, row 0 is PAD
  Matrix w1;         // H x d
  Vector b1;         // H
  Matrix w2;         // C x H
  Vector b2;         // C

  std::size_t num_classes() const noexcept { return static_cast<std::size_t>(b2.size()); }
  std::size_t dim() const noexcept { return static_cast<std::size_t>(embedding.cols()); }
  std::size_t hidden() const noexcept { return static_cast<std::size_t>(b1.size()); }

  std::vector<double> forward(const Matrix& x) const {
    const Activations a = activate(x);
    return {a.probs.data(), a.probs.data() + a.probs.size()};
  }

  Matrix input_gradient(const Matrix& x, std::size_t c) const {
    if (c >= num_classes()) throw InputError("input_gradient: class index out of range");
    const Activations a = activate(x);
    // d p_c / d logits = p_c (e_c - p)
    Vector g_logits = -a.probs[static_cast<Eigen::Index>(c)] * a.probs;
    g_logits[static_cast<Eigen::Index>(c)] += a.probs[static_cast<Eigen::Index>(c)];
    const Vector g_pool = pooled_gradient(a, g_logits);
    return (g_pool / static_cast<double>(x.rows())).transpose().replicate(x.rows(), 1);
  }

  Instance instance(std::span<const std::string> words, std::size_t label, std::size_t* oov = nullptr) const {
    EncodedText enc = encode(vocab, words);
    if (oov != nullptr) *oov = enc.oov;
    return make_instance(embedding, std::move(enc.tokens), std::move(enc.pad_mask), label);
  }

 private:
  friend ToyModel train_toy(std::span<const LabeledText>, const TrainConfig&);

  struct Activations {
    Vector pooled;
    Vector hidden;
    Vector probs;
  };

  void check_input(const Matrix& x) const {
    if (x.rows() == 0 || x.cols() != embedding.cols()) {
      throw InputError("forward: expected an n x " + std::to_string(embedding.cols()) + " matrix");
    }
    if (!x.allFinite()) throw NumericError("forward: non-finite input");
  }

  Activations activate(const Matrix& x) const {
    check_input(x);
    Activations a;
    a.pooled = x.colwise().mean().transpose();
    a.hidden = (w1 * a.pooled + b1).array().tanh().matrix();
    Vector logits = w2 * a.hidden + b2;
    logits.array() -= logits.maxCoeff();
    a.probs = logits.array().exp().matrix();
    a.probs /= a.probs.sum();
    return a;
  }

  // Backpropagate a gradient on the logits to the pooled input vector.
  Vector pooled_gradient(const Activations& a, const Vector& g_logits) const {
    const Vector g_hidden = w2.transpose() * g_logits;
    const Vector g_z = g_hidden.cwiseProduct((1.0 - a.hidden.array().square()).matrix());
    return w1.transpose() * g_z;
  }
};

/// Mini-batch SGD on softmax cross-entropy. The vocabulary is built from the
/// corpus in first-appearance order; the seed fixes both initialization and
/// batch order. The PAD row starts at zero.
inline ToyModel train_toy(std::span<const LabeledText> corpus, const TrainConfig& config) {
  config.validate();
  if (corpus.empty()) throw InputError("train_toy: empty corpus");

  ToyModel model;
  std::size_t classes = 2;
  for (const auto& rec : corpus) {
    if (rec.tokens.empty()) throw InputError("train_toy: empty sentence in corpus");
    for (const auto& w : rec.tokens) model.vocab.add(w);
    classes = std::max(classes, rec.label + 1);
  }

  const auto V = static_cast<Eigen::Index>(model.vocab.size());
  const auto d = static_cast<Eigen::Index>(config.embedding_dim);
  const auto H = static_cast<Eigen::Index>(config.hidden_dim);
  const auto C = static_cast<Eigen::Index>(classes);

  std::mt19937_64 rng(config.seed);
  auto uniform_fill = [&rng](Matrix& m, double scale) {
    std::uniform_real_distribution<double> dist(-scale, scale);
    for (Eigen::Index r = 0; r < m.rows(); ++r)
      for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = dist(rng);
  };
  model.embedding = Matrix(V, d);
  uniform_fill(model.embedding, 0.5);
  model.embedding.row(static_cast<Eigen::Index>(Vocabulary::kPad)).setZero();
  model.w1 = Matrix(H, d);
  uniform_fill(model.w1, std::sqrt(6.0 / static_cast<double>(H + d)));
  model.b1 = Vector::Zero(H);
  model.w2 = Matrix(C, H);
  uniform_fill(model.w2, std::sqrt(6.0 / static_cast<double>(C + H)));
  model.b2 = Vector::Zero(C);

  std::vector<EncodedText> encoded;
  encoded.reserve(corpus.size());
  for (const auto& rec : corpus) encoded.push_back(encode(model.vocab, rec.tokens));

  std::vector<std::size_t> order(corpus.size());
  std::iota(order.begin(), order.end(), 0);
  const double lr = config.learning_rate;

  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t stop = std::min(order.size(), start + config.batch_size);
      const double scale = 1.0 / static_cast<double>(stop - start);

      Matrix g_emb = Matrix::Zero(V, d);
      Matrix g_w1 = Matrix::Zero(H, d);
      Vector g_b1 = Vector::Zero(H);
      Matrix g_w2 = Matrix::Zero(C, H);
      Vector g_b2 = Vector::Zero(C);

      // Sentences are padded to the longest one in the batch, which is how
      // the PAD row gets trained.
      std::size_t longest = 0;
      for (std::size_t k = start; k < stop; ++k) longest = std::max(longest, encoded[order[k]].tokens.size());

      for (std::size_t k = start; k < stop; ++k) {
        EncodedText enc = encoded[order[k]];
        enc.tokens.resize(longest, Vocabulary::kPad);
        enc.pad_mask.resize(longest, true);
        const Matrix x = embed(model.embedding, enc.tokens, enc.pad_mask);
        const auto a = model.activate(x);
        Vector g_logits = a.probs;
        g_logits[static_cast<Eigen::Index>(corpus[order[k]].label)] -= 1.0;

        g_w2 += g_logits * a.hidden.transpose();
        g_b2 += g_logits;
        const Vector g_hidden = model.w2.transpose() * g_logits;
        const Vector g_z = g_hidden.cwiseProduct((1.0 - a.hidden.array().square()).matrix());
        g_w1 += g_z * a.pooled.transpose();
        g_b1 += g_z;
        const Vector g_row = (model.w1.transpose() * g_z) / static_cast<double>(x.rows());
        for (std::size_t i = 0; i < enc.tokens.size(); ++i) {
          const std::size_t id = enc.pad_mask[i] ? Vocabulary::kPad : enc.tokens[i];
          g_emb.row(static_cast<Eigen::Index>(id)) += g_row.transpose();
        }
      }

      model.embedding -= (lr * scale) * g_emb;
      model.w1 -= (lr * scale) * g_w1;
      model.b1 -= (lr * scale) * g_b1;
      model.w2 -= (lr * scale) * g_w2;
      model.b2 -= (lr * scale) * g_b2;
    }
  }
  return model;
}

/// Fraction of `corpus` whose argmax prediction equals its label.
inline double training_accuracy(const ToyModel& model, std::span<const LabeledText> corpus) {
  if (corpus.empty()) return 0.0;
  std::size_t hits = 0;
  for (const auto& rec : corpus) {
    const Instance inst = model.instance(rec.tokens, rec.label);
    const auto probs = model.forward(inst.embedding());
    if (argmax(probs) == rec.label) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(corpus.size());
}

}  // namespace cidr
