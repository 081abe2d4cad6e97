#pragma once

#include <Eigen/Dense>

#include <concepts>
#include <cstddef>
#include <span>
#include <vector>

namespace cidr {

/// Row i holds the embedding of token i.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

/// A text classifier that consumes an n x d embedding matrix and returns a
/// probability vector over its classes.
template <class M>
concept Classifier = requires(const M& model, const Matrix& x) {
  { model.num_classes() } -> std::convertible_to<std::size_t>;
  { model.forward(x) } -> std::convertible_to<std::vector<double>>;
};

/// A classifier that also exposes d F(x)[c] / d x for every embedding entry.
template <class M>
concept DifferentiableClassifier =
    Classifier<M> && requires(const M& model, const Matrix& x, std::size_t c) {
      { model.input_gradient(x, c) } -> std::convertible_to<Matrix>;
    };

/// Index of the largest probability; ties go to the lower class index.
inline std::size_t argmax(std::span<const double> probs) {
  std::size_t best = 0;
  for (std::size_t c = 1; c < probs.size(); ++c) {
    if (probs[c] > probs[best]) best = c;
  }
  return best;
}

}  // namespace cidr
