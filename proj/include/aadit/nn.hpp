// Copyright 2026 The aadit Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef AADIT_NN_HPP_
#define AADIT_NN_HPP_

#include <functional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "aadit/types.hpp"

namespace aadit {

enum class Activation { kTanh, kIdentity };

/// A trainable parameter matrix together with its gradient accumulator.
struct ParamBlock {
  std::string name;
  Matrix value;
  Matrix grad;

  ParamBlock() = default;
  ParamBlock(std::string block_name, Matrix initial)
      : name(std::move(block_name)), value(std::move(initial)),
        grad(Matrix::Zero(value.rows(), value.cols())) {}

  void zero_grad() { grad.setZero(value.rows(), value.cols()); }
};

struct DenseLayer {
  ParamBlock weights;  // out x in
  ParamBlock bias;     // out x 1
  Activation activation = Activation::kTanh;

  Index input_dim() const { return weights.value.cols(); }
  Index output_dim() const { return weights.value.rows(); }
};

/// Chain of dense layers. Columns of the input are independent frames.
class FeedForwardStack {
 public:
  FeedForwardStack() = default;
  explicit FeedForwardStack(std::vector<DenseLayer> layers);

  /// Builds a stack with layer widths `dims` = {in, hidden..., out}. Hidden
  /// layers use tanh, the last layer uses `output_activation`. Weights are
  /// uniform in [-s, s] with s = sqrt(6 / (fan_in + fan_out)); biases zero.
  static FeedForwardStack glorot(std::string_view name, std::span<const Index> dims,
                                 Activation output_activation, std::mt19937_64& rng);

  Index input_dim() const;
  Index output_dim() const;
  std::size_t depth() const { return layers_.size(); }
  bool empty() const { return layers_.empty(); }

  const std::vector<DenseLayer>& layers() const { return layers_; }
  std::vector<DenseLayer>& layers() { return layers_; }

  /// Appends pointers to every parameter block, weights before bias, bottom
  /// layer first.
  void collect_params(std::vector<ParamBlock*>& out);
  void collect_params(std::vector<const ParamBlock*>& out) const;

 private:
  std::vector<DenseLayer> layers_;
};

/// Per-layer activations of one forward pass.
struct ForwardCache {
  Matrix input;
  std::vector<Matrix> pre;   // W a + b
  std::vector<Matrix> post;  // activation(pre)
};

struct ForwardResult {
  Matrix output;
  ForwardCache cache;
};

ForwardResult stack_forward(const FeedForwardStack& stack, const Matrix& input);

/// Forward pass without retaining a cache.
Matrix stack_apply(const FeedForwardStack& stack, const Matrix& input);

/// Accumulates parameter gradients into each block's `grad` and returns the
/// gradient with respect to the stack input.
Matrix stack_backward(FeedForwardStack& stack, const ForwardCache& cache,
                      const Matrix& grad_output);

/// Column-wise softmax with max subtraction.
template <typename Derived>
Matrix softmax_columns(const Eigen::MatrixBase<Derived>& logits) {
  Matrix out(logits.rows(), logits.cols());
  for (Index j = 0; j < logits.cols(); ++j) {
    const Scalar shift = logits.col(j).maxCoeff();
    out.col(j) = (logits.col(j).array() - shift).exp().matrix();
    out.col(j) /= out.col(j).sum();
  }
  return out;
}

Labels argmax_columns(const Matrix& scores);

struct XentResult {
  Scalar loss = 0;
  Matrix grad_logits;
};

/// Mean negative log-likelihood of `labels` under softmax(logits) and its
/// gradient (softmax - onehot) / N.
XentResult softmax_xent(const Matrix& logits, std::span<const Label> labels);

/// value -= learning_rate * grad for every block, then grads are zeroed.
/// Throws NumericalError naming the first block holding a non-finite
/// gradient; no block is updated in that case.
void sgd_step(std::span<ParamBlock* const> params, Scalar learning_rate);

/// Central-difference gradient of `loss` with respect to every entry of
/// `param`, which is perturbed in place and restored.
Matrix finite_diff_grad(const std::function<Scalar()>& loss, Matrix& param, Scalar h);

Vector finite_diff_grad(const std::function<Scalar(const Vector&)>& loss, const Vector& theta,
                        Scalar h);

}  // namespace aadit

#endif  // AADIT_NN_HPP_
