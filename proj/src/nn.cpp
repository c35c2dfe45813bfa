// Copyright 2026 The aadit Authors
// SPDX-License-Identifier: Apache-2.0

#include "aadit/nn.hpp"

#include <cmath>
#include <sstream>

namespace aadit {

namespace {

Matrix activate(Activation act, const Matrix& pre) {
  switch (act) {
    case Activation::kTanh:
      return pre.array().tanh().matrix();
    case Activation::kIdentity:
      return pre;
  }
  return pre;
}

}  // namespace

FeedForwardStack::FeedForwardStack(std::vector<DenseLayer> layers) : layers_(std::move(layers)) {
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    const DenseLayer& layer = layers_[i];
    if (layer.bias.value.rows() != layer.output_dim() || layer.bias.value.cols() != 1) {
      std::ostringstream msg;
      msg << "layer " << i << " (" << layer.weights.name << "): bias shape "
          << layer.bias.value.rows() << "x" << layer.bias.value.cols() << " does not match "
          << layer.output_dim() << "x1";
      throw ConfigError(msg.str());
    }
    if (i > 0 && layers_[i - 1].output_dim() != layer.input_dim()) {
      std::ostringstream msg;
      msg << "layer " << i << " (" << layer.weights.name << "): input dim " << layer.input_dim()
          << " does not chain with previous output dim " << layers_[i - 1].output_dim();
      throw ConfigError(msg.str());
    }
  }
}

FeedForwardStack FeedForwardStack::glorot(std::string_view name, std::span<const Index> dims,
                                          Activation output_activation, std::mt19937_64& rng) {
  if (dims.size() < 2) {
    throw ConfigError(std::string(name) + ": a stack needs at least one layer");
  }
  std::vector<DenseLayer> layers;
  for (std::size_t i = 0; i + 1 < dims.size(); ++i) {
    const Index fan_in = dims[i];
    const Index fan_out = dims[i + 1];
    if (fan_in < 1 || fan_out < 1) {
      throw ConfigError(std::string(name) + ": layer " + std::to_string(i) +
                        " has a non-positive dimension");
    }
    const Scalar s = std::sqrt(6.0 / static_cast<Scalar>(fan_in + fan_out));
    std::uniform_real_distribution<Scalar> dist(-s, s);
    Matrix w(fan_out, fan_in);
    // Row-major draw order so the stream is independent of storage order.
    for (Index r = 0; r < fan_out; ++r) {
      for (Index c = 0; c < fan_in; ++c) w(r, c) = dist(rng);
    }
    const std::string prefix = std::string(name) + "." + std::to_string(i);
    DenseLayer layer;
    layer.weights = ParamBlock(prefix + ".weight", std::move(w));
    layer.bias = ParamBlock(prefix + ".bias", Matrix::Zero(fan_out, 1));
    layer.activation = (i + 2 == dims.size()) ? output_activation : Activation::kTanh;
    layers.push_back(std::move(layer));
  }
  return FeedForwardStack(std::move(layers));
}

Index FeedForwardStack::input_dim() const {
  return layers_.empty() ? 0 : layers_.front().input_dim();
}

Index FeedForwardStack::output_dim() const {
  return layers_.empty() ? 0 : layers_.back().output_dim();
}

void FeedForwardStack::collect_params(std::vector<ParamBlock*>& out) {
  for (DenseLayer& layer : layers_) {
    out.push_back(&layer.weights);
    out.push_back(&layer.bias);
  }
}

void FeedForwardStack::collect_params(std::vector<const ParamBlock*>& out) const {
  for (const DenseLayer& layer : layers_) {
    out.push_back(&layer.weights);
    out.push_back(&layer.bias);
  }
}

ForwardResult stack_forward(const FeedForwardStack& stack, const Matrix& input) {
  if (stack.empty()) throw ConfigError("stack_forward: empty stack");
  ForwardResult result;
  result.cache.input = input;
  result.cache.pre.reserve(stack.depth());
  result.cache.post.reserve(stack.depth());
  const Matrix* current = &result.cache.input;
  for (std::size_t i = 0; i < stack.depth(); ++i) {
    const DenseLayer& layer = stack.layers()[i];
    if (current->rows() != layer.input_dim()) {
      std::ostringstream msg;
      msg << "stack_forward: layer " << i << " (" << layer.weights.name << ") expects "
          << layer.input_dim() << " input rows, got " << current->rows();
      throw ConfigError(msg.str());
    }
    Matrix pre = layer.weights.value * (*current);
    pre.colwise() += layer.bias.value.col(0);
    result.cache.post.push_back(activate(layer.activation, pre));
    result.cache.pre.push_back(std::move(pre));
    current = &result.cache.post.back();
  }
  result.output = result.cache.post.back();
  return result;
}

Matrix stack_apply(const FeedForwardStack& stack, const Matrix& input) {
  return stack_forward(stack, input).output;
}

Matrix stack_backward(FeedForwardStack& stack, const ForwardCache& cache,
                      const Matrix& grad_output) {
  const std::size_t depth = stack.depth();
  if (cache.pre.size() != depth || cache.post.size() != depth) {
    throw InternalError("stack_backward: cache depth does not match stack depth");
  }
  if (depth == 0) throw InternalError("stack_backward: empty stack");
  if (grad_output.rows() != cache.post.back().rows() ||
      grad_output.cols() != cache.post.back().cols()) {
    throw InternalError("stack_backward: grad_output shape does not match cached output");
  }
  Matrix grad = grad_output;
  for (std::size_t k = depth; k-- > 0;) {
    DenseLayer& layer = stack.layers()[k];
    if (layer.activation == Activation::kTanh) {
      grad.array() *= 1.0 - cache.post[k].array().square();
    }
    const Matrix& below = (k == 0) ? cache.input : cache.post[k - 1];
    layer.weights.grad.noalias() += grad * below.transpose();
    layer.bias.grad.col(0) += grad.rowwise().sum();
    grad = layer.weights.value.transpose() * grad;
  }
  return grad;
}

Labels argmax_columns(const Matrix& scores) {
  Labels out(static_cast<std::size_t>(scores.cols()));
  for (Index j = 0; j < scores.cols(); ++j) {
    Index best = 0;
    scores.col(j).maxCoeff(&best);
    out[static_cast<std::size_t>(j)] = static_cast<Label>(best);
  }
  return out;
}

XentResult softmax_xent(const Matrix& logits, std::span<const Label> labels) {
  const Index n = logits.cols();
  if (static_cast<Index>(labels.size()) != n) {
    throw InputError("softmax_xent: " + std::to_string(labels.size()) + " labels for " +
                     std::to_string(n) + " columns");
  }
  if (n == 0) throw InputError("softmax_xent: empty batch");
  const Index k = logits.rows();
  XentResult result;
  result.grad_logits.resize(k, n);
  Scalar total = 0;
  for (Index j = 0; j < n; ++j) {
    const Label y = labels[static_cast<std::size_t>(j)];
    if (y < 0 || y >= k) {
      throw InputError("softmax_xent: label " + std::to_string(y) + " at column " +
                       std::to_string(j) + " outside [0, " + std::to_string(k) + ")");
    }
    const Scalar shift = logits.col(j).maxCoeff();
    const auto shifted = (logits.col(j).array() - shift).eval();
    const Scalar sum = shifted.exp().sum();
    const Scalar log_z = std::log(sum);
    total -= shifted(y) - log_z;
    result.grad_logits.col(j) = (shifted - log_z).exp().matrix();
    result.grad_logits(y, j) -= 1.0;
  }
  const Scalar inv_n = 1.0 / static_cast<Scalar>(n);
  result.loss = total * inv_n;
  result.grad_logits *= inv_n;
  return result;
}

void sgd_step(std::span<ParamBlock* const> params, Scalar learning_rate) {
  for (const ParamBlock* block : params) {
    if (!block->grad.allFinite()) {
      throw NumericalError("sgd_step: non-finite gradient in block '" + block->name + "'");
    }
  }
  for (ParamBlock* block : params) {
    block->value -= learning_rate * block->grad;
    block->zero_grad();
  }
}

Matrix finite_diff_grad(const std::function<Scalar()>& loss, Matrix& param, Scalar h) {
  Matrix grad(param.rows(), param.cols());
  for (Index j = 0; j < param.cols(); ++j) {
    for (Index i = 0; i < param.rows(); ++i) {
      const Scalar saved = param(i, j);
      param(i, j) = saved + h;
      const Scalar up = loss();
      param(i, j) = saved - h;
      const Scalar down = loss();
      param(i, j) = saved;
      grad(i, j) = (up - down) / (2 * h);
    }
  }
  return grad;
}

Vector finite_diff_grad(const std::function<Scalar(const Vector&)>& loss, const Vector& theta,
                        Scalar h) {
  Vector probe = theta;
  Vector grad(theta.size());
  for (Index i = 0; i < theta.size(); ++i) {
    probe(i) = theta(i) + h;
    const Scalar up = loss(probe);
    probe(i) = theta(i) - h;
    const Scalar down = loss(probe);
    probe(i) = theta(i);
    grad(i) = (up - down) / (2 * h);
  }
  return grad;
}

}  // namespace aadit
