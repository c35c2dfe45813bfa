// Copyright 2026 The aadit Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef AADIT_ATTENTION_HPP_
#define AADIT_ATTENTION_HPP_

#include <algorithm>
#include <cmath>
#include <random>
#include <string_view>
#include <vector>

#include "aadit/nn.hpp"
#include "aadit/types.hpp"

namespace aadit {

enum class ScoreType { kDotProduct, kAdditive };

/// Local time-restricted self-attention over a feature sequence. Frame t
/// attends to frames t-left .. t+right, truncated at the sequence edges.
struct AttentionConfig {
  Index left = 0;
  Index right = 0;
  Index key_dim = 8;  // total key/query dimension over all heads
  ScoreType score = ScoreType::kDotProduct;
  Index heads = 1;
  bool positional_encoding = false;

  Index window() const { return left + right + 1; }
  Index head_dim() const { return key_dim / heads; }
  /// Length of the one-hot relative-position extension (0 when disabled).
  Index position_dim() const { return positional_encoding ? window() : 0; }
  /// Rows of the context matrix produced for features of dimension `feature_dim`.
  Index context_dim(Index feature_dim) const { return heads * (feature_dim + position_dim()); }

  /// Throws ConfigError when a field is out of range.
  void validate() const;

  friend bool operator==(const AttentionConfig&, const AttentionConfig&) = default;
};

struct AttentionHead {
  ParamBlock key_proj;       // head_dim x feature_dim
  ParamBlock query_proj;     // head_dim x feature_dim
  ParamBlock gate;           // additive only: (head_dim + position_dim) x 1
  ParamBlock score_bias;     // additive only: (head_dim + position_dim) x 1
  ParamBlock position_bias;  // positional encoding only: window x 1
};

struct AttentionParams {
  std::vector<AttentionHead> heads;

  /// Projections and gates uniform in [-s, s] with s = sqrt(6 / (fan_in + fan_out));
  /// score and position biases start at zero.
  static AttentionParams init(const AttentionConfig& config, Index feature_dim,
                              std::string_view name, std::mt19937_64& rng);

  Index feature_dim() const;
  /// Blocks in declaration order; blocks unused by the configuration are skipped.
  void collect_params(std::vector<ParamBlock*>& out);
  void collect_params(std::vector<const ParamBlock*>& out) const;
};

/// Scaled dot-product score k.q / sqrt(scale_dim).
template <typename KeyT, typename QueryT>
Scalar score_dot(const Eigen::MatrixBase<KeyT>& key, const Eigen::MatrixBase<QueryT>& query,
                 Index scale_dim) {
  return key.dot(query) / std::sqrt(static_cast<Scalar>(scale_dim));
}

/// Additive score g . tanh(k + q + b).
template <typename KeyT, typename QueryT, typename GateT, typename BiasT>
Scalar score_additive(const Eigen::MatrixBase<KeyT>& key, const Eigen::MatrixBase<QueryT>& query,
                      const Eigen::MatrixBase<GateT>& gate, const Eigen::MatrixBase<BiasT>& bias) {
  return gate.dot((key + query + bias).array().tanh().matrix());
}

struct Projections {
  std::vector<Matrix> keys;     // per head, head_dim x T
  std::vector<Matrix> queries;  // per head, head_dim x T
};

Projections project(const AttentionParams& params, const Matrix& features);

/// Everything the backward pass needs from one forward call.
/// Probabilities and scores are stored as window x T matrices: column t,
/// row (tau - t + left). Rows outside the truncated window hold zero.
struct AttentionTrace {
  AttentionConfig config;
  Index feature_dim = 0;
  Index frames = 0;
  Projections projections;
  std::vector<Matrix> scores;
  std::vector<Matrix> probs;

  Index first(Index t) const { return std::max<Index>(0, t - config.left); }
  Index last(Index t) const { return std::min<Index>(frames - 1, t + config.right); }
};

struct AttentionResult {
  Matrix context;  // context_dim x T
  AttentionTrace trace;
};

AttentionResult attend(const AttentionConfig& config, const AttentionParams& params,
                       const Matrix& features);

/// Accumulates gradients into the attention parameter blocks and returns
/// the gradient with respect to `features`.
Matrix attend_backward(const AttentionConfig& config, AttentionParams& params,
                       const Matrix& features, const AttentionTrace& trace,
                       const Matrix& grad_context);

/// Learnable parameter count of the attention block.
Index param_count(const AttentionConfig& config, Index feature_dim);

}  // namespace aadit

#endif  // AADIT_ATTENTION_HPP_
