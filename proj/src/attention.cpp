// Copyright 2026 The aadit Authors
// SPDX-License-Identifier: Apache-2.0

#include "aadit/attention.hpp"

#include <sstream>
#include <string>

namespace aadit {

namespace {

Matrix uniform_matrix(Index rows, Index cols, Index fan_in, Index fan_out, std::mt19937_64& rng) {
  const Scalar s = std::sqrt(6.0 / static_cast<Scalar>(fan_in + fan_out));
  std::uniform_real_distribution<Scalar> dist(-s, s);
  Matrix m(rows, cols);
  for (Index r = 0; r < rows; ++r) {
    for (Index c = 0; c < cols; ++c) m(r, c) = dist(rng);
  }
  return m;
}

// Key and query of one (t, tau) pair, extended by the relative-position
// block when positional encoding is on: key gets onehot(tau - t + left),
// query gets the trainable position bias.
struct ExtendedPair {
  Vector key;
  Vector query;

  ExtendedPair(Index head_dim, Index position_dim)
      : key(head_dim + position_dim), query(head_dim + position_dim) {}

  void set_query(const AttentionHead& head, const Matrix& queries, Index t, Index head_dim,
                 Index position_dim) {
    query.head(head_dim) = queries.col(t);
    if (position_dim > 0) query.tail(position_dim) = head.position_bias.value.col(0);
  }

  void set_key(const Matrix& keys, Index tau, Index rel, Index head_dim, Index position_dim) {
    key.head(head_dim) = keys.col(tau);
    if (position_dim > 0) {
      key.tail(position_dim).setZero();
      key(head_dim + rel) = 1.0;
    }
  }
};

Scalar pair_score(const AttentionConfig& config, const AttentionHead& head,
                  const ExtendedPair& pair) {
  if (config.score == ScoreType::kDotProduct) {
    return score_dot(pair.key, pair.query, pair.key.size());
  }
  return score_additive(pair.key, pair.query, head.gate.value.col(0),
                        head.score_bias.value.col(0));
}

void check_features(const AttentionParams& params, const Matrix& features, const char* where) {
  if (params.heads.empty()) throw ConfigError(std::string(where) + ": no attention heads");
  if (features.rows() != params.feature_dim()) {
    std::ostringstream msg;
    msg << where << ": features have " << features.rows() << " rows, attention expects "
        << params.feature_dim();
    throw ConfigError(msg.str());
  }
}

}  // namespace

void AttentionConfig::validate() const {
  if (left < 0 || right < 0) throw ConfigError("attention: window contexts must be >= 0");
  if (key_dim < 1) throw ConfigError("attention: key dimension must be >= 1");
  if (heads < 1) throw ConfigError("attention: head count must be >= 1");
  if (key_dim % heads != 0) {
    throw ConfigError("attention: key dimension " + std::to_string(key_dim) +
                      " is not divisible by " + std::to_string(heads) + " heads");
  }
}

AttentionParams AttentionParams::init(const AttentionConfig& config, Index feature_dim,
                                      std::string_view name, std::mt19937_64& rng) {
  config.validate();
  if (feature_dim < 1) throw ConfigError("attention: feature dimension must be >= 1");
  const Index d = config.head_dim();
  const Index ext = d + config.position_dim();
  AttentionParams params;
  for (Index h = 0; h < config.heads; ++h) {
    const std::string prefix = std::string(name) + ".head" + std::to_string(h);
    AttentionHead head;
    head.key_proj = ParamBlock(prefix + ".key", uniform_matrix(d, feature_dim, feature_dim, d, rng));
    head.query_proj =
        ParamBlock(prefix + ".query", uniform_matrix(d, feature_dim, feature_dim, d, rng));
    if (config.score == ScoreType::kAdditive) {
      head.gate = ParamBlock(prefix + ".gate", uniform_matrix(ext, 1, ext, 1, rng));
      head.score_bias = ParamBlock(prefix + ".score_bias", Matrix::Zero(ext, 1));
    }
    if (config.positional_encoding) {
      head.position_bias =
          ParamBlock(prefix + ".position_bias", Matrix::Zero(config.window(), 1));
    }
    params.heads.push_back(std::move(head));
  }
  return params;
}

Index AttentionParams::feature_dim() const {
  return heads.empty() ? 0 : heads.front().key_proj.value.cols();
}

void AttentionParams::collect_params(std::vector<ParamBlock*>& out) {
  for (AttentionHead& head : heads) {
    for (ParamBlock* block :
         {&head.key_proj, &head.query_proj, &head.gate, &head.score_bias, &head.position_bias}) {
      if (block->value.size() > 0) out.push_back(block);
    }
  }
}

void AttentionParams::collect_params(std::vector<const ParamBlock*>& out) const {
  for (const AttentionHead& head : heads) {
    for (const ParamBlock* block :
         {&head.key_proj, &head.query_proj, &head.gate, &head.score_bias, &head.position_bias}) {
      if (block->value.size() > 0) out.push_back(block);
    }
  }
}

Projections project(const AttentionParams& params, const Matrix& features) {
  check_features(params, features, "project");
  Projections out;
  out.keys.reserve(params.heads.size());
  out.queries.reserve(params.heads.size());
  for (const AttentionHead& head : params.heads) {
    out.keys.push_back(head.key_proj.value * features);
    out.queries.push_back(head.query_proj.value * features);
  }
  return out;
}

AttentionResult attend(const AttentionConfig& config, const AttentionParams& params,
                       const Matrix& features) {
  config.validate();
  if (features.cols() < 1) throw InputError("attend: empty sequence");
  check_features(params, features, "attend");
  if (static_cast<Index>(params.heads.size()) != config.heads) {
    throw ConfigError("attend: parameter head count does not match configuration");
  }

  const Index rf = features.rows();
  const Index frames = features.cols();
  const Index d = config.head_dim();
  const Index pd = config.position_dim();
  const Index block = rf + pd;

  AttentionResult result;
  AttentionTrace& trace = result.trace;
  trace.config = config;
  trace.feature_dim = rf;
  trace.frames = frames;
  trace.projections = project(params, features);
  result.context = Matrix::Zero(config.context_dim(rf), frames);

  ExtendedPair pair(d, pd);
  for (Index h = 0; h < config.heads; ++h) {
    const AttentionHead& head = params.heads[static_cast<std::size_t>(h)];
    const Matrix& keys = trace.projections.keys[static_cast<std::size_t>(h)];
    const Matrix& queries = trace.projections.queries[static_cast<std::size_t>(h)];
    Matrix scores = Matrix::Zero(config.window(), frames);
    Matrix probs = Matrix::Zero(config.window(), frames);

    for (Index t = 0; t < frames; ++t) {
      const Index lo = trace.first(t);
      const Index hi = trace.last(t);
      const Index row0 = lo - t + config.left;
      const Index count = hi - lo + 1;
      pair.set_query(head, queries, t, d, pd);
      for (Index tau = lo; tau <= hi; ++tau) {
        const Index rel = tau - t + config.left;
        pair.set_key(keys, tau, rel, d, pd);
        scores(rel, t) = pair_score(config, head, pair);
      }
      auto window_scores = scores.col(t).segment(row0, count);
      auto window_probs = probs.col(t).segment(row0, count);
      window_probs = (window_scores.array() - window_scores.maxCoeff()).exp().matrix();
      window_probs /= window_probs.sum();

      auto ctx = result.context.col(t).segment(h * block, block);
      for (Index tau = lo; tau <= hi; ++tau) {
        ctx.head(rf) += probs(tau - t + config.left, t) * features.col(tau);
      }
      if (pd > 0) ctx.tail(pd) = probs.col(t);
    }
    trace.scores.push_back(std::move(scores));
    trace.probs.push_back(std::move(probs));
  }
  return result;
}

Matrix attend_backward(const AttentionConfig& config, AttentionParams& params,
                       const Matrix& features, const AttentionTrace& trace,
                       const Matrix& grad_context) {
  check_features(params, features, "attend_backward");
  if (!(trace.config == config) || trace.frames != features.cols() ||
      trace.feature_dim != features.rows() ||
      static_cast<Index>(trace.probs.size()) != config.heads ||
      static_cast<Index>(params.heads.size()) != config.heads) {
    throw InternalError("attend_backward: trace does not belong to this forward call");
  }
  const Index rf = features.rows();
  const Index frames = features.cols();
  if (grad_context.rows() != config.context_dim(rf) || grad_context.cols() != frames) {
    throw InternalError("attend_backward: grad_context shape does not match the context");
  }
  const Index d = config.head_dim();
  const Index pd = config.position_dim();
  const Index ext = d + pd;
  const Index block = rf + pd;
  const bool additive = config.score == ScoreType::kAdditive;
  const Scalar inv_scale = 1.0 / std::sqrt(static_cast<Scalar>(ext));

  Matrix grad_features = Matrix::Zero(rf, frames);
  ExtendedPair pair(d, pd);
  Vector grad_a(config.window());
  Vector grad_e(config.window());
  Vector grad_query_ext(ext);
  Vector grad_key_ext(ext);
  Vector hidden(ext);

  for (Index h = 0; h < config.heads; ++h) {
    AttentionHead& head = params.heads[static_cast<std::size_t>(h)];
    const Matrix& keys = trace.projections.keys[static_cast<std::size_t>(h)];
    const Matrix& queries = trace.projections.queries[static_cast<std::size_t>(h)];
    const Matrix& probs = trace.probs[static_cast<std::size_t>(h)];
    Matrix grad_keys = Matrix::Zero(d, frames);
    Matrix grad_queries = Matrix::Zero(d, frames);

    for (Index t = 0; t < frames; ++t) {
      const Index lo = trace.first(t);
      const Index hi = trace.last(t);
      const auto grad_c = grad_context.col(t).segment(h * block, block);

      // Value path and gradient w.r.t. the attention probabilities.
      Scalar weighted = 0;
      for (Index tau = lo; tau <= hi; ++tau) {
        const Index rel = tau - t + config.left;
        const Scalar a = probs(rel, t);
        grad_features.col(tau) += a * grad_c.head(rf);
        grad_a(rel) = grad_c.head(rf).dot(features.col(tau)) + (pd > 0 ? grad_c(rf + rel) : 0.0);
        weighted += a * grad_a(rel);
      }
      // Softmax Jacobian over the truncated window.
      for (Index tau = lo; tau <= hi; ++tau) {
        const Index rel = tau - t + config.left;
        grad_e(rel) = probs(rel, t) * (grad_a(rel) - weighted);
      }

      pair.set_query(head, queries, t, d, pd);
      grad_query_ext.setZero();
      for (Index tau = lo; tau <= hi; ++tau) {
        const Index rel = tau - t + config.left;
        const Scalar ge = grad_e(rel);
        pair.set_key(keys, tau, rel, d, pd);
        if (additive) {
          hidden = (pair.key + pair.query + head.score_bias.value.col(0)).array().tanh().matrix();
          head.gate.grad.col(0) += ge * hidden;
          grad_key_ext = ge * head.gate.value.col(0).cwiseProduct(
                                  (1.0 - hidden.array().square()).matrix());
          head.score_bias.grad.col(0) += grad_key_ext;
          grad_query_ext += grad_key_ext;
        } else {
          grad_key_ext = (ge * inv_scale) * pair.query;
          grad_query_ext += (ge * inv_scale) * pair.key;
        }
        grad_keys.col(tau) += grad_key_ext.head(d);
      }
      grad_queries.col(t) += grad_query_ext.head(d);
      if (pd > 0) head.position_bias.grad.col(0) += grad_query_ext.tail(pd);
    }

    head.key_proj.grad.noalias() += grad_keys * features.transpose();
    head.query_proj.grad.noalias() += grad_queries * features.transpose();
    grad_features.noalias() += head.key_proj.value.transpose() * grad_keys;
    grad_features.noalias() += head.query_proj.value.transpose() * grad_queries;
  }
  return grad_features;
}

Index param_count(const AttentionConfig& config, Index feature_dim) {
  config.validate();
  const Index d = config.head_dim();
  const Index pd = config.position_dim();
  Index per_head = 2 * d * feature_dim;
  if (config.score == ScoreType::kAdditive) per_head += 2 * (d + pd);
  per_head += pd;
  return config.heads * per_head;
}

}  // namespace aadit
