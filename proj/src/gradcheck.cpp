// Copyright 2026 The aadit Authors
// SPDX-License-Identifier: Apache-2.0

#include "aadit/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace aadit {

namespace {

constexpr Index kFrames = 9;
constexpr Index kSequences = 2;

std::string group_of(const std::string& block_name) {
  return block_name.substr(0, block_name.find('.'));
}

std::string describe(const TrainConfig& config) {
  if (config.mode != Mode::kAadit) return to_string(config.mode);
  return "aadit/" + to_string(config.attention.score) + "/H" +
         std::to_string(config.attention.heads) +
         (config.attention.positional_encoding ? "/pe" : "/nope");
}

}  // namespace

double max_relative_error(const Matrix& analytic, const Matrix& numeric, double floor) {
  double worst = 0;
  for (Index j = 0; j < analytic.cols(); ++j) {
    for (Index i = 0; i < analytic.rows(); ++i) {
      const double a = analytic(i, j);
      const double n = numeric(i, j);
      const double denom = std::max({std::abs(a), std::abs(n), floor});
      worst = std::max(worst, std::abs(a - n) / denom);
    }
  }
  return worst;
}

double GradCheckOptions::resolved_tolerance() const {
  if (tolerance > 0) return tolerance;
  return h <= 1e-5 ? 1e-4 : 1e-2;
}

TrainConfig gradcheck_config(Mode mode, ScoreType score, Index heads, bool positional_encoding) {
  TrainConfig config;
  config.mode = mode;
  config.input_dim = 6;
  config.acoustic_hidden = {7, 5, 6};
  config.split_depth = 2;
  config.domain_hidden = {4};
  config.classes = 3;
  config.domains = 3;
  config.attention.left = 2;
  config.attention.right = 2;
  config.attention.key_dim = 8;
  config.attention.heads = heads;
  config.attention.score = score;
  config.attention.positional_encoding = positional_encoding;
  return config;
}

Batch gradcheck_batch(const TrainConfig& config, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_int_distribution<Label> cls(0, static_cast<Label>(config.classes - 1));
  std::uniform_int_distribution<Label> dom(0, static_cast<Label>(config.domains - 1));
  std::vector<SequenceSample> samples(kSequences);
  for (SequenceSample& s : samples) {
    s.frames.resize(config.input_dim, kFrames);
    for (Index t = 0; t < kFrames; ++t) {
      for (Index r = 0; r < config.input_dim; ++r) s.frames(r, t) = normal(rng);
    }
    for (Index t = 0; t < kFrames; ++t) s.classes.push_back(cls(rng));
    s.domains.assign(kFrames, dom(rng));
  }
  return Batch::from(samples);
}

Scalar senone_objective(const AdversarialModel& model, const Batch& batch) {
  const Matrix logits = stack_apply(model.senone, stack_apply(model.feature, batch.frames));
  return softmax_xent(logits, batch.classes).loss;
}

Scalar domain_objective(const AdversarialModel& model, const Batch& batch) {
  const Matrix features = stack_apply(model.feature, batch.frames);
  const Matrix logits = stack_apply(model.domain, domain_input(model, features, batch.offsets));
  return softmax_xent(logits, batch.domains).loss;
}

BranchGradients branch_gradients(AdversarialModel& model, const Batch& batch) {
  BranchGradients out;
  const auto snapshot = [&model] {
    std::vector<Matrix> grads;
    for (const ParamBlock* block : std::as_const(model).params()) grads.push_back(block->grad);
    return grads;
  };
  model.zero_grads();
  ForwardResult fwd = stack_forward(model.feature, batch.frames);
  const BranchResult senone = senone_loss(model, fwd.output, batch);
  stack_backward(model.feature, fwd.cache, senone.grad_features);
  out.senone = snapshot();
  model.zero_grads();
  if (model.has_domain_branch()) {
    const BranchResult domain = domain_loss(model, fwd.output, batch);
    stack_backward(model.feature, fwd.cache, domain.grad_features);
    out.domain = snapshot();
    model.zero_grads();
  }
  return out;
}

std::vector<GradCheckRow> run_gradcheck(const GradCheckOptions& options) {
  std::vector<TrainConfig> configs;
  for (ScoreType score : {ScoreType::kDotProduct, ScoreType::kAdditive}) {
    for (Index heads : {1, 4}) {
      for (bool pe : {false, true}) {
        configs.push_back(gradcheck_config(Mode::kAadit, score, heads, pe));
      }
    }
  }
  configs.push_back(gradcheck_config(Mode::kAdit, ScoreType::kDotProduct, 1, false));

  const double tol = options.resolved_tolerance();
  std::vector<GradCheckRow> rows;
  std::uint64_t instance = 0;
  for (TrainConfig& config : configs) {
    config.seed = options.seed + instance;
    config.lambda = options.lambda;
    std::mt19937_64 init_rng(config.seed);
    AdversarialModel model = AdversarialModel::init(config, init_rng);
    // Nonzero biases so the checks exercise every term.
    std::mt19937_64 jitter_rng(config.seed ^ 0xb1a5ULL);
    std::uniform_real_distribution<double> jitter(-0.3, 0.3);
    for (ParamBlock* block : model.params()) {
      if (block->value.isZero(0.0)) block->value = block->value.unaryExpr([&](double) {
        return jitter(jitter_rng);
      });
    }
    const Batch batch = gradcheck_batch(config, config.seed + 1000);
    ++instance;

    const BranchGradients analytic = branch_gradients(model, batch);
    GradientHooks hooks;
    hooks.flip_reversal_sign = options.flip_reversal_sign;
    accumulate_gradients(model, batch, config.lambda, hooks);
    std::vector<Matrix> composite;
    for (const ParamBlock* block : std::as_const(model).params()) composite.push_back(block->grad);
    model.zero_grads();

    std::map<std::string, double> worst;
    const auto record = [&](const std::string& group, double err) {
      auto [it, inserted] = worst.try_emplace(group, err);
      if (!inserted) it->second = std::max(it->second, err);
    };
    const std::vector<ParamBlock*> blocks = model.params();
    for (std::size_t b = 0; b < blocks.size(); ++b) {
      ParamBlock& block = *blocks[b];
      const std::string owner = group_of(block.name);
      if (owner == "feature" || owner == "senone") {
        const Matrix numeric = finite_diff_grad(
            [&] { return senone_objective(model, batch); }, block.value, options.h);
        record("senone->" + owner, max_relative_error(analytic.senone[b], numeric));
      }
      if (model.has_domain_branch() && owner != "senone") {
        const Matrix numeric = finite_diff_grad(
            [&] { return domain_objective(model, batch); }, block.value, options.h);
        record("domain->" + owner, max_relative_error(analytic.domain[b], numeric));
      }
      if (model.has_domain_branch() && owner == "feature") {
        const Matrix numeric = finite_diff_grad(
            [&] {
              return senone_objective(model, batch) -
                     config.lambda * domain_objective(model, batch);
            },
            block.value, options.h);
        record("composite->feature", max_relative_error(composite[b], numeric));
      }
    }
    for (const auto& [group, err] : worst) {
      rows.push_back({describe(config), group, err, err <= tol});
    }
  }
  return rows;
}

}  // namespace aadit
