// Copyright 2026 The aadit Authors
// SPDX-License-Identifier: Apache-2.0

#include "aadit/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numeric>

namespace aadit {

namespace {

constexpr std::uint64_t kShuffleStream = 0x53485546464c45ULL;

Scalar accuracy(const Matrix& logits, const Labels& labels) {
  const Labels predicted = argmax_columns(logits);
  std::size_t hits = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) hits += predicted[i] == labels[i];
  return static_cast<Scalar>(hits) / static_cast<Scalar>(labels.size());
}

void check_batch(const AdversarialModel& model, const Batch& batch) {
  if (batch.size() == 0) throw InputError("empty batch");
  if (batch.frames.rows() != model.feature.input_dim()) {
    throw ConfigError("batch frame dim " + std::to_string(batch.frames.rows()) +
                      " does not match model input dim " +
                      std::to_string(model.feature.input_dim()));
  }
}

}  // namespace

std::string to_string(Mode mode) {
  switch (mode) {
    case Mode::kBaseline:
      return "baseline";
    case Mode::kAdit:
      return "adit";
    case Mode::kAadit:
      return "aadit";
  }
  return "?";
}

Mode parse_mode(std::string_view text) {
  if (text == "baseline") return Mode::kBaseline;
  if (text == "adit") return Mode::kAdit;
  if (text == "aadit") return Mode::kAadit;
  throw ConfigError("unknown mode '" + std::string(text) + "' (baseline, adit, aadit)");
}

std::string to_string(ScoreType score) {
  return score == ScoreType::kDotProduct ? "dot" : "additive";
}

ScoreType parse_score(std::string_view text) {
  if (text == "dot") return ScoreType::kDotProduct;
  if (text == "additive") return ScoreType::kAdditive;
  throw ConfigError("unknown score type '" + std::string(text) + "' (dot, additive)");
}

Index TrainConfig::feature_dim() const {
  if (split_depth < 1 || split_depth > static_cast<Index>(acoustic_hidden.size())) return 0;
  return acoustic_hidden[static_cast<std::size_t>(split_depth - 1)];
}

void TrainConfig::validate() const {
  if (!(lambda >= 0)) throw ConfigError("train.lambda must be >= 0");
  if (!(learning_rate > 0)) throw ConfigError("train.mu must be > 0");
  if (split_depth < 1 || split_depth > static_cast<Index>(acoustic_hidden.size())) {
    throw ConfigError("train.split_depth must lie in [1, " +
                      std::to_string(acoustic_hidden.size()) + "] for " +
                      std::to_string(acoustic_hidden.size()) + " acoustic hidden layers");
  }
  if (epochs < 0) throw ConfigError("train.epochs must be >= 0");
  if (batch_size < 1) throw ConfigError("train.batch must be >= 1");
  if (input_dim < 1 || classes < 2 || domains < 2) {
    throw ConfigError("model dims: input_dim >= 1, classes >= 2, domains >= 2 required");
  }
  for (Index w : acoustic_hidden) {
    if (w < 1) throw ConfigError("model.acoustic_hidden widths must be >= 1");
  }
  for (Index w : domain_hidden) {
    if (w < 1) throw ConfigError("model.domain_hidden widths must be >= 1");
  }
  if (mode == Mode::kAadit) attention.validate();
}

void TrainConfig::write(KeyValueWriter& out) const {
  out.add("train.mode", to_string(mode));
  out.add("train.lambda", lambda);
  out.add("train.mu", learning_rate);
  out.add("train.split_depth", split_depth);
  out.add("train.epochs", epochs);
  out.add("train.batch", batch_size);
  out.add("train.seed", std::to_string(seed));
  out.add("attention.left", attention.left);
  out.add("attention.right", attention.right);
  out.add("attention.key_dim", attention.key_dim);
  out.add("attention.score", to_string(attention.score));
  out.add("attention.heads", attention.heads);
  out.add("attention.pos_enc", attention.positional_encoding);
  out.add("model.input_dim", input_dim);
  out.add("model.acoustic_hidden", acoustic_hidden);
  out.add("model.domain_hidden", domain_hidden);
  out.add("model.classes", classes);
  out.add("model.domains", domains);
}

void TrainConfig::read(const KeyValueReader& in) {
  std::string text;
  if (in.has("train.mode")) {
    in.read("train.mode", text);
    mode = parse_mode(text);
  }
  in.read("train.lambda", lambda);
  in.read("train.mu", learning_rate);
  in.read("train.split_depth", split_depth);
  in.read("train.epochs", epochs);
  in.read("train.batch", batch_size);
  in.read("train.seed", seed);
  in.read("attention.left", attention.left);
  in.read("attention.right", attention.right);
  in.read("attention.key_dim", attention.key_dim);
  if (in.has("attention.score")) {
    in.read("attention.score", text);
    attention.score = parse_score(text);
  }
  in.read("attention.heads", attention.heads);
  in.read("attention.pos_enc", attention.positional_encoding);
  in.read("model.input_dim", input_dim);
  in.read("model.acoustic_hidden", acoustic_hidden);
  in.read("model.domain_hidden", domain_hidden);
  in.read("model.classes", classes);
  in.read("model.domains", domains);
}

std::string TrainConfig::canonical() const {
  KeyValueWriter out;
  write(out);
  return out.str();
}

AdversarialModel AdversarialModel::init(const TrainConfig& config, std::mt19937_64& rng) {
  config.validate();
  AdversarialModel model;
  model.mode = config.mode;
  const auto split = static_cast<std::size_t>(config.split_depth);

  std::vector<Index> feature_dims{config.input_dim};
  feature_dims.insert(feature_dims.end(), config.acoustic_hidden.begin(),
                      config.acoustic_hidden.begin() + static_cast<std::ptrdiff_t>(split));
  std::vector<Index> senone_dims{config.feature_dim()};
  senone_dims.insert(senone_dims.end(),
                     config.acoustic_hidden.begin() + static_cast<std::ptrdiff_t>(split),
                     config.acoustic_hidden.end());
  senone_dims.push_back(config.classes);

  model.feature = FeedForwardStack::glorot("feature", feature_dims, Activation::kTanh, rng);
  model.senone = FeedForwardStack::glorot("senone", senone_dims, Activation::kIdentity, rng);
  if (config.mode != Mode::kBaseline) {
    const Index domain_in = config.mode == Mode::kAadit
                                ? config.attention.context_dim(config.feature_dim())
                                : config.feature_dim();
    std::vector<Index> domain_dims{domain_in};
    domain_dims.insert(domain_dims.end(), config.domain_hidden.begin(),
                       config.domain_hidden.end());
    domain_dims.push_back(config.domains);
    model.domain = FeedForwardStack::glorot("domain", domain_dims, Activation::kIdentity, rng);
  }
  if (config.mode == Mode::kAadit) {
    model.attention_config = config.attention;
    model.attention =
        AttentionParams::init(config.attention, config.feature_dim(), "attention", rng);
  }
  return model;
}

std::vector<ParamBlock*> AdversarialModel::params() {
  std::vector<ParamBlock*> out;
  feature.collect_params(out);
  senone.collect_params(out);
  domain.collect_params(out);
  attention.collect_params(out);
  return out;
}

std::vector<const ParamBlock*> AdversarialModel::params() const {
  std::vector<const ParamBlock*> out;
  feature.collect_params(out);
  senone.collect_params(out);
  domain.collect_params(out);
  attention.collect_params(out);
  return out;
}

void AdversarialModel::zero_grads() {
  for (ParamBlock* block : params()) block->zero_grad();
}

Batch Batch::from(std::span<const SequenceSample* const> samples) {
  Batch batch;
  if (samples.empty()) return batch;
  Index total = 0;
  batch.offsets.push_back(0);
  for (const SequenceSample* s : samples) {
    total += s->frames.cols();
    batch.offsets.push_back(total);
  }
  const Index rows = samples.front()->frames.rows();
  batch.frames.resize(rows, total);
  batch.classes.reserve(static_cast<std::size_t>(total));
  batch.domains.reserve(static_cast<std::size_t>(total));
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const SequenceSample& s = *samples[i];
    if (s.frames.rows() != rows) throw InputError("batch: sequences differ in frame dim");
    if (static_cast<Index>(s.classes.size()) != s.frames.cols() ||
        static_cast<Index>(s.domains.size()) != s.frames.cols()) {
      throw InputError("batch: label count does not match frame count");
    }
    batch.frames.middleCols(batch.offsets[i], s.frames.cols()) = s.frames;
    batch.classes.insert(batch.classes.end(), s.classes.begin(), s.classes.end());
    batch.domains.insert(batch.domains.end(), s.domains.begin(), s.domains.end());
  }
  return batch;
}

Batch Batch::from(const std::vector<SequenceSample>& samples) {
  std::vector<const SequenceSample*> ptrs;
  ptrs.reserve(samples.size());
  for (const SequenceSample& s : samples) ptrs.push_back(&s);
  return from(ptrs);
}

Matrix grl_backward(const Matrix& grad, double lambda) { return -lambda * grad; }

BranchResult senone_loss(AdversarialModel& model, const Matrix& features, const Batch& batch) {
  ForwardResult fwd = stack_forward(model.senone, features);
  XentResult xent = softmax_xent(fwd.output, batch.classes);
  BranchResult result;
  result.loss = xent.loss;
  result.accuracy = accuracy(fwd.output, batch.classes);
  result.grad_features = stack_backward(model.senone, fwd.cache, xent.grad_logits);
  return result;
}

BranchResult senone_loss(AdversarialModel& model, const Batch& batch) {
  check_batch(model, batch);
  return senone_loss(model, stack_apply(model.feature, batch.frames), batch);
}

Matrix domain_input(const AdversarialModel& model, const Matrix& features,
                    std::span<const Index> offsets) {
  if (model.mode != Mode::kAadit) return features;
  const AttentionConfig& cfg = model.attention_config;
  Matrix context(cfg.context_dim(features.rows()), features.cols());
  for (std::size_t i = 0; i + 1 < offsets.size(); ++i) {
    const Index len = offsets[i + 1] - offsets[i];
    context.middleCols(offsets[i], len) =
        attend(cfg, model.attention, features.middleCols(offsets[i], len)).context;
  }
  return context;
}

BranchResult domain_loss(AdversarialModel& model, const Matrix& features, const Batch& batch) {
  if (!model.has_domain_branch()) {
    throw ConfigError("domain_loss: baseline model has no domain classifier");
  }
  for (Label d : batch.domains) {
    if (d < 0 || d >= model.domain.output_dim()) {
      throw InputError("domain_loss: domain label " + std::to_string(d) + " outside [0, " +
                       std::to_string(model.domain.output_dim()) + ")");
    }
  }
  BranchResult result;
  if (model.mode == Mode::kAdit) {
    ForwardResult fwd = stack_forward(model.domain, features);
    XentResult xent = softmax_xent(fwd.output, batch.domains);
    result.loss = xent.loss;
    result.accuracy = accuracy(fwd.output, batch.domains);
    result.grad_features = stack_backward(model.domain, fwd.cache, xent.grad_logits);
    return result;
  }

  const AttentionConfig& cfg = model.attention_config;
  const std::size_t count = batch.sequences();
  std::vector<Matrix> seq_features(count);
  std::vector<AttentionTrace> traces(count);
  Matrix context(cfg.context_dim(features.rows()), features.cols());
  for (std::size_t i = 0; i < count; ++i) {
    const Index len = batch.offsets[i + 1] - batch.offsets[i];
    seq_features[i] = features.middleCols(batch.offsets[i], len);
    AttentionResult att = attend(cfg, model.attention, seq_features[i]);
    context.middleCols(batch.offsets[i], len) = att.context;
    traces[i] = std::move(att.trace);
  }
  ForwardResult fwd = stack_forward(model.domain, context);
  XentResult xent = softmax_xent(fwd.output, batch.domains);
  result.loss = xent.loss;
  result.accuracy = accuracy(fwd.output, batch.domains);
  const Matrix grad_context = stack_backward(model.domain, fwd.cache, xent.grad_logits);
  result.grad_features.resize(features.rows(), features.cols());
  for (std::size_t i = 0; i < count; ++i) {
    const Index len = batch.offsets[i + 1] - batch.offsets[i];
    result.grad_features.middleCols(batch.offsets[i], len) =
        attend_backward(cfg, model.attention, seq_features[i], traces[i],
                        grad_context.middleCols(batch.offsets[i], len));
  }
  return result;
}

BranchResult domain_loss(AdversarialModel& model, const Batch& batch) {
  check_batch(model, batch);
  return domain_loss(model, stack_apply(model.feature, batch.frames), batch);
}

StepLosses accumulate_gradients(AdversarialModel& model, const Batch& batch, double lambda,
                                const GradientHooks& hooks) {
  check_batch(model, batch);
  model.zero_grads();
  ForwardResult fwd = stack_forward(model.feature, batch.frames);
  BranchResult senone = senone_loss(model, fwd.output, batch);
  StepLosses losses;
  losses.senone = senone.loss;
  losses.class_accuracy = senone.accuracy;
  Matrix grad_features = std::move(senone.grad_features);
  if (model.has_domain_branch()) {
    BranchResult domain = domain_loss(model, fwd.output, batch);
    losses.domain = domain.loss;
    losses.domain_accuracy = domain.accuracy;
    losses.has_domain = true;
    const double reversal = hooks.flip_reversal_sign ? -lambda : lambda;
    grad_features += grl_backward(domain.grad_features, reversal);
  }
  stack_backward(model.feature, fwd.cache, grad_features);
  return losses;
}

std::string metrics_csv_header() { return "step,l_senone,l_domain,class_acc,domain_acc,probe_acc"; }

std::string format_metrics_row(const MetricsRow& row) {
  std::string out = std::to_string(row.step);
  for (const auto& field :
       {row.l_senone, row.l_domain, row.class_acc, row.domain_acc, row.probe_acc}) {
    out += ',';
    if (field) out += format_double(*field);
  }
  return out;
}

MetricsRow train_step(AdversarialModel& model, const Batch& batch, const TrainConfig& config,
                      const GradientHooks& hooks) {
  const StepLosses losses = accumulate_gradients(model, batch, config.lambda, hooks);
  if (!std::isfinite(losses.senone) || (losses.has_domain && !std::isfinite(losses.domain))) {
    throw NumericalError("train_step: non-finite loss (senone " + format_double(losses.senone) +
                         ", domain " + format_double(losses.domain) + ")");
  }
  std::vector<ParamBlock*> blocks = model.params();
  sgd_step(blocks, config.learning_rate);
  MetricsRow row;
  row.l_senone = losses.senone;
  row.class_acc = losses.class_accuracy;
  if (losses.has_domain) {
    row.l_domain = losses.domain;
    row.domain_acc = losses.domain_accuracy;
  }
  return row;
}

TrainState TrainState::fresh(const TrainConfig& config) {
  TrainState state;
  state.config = config;
  std::mt19937_64 init_rng(config.seed);
  state.model = AdversarialModel::init(config, init_rng);
  state.shuffle_rng.seed(config.seed ^ kShuffleStream);
  return state;
}

void check_compatible(const TrainConfig& config, const DatasetConfig& data) {
  if (config.input_dim != data.frame_dim || config.classes != data.classes ||
      config.domains != data.domains) {
    throw ConfigError("model dims (input " + std::to_string(config.input_dim) + ", classes " +
                      std::to_string(config.classes) + ", domains " +
                      std::to_string(config.domains) + ") do not match dataset (frame_dim " +
                      std::to_string(data.frame_dim) + ", classes " +
                      std::to_string(data.classes) + ", domains " +
                      std::to_string(data.domains) + ")");
  }
}

std::size_t steps_per_epoch(const TrainConfig& config, const Dataset& dataset) {
  const auto n = dataset.train.size();
  const auto b = static_cast<std::size_t>(config.batch_size);
  return (n + b - 1) / b;
}

std::vector<MetricsRow> continue_training(TrainState& state, const Dataset& dataset,
                                          const EpochCallback& on_epoch) {
  const TrainConfig& config = state.config;
  config.validate();
  check_compatible(config, dataset.config);
  if (dataset.train.empty()) throw InputError("training split is empty");
  const std::size_t per_epoch = steps_per_epoch(config, dataset);
  if (state.step % per_epoch != 0) {
    throw InternalError("training state is not at an epoch boundary");
  }
  const auto batch_size = static_cast<std::size_t>(config.batch_size);
  std::vector<MetricsRow> history;
  std::vector<std::size_t> order(dataset.train.size());
  for (auto epoch = static_cast<Index>(state.step / per_epoch); epoch < config.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::shuffle(order.begin(), order.end(), state.shuffle_rng);
    double frames = 0;
    double sums[4] = {0, 0, 0, 0};
    for (std::size_t start = 0; start < order.size(); start += batch_size) {
      std::vector<const SequenceSample*> members;
      for (std::size_t k = start; k < std::min(order.size(), start + batch_size); ++k) {
        members.push_back(&dataset.train[order[k]]);
      }
      const Batch batch = Batch::from(members);
      const MetricsRow row = train_step(state.model, batch, config);
      ++state.step;
      const auto n = static_cast<double>(batch.size());
      frames += n;
      sums[0] += n * *row.l_senone;
      sums[1] += n * row.l_domain.value_or(0);
      sums[2] += n * *row.class_acc;
      sums[3] += n * row.domain_acc.value_or(0);
    }
    MetricsRow summary;
    summary.step = state.step;
    summary.l_senone = sums[0] / frames;
    summary.class_acc = sums[2] / frames;
    if (state.model.has_domain_branch()) {
      summary.l_domain = sums[1] / frames;
      summary.domain_acc = sums[3] / frames;
    }
    history.push_back(summary);
    if (on_epoch) on_epoch(state, epoch + 1);
  }
  return history;
}

TrainResult train_loop(const TrainConfig& config, const Dataset& dataset,
                       const std::string& checkpoint_dir) {
  TrainState state = TrainState::fresh(config);
  EpochCallback save;
  if (!checkpoint_dir.empty()) {
    std::error_code ec;
    std::filesystem::create_directories(checkpoint_dir, ec);
    if (ec) throw IoError(checkpoint_dir + ": cannot create directory: " + ec.message());
    save = [&checkpoint_dir](const TrainState& s, Index epoch) {
      checkpoint_save(s, checkpoint_dir + "/epoch_" + std::to_string(epoch) + ".aadl");
    };
  }
  TrainResult result;
  result.history = continue_training(state, dataset, save);
  if (!checkpoint_dir.empty()) checkpoint_save(state, checkpoint_dir + "/final.aadl");
  result.model = std::move(state.model);
  return result;
}

}  // namespace aadit
