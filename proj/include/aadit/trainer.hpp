// Copyright 2026 The aadit Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef AADIT_TRAINER_HPP_
#define AADIT_TRAINER_HPP_

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "aadit/attention.hpp"
#include "aadit/config.hpp"
#include "aadit/nn.hpp"
#include "aadit/synth.hpp"
#include "aadit/types.hpp"

namespace aadit {

/// baseline: acoustic model only. adit: domain classifier on the deep
/// features behind a gradient reversal. aadit: attention block between the
/// reversal and the domain classifier.
enum class Mode { kBaseline, kAdit, kAadit };

std::string to_string(Mode mode);
Mode parse_mode(std::string_view text);
std::string to_string(ScoreType score);
ScoreType parse_score(std::string_view text);

struct TrainConfig {
  Mode mode = Mode::kAadit;
  double lambda = 0.5;
  double learning_rate = 0.1;
  /// Number of acoustic-model layers that form the feature extractor.
  Index split_depth = 4;
  Index epochs = 10;
  Index batch_size = 8;
  std::uint64_t seed = 1;
  AttentionConfig attention{.left = 3, .right = 3, .key_dim = 16, .heads = 4};

  Index input_dim = 20;
  /// Hidden widths of the acoustic model; the first `split_depth` layers
  /// form the feature extractor, the rest plus the output layer the
  /// classifier.
  std::vector<Index> acoustic_hidden{32, 32, 32, 16, 32};
  std::vector<Index> domain_hidden{32};
  Index classes = 10;
  Index domains = 4;

  Index feature_dim() const;
  void validate() const;

  void write(KeyValueWriter& out) const;
  void read(const KeyValueReader& in);
  /// Canonical `key=value` text, embedded in checkpoints.
  std::string canonical() const;

  friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

/// Acoustic model (feature extractor + classifier) plus the adversarial
/// branch used only during training.
struct AdversarialModel {
  Mode mode = Mode::kBaseline;
  FeedForwardStack feature;  // x -> f
  FeedForwardStack senone;   // f -> class logits
  FeedForwardStack domain;   // f or c -> domain logits; empty in baseline mode
  AttentionConfig attention_config;
  AttentionParams attention;  // aadit only

  /// Draws feature, classifier, domain classifier, then attention
  /// parameters, in that order, from `rng`.
  static AdversarialModel init(const TrainConfig& config, std::mt19937_64& rng);

  Index feature_dim() const { return feature.output_dim(); }
  bool has_domain_branch() const { return mode != Mode::kBaseline; }

  /// Parameter blocks in declaration order: feature, classifier, domain, attention.
  std::vector<ParamBlock*> params();
  std::vector<const ParamBlock*> params() const;
  void zero_grads();
};

/// A minibatch of whole sequences, concatenated column-wise.
struct Batch {
  Matrix frames;
  Labels classes;
  Labels domains;
  /// Column offsets of each sequence, plus the total column count.
  std::vector<Index> offsets;

  static Batch from(std::span<const SequenceSample* const> samples);
  static Batch from(const std::vector<SequenceSample>& samples);
  Index size() const { return frames.cols(); }
  std::size_t sequences() const { return offsets.empty() ? 0 : offsets.size() - 1; }
};

/// Backward pass of the gradient reversal layer: -lambda * grad. The
/// forward pass is the identity.
Matrix grl_backward(const Matrix& grad, double lambda);

struct BranchResult {
  Scalar loss = 0;
  Scalar accuracy = 0;
  /// Gradient of the branch loss with respect to the deep features.
  Matrix grad_features;
};

/// Mean class cross-entropy through the classifier. Accumulates classifier
/// gradients.
BranchResult senone_loss(AdversarialModel& model, const Matrix& features, const Batch& batch);
BranchResult senone_loss(AdversarialModel& model, const Batch& batch);

/// Mean domain cross-entropy through the (attention and) domain classifier.
/// Accumulates attention and domain-classifier gradients.
BranchResult domain_loss(AdversarialModel& model, const Matrix& features, const Batch& batch);
BranchResult domain_loss(AdversarialModel& model, const Batch& batch);

/// Forward-only domain classifier input: the features themselves (adit) or
/// per-sequence attention contexts (aadit).
Matrix domain_input(const AdversarialModel& model, const Matrix& features,
                    std::span<const Index> offsets);

struct StepLosses {
  Scalar senone = 0;
  Scalar domain = 0;
  Scalar class_accuracy = 0;
  Scalar domain_accuracy = 0;
  bool has_domain = false;
};

/// Test hook: flips the sign applied by the reversal layer.
struct GradientHooks {
  bool flip_reversal_sign = false;
};

/// Zeroes all gradients, then accumulates the composite gradients of one
/// step: feature extractor gets d(senone)/df - lambda * d(domain)/df, the
/// classifier d(senone), attention and domain classifier d(domain).
StepLosses accumulate_gradients(AdversarialModel& model, const Batch& batch, double lambda,
                                const GradientHooks& hooks = {});

struct MetricsRow {
  std::uint64_t step = 0;
  std::optional<double> l_senone;
  std::optional<double> l_domain;
  std::optional<double> class_acc;
  std::optional<double> domain_acc;
  std::optional<double> probe_acc;

  friend bool operator==(const MetricsRow&, const MetricsRow&) = default;
};

std::string metrics_csv_header();
std::string format_metrics_row(const MetricsRow& row);

/// One simultaneous SGD update of all parameter groups from gradients
/// computed at the pre-update parameters.
MetricsRow train_step(AdversarialModel& model, const Batch& batch, const TrainConfig& config,
                      const GradientHooks& hooks = {});

/// Everything needed to continue training bit-exactly.
struct TrainState {
  TrainConfig config;
  AdversarialModel model;
  std::uint64_t step = 0;
  std::mt19937_64 shuffle_rng;

  static TrainState fresh(const TrainConfig& config);
};

struct TrainResult {
  AdversarialModel model;
  /// One row per epoch, frame-weighted means of the step metrics.
  std::vector<MetricsRow> history;
};

using EpochCallback = std::function<void(const TrainState& state, Index epoch)>;

std::size_t steps_per_epoch(const TrainConfig& config, const Dataset& dataset);

/// Runs epochs until `state.config.epochs` are complete. The callback runs
/// after every epoch.
std::vector<MetricsRow> continue_training(TrainState& state, const Dataset& dataset,
                                          const EpochCallback& on_epoch = {});

/// Trains from a fresh initialization. With a non-empty `checkpoint_dir`,
/// writes epoch_<k>.aadl after each epoch and final.aadl at the end.
TrainResult train_loop(const TrainConfig& config, const Dataset& dataset,
                       const std::string& checkpoint_dir = {});

/// Checks that the dataset shape agrees with the model dimensions.
void check_compatible(const TrainConfig& config, const DatasetConfig& data);

// Checkpoint layout (little-endian):
//   "AADL" | u32 version | u64 config length | canonical TrainConfig text |
//   per parameter block, declaration order:
//     u32 name length | name | u64 rows | u64 cols | f64 x rows*cols, row-major |
//   u64 step | u32 rng word count | u64 x count (mt19937_64 state words)
inline constexpr std::uint32_t kCheckpointVersion = 1;

std::string encode_checkpoint(const TrainState& state);
TrainState decode_checkpoint(std::string bytes, const std::string& origin);
void checkpoint_save(const TrainState& state, const std::string& path);
TrainState checkpoint_load(const std::string& path);

}  // namespace aadit

#endif  // AADIT_TRAINER_HPP_
