// Copyright 2026 The aadit Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef AADIT_PROBE_HPP_
#define AADIT_PROBE_HPP_

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "aadit/attention.hpp"
#include "aadit/config.hpp"
#include "aadit/synth.hpp"
#include "aadit/trainer.hpp"

namespace aadit {

/// A classifier trained from scratch on frozen features. Its held-out
/// accuracy at predicting the domain measures how much domain information
/// the features still carry.
struct ProbeConfig {
  std::vector<Index> hidden{32};
  Index epochs = 4;
  double learning_rate = 0.1;
  Index batch_frames = 64;
  std::uint64_t seed = 1;

  void validate() const;
  void write(KeyValueWriter& out) const;
  void read(const KeyValueReader& in);

  friend bool operator==(const ProbeConfig&, const ProbeConfig&) = default;
};

/// Runs fn(i) for i in [0, n) on up to `jobs` threads. fn must only write
/// to its own slot of any shared output.
void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& fn);

/// Deep features of every sequence: feature_dim x T each.
std::vector<Matrix> extract_features(const AdversarialModel& model,
                                     const std::vector<SequenceSample>& samples, int jobs = 1);

/// Standardizes with train-split statistics, trains a fresh classifier on
/// (train_x, train_y) and returns its frame accuracy on (test_x, test_y).
double train_probe(const Matrix& train_x, const Labels& train_y, const Matrix& test_x,
                   const Labels& test_y, Index num_labels, const ProbeConfig& config);

/// Domain probe on the model's deep features, train split -> test split.
double domain_probe_accuracy(const AdversarialModel& model, const Dataset& dataset,
                             const ProbeConfig& config, int jobs = 1);

/// Same probe on the raw frames.
double raw_domain_probe_accuracy(const Dataset& dataset, const ProbeConfig& config);

/// Frame-level argmax accuracy of the acoustic model.
double class_accuracy(const AdversarialModel& model, const std::vector<SequenceSample>& samples,
                      int jobs = 1);

/// Held-out losses and accuracies; sequences are evaluated in parallel and
/// reduced in index order.
MetricsRow evaluate(const AdversarialModel& model, const std::vector<SequenceSample>& samples,
                    int jobs = 1);

/// Attention trace of one sequence. Throws ConfigError for non-aadit models.
AttentionTrace attention_trace(const AdversarialModel& model, const SequenceSample& sample);

/// Heatmap CSV: header `head,frame,-L..R`, one row per (head, frame) with the
/// attention probability of each relative position; blank outside the
/// truncated window.
std::string format_attention_csv(const AttentionTrace& trace);
void export_attention(const AttentionTrace& trace, const std::string& path);

/// Mean attention mass received per frame, averaged over heads, grouped by
/// the frame's class.
std::vector<double> attention_mass_by_class(const AdversarialModel& model,
                                            const std::vector<SequenceSample>& samples,
                                            Index classes);

}  // namespace aadit

#endif  // AADIT_PROBE_HPP_
