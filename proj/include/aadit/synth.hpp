// Copyright 2026 The aadit Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef AADIT_SYNTH_HPP_
#define AADIT_SYNTH_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "aadit/config.hpp"
#include "aadit/types.hpp"

namespace aadit {

/// Shape and statistics of a synthetic multi-domain corpus.
///
/// Frames are drawn as x_t = proto[y_t] + susceptibility[y_t] * offset[d] + noise,
/// so classes with susceptibility near zero carry no domain information and
/// classes near one carry the full domain offset. Class 0 is silence and is
/// never shifted.
struct DatasetConfig {
  Index frame_dim = 20;
  Index classes = 10;
  Index domains = 4;
  Index train_per_domain = 200;
  Index test_per_domain = 100;
  Index frames = 50;
  double segment_mean = 5.0;
  double noise = 1.0;
  double shift = 3.0;
  double prototype_scale = 1.0;
  /// Per-class susceptibility. Empty selects the default ramp: 0 for
  /// silence, then evenly spaced from 0 to 1 over the remaining classes.
  std::vector<double> susceptibility;
  std::uint64_t seed = 1;

  std::vector<double> resolved_susceptibility() const;
  void validate() const;

  void write(KeyValueWriter& out) const;
  void read(const KeyValueReader& in);

  friend bool operator==(const DatasetConfig&, const DatasetConfig&) = default;
};

struct SequenceSample {
  Matrix frames;   // frame_dim x T
  Labels classes;  // length T
  Labels domains;  // length T, constant within a sequence
};

struct Dataset {
  DatasetConfig config;
  std::vector<SequenceSample> train;
  std::vector<SequenceSample> test;
};

/// Seed of sequence `index` (train sequences first, then test).
std::uint64_t sequence_seed(std::uint64_t seed, std::uint64_t index);

/// Fixed class prototypes (frame_dim x classes) and domain offsets
/// (frame_dim x domains, centered across domains, then each scaled to norm
/// `shift`; with two domains the offsets are exact opposites).
struct GenerativeModel {
  Matrix prototypes;
  Matrix offsets;
};
GenerativeModel generative_model(const DatasetConfig& config);

Dataset generate(const DatasetConfig& config);

/// File layout (little-endian):
///   "AADD" | u32 version | u64 config length | config text |
///   per sequence, train then test:
///     u16 domain | u32 T | u16 label x T | f64 x (frame_dim * T), frame by frame
std::string encode_dataset(const Dataset& dataset);
Dataset decode_dataset(std::string bytes, const std::string& origin);

void dataset_save(const Dataset& dataset, const std::string& path);
Dataset dataset_load(const std::string& path);

inline constexpr std::uint32_t kDatasetVersion = 1;

}  // namespace aadit

#endif  // AADIT_SYNTH_HPP_
