// Copyright 2026 The aadit Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef AADIT_EXPERIMENT_HPP_
#define AADIT_EXPERIMENT_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "aadit/probe.hpp"
#include "aadit/synth.hpp"
#include "aadit/trainer.hpp"

namespace aadit {

/// Held-out measurements of one trained model.
struct ModeOutcome {
  Mode mode = Mode::kBaseline;
  std::uint64_t seed = 0;
  double probe_acc = 0;
  double class_acc = 0;
};

/// Per-seed outcomes of the baseline / adit / aadit comparison.
struct TrendResult {
  std::vector<std::uint64_t> seeds;
  std::vector<double> raw_probe_acc;  // probe on the raw frames, per seed
  std::vector<ModeOutcome> outcomes;
  /// Per seed: mean attention mass received per frame of each class (aadit).
  std::vector<std::vector<double>> attention_mass;
  /// Per seed: mean mass on classes with susceptibility >= 0.5 minus the
  /// mass on silence frames.
  std::vector<double> mass_margin;

  std::vector<double> probe(Mode mode) const;
  std::vector<double> accuracy(Mode mode) const;
};

double median(std::vector<double> values);

/// Mean mass over the classes with susceptibility >= 0.5 minus the mass of
/// the silence class (class 0).
double susceptible_mass_margin(const std::vector<double>& mass_by_class,
                               const std::vector<double>& susceptibility);

/// For each seed: generates the dataset with that seed, trains the three
/// modes from the same initialization seed, and measures every model with
/// a domain probe and class accuracy on the test split.
TrendResult run_trend(const DatasetConfig& data, const TrainConfig& train,
                      const ProbeConfig& probe, const std::vector<std::uint64_t>& seeds,
                      int jobs = 1);

/// key=value summary (medians and per-seed values).
std::string format_trend(const TrendResult& result);

}  // namespace aadit

#endif  // AADIT_EXPERIMENT_HPP_
