// Copyright 2026 The aadit Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef AADIT_GRADCHECK_HPP_
#define AADIT_GRADCHECK_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "aadit/trainer.hpp"

namespace aadit {

/// max_i |a_i - n_i| / max(|a_i|, |n_i|, floor). Entries smaller than
/// `floor` are compared on an absolute scale of `floor`.
double max_relative_error(const Matrix& analytic, const Matrix& numeric, double floor = 1e-4);

struct GradCheckOptions {
  double h = 1e-5;
  /// Pass threshold; 1e-4 for h <= 1e-5, 1e-2 for coarser steps when unset.
  double tolerance = 0;
  double lambda = 0.5;
  std::uint64_t seed = 7;
  bool flip_reversal_sign = false;

  double resolved_tolerance() const;
};

struct GradCheckRow {
  std::string configuration;  // e.g. "aadit/dot/H4/pe"
  std::string group;          // e.g. "domain->feature"
  double max_rel_error = 0;
  bool pass = false;
};

/// Tiny random instance used by the checks: 6-dim frames, 5-dim deep
/// features, two sequences of 9 frames, window L = R = 2.
TrainConfig gradcheck_config(Mode mode, ScoreType score, Index heads, bool positional_encoding);
Batch gradcheck_batch(const TrainConfig& config, std::uint64_t seed);

/// Forward-only losses used as finite-difference targets.
Scalar senone_objective(const AdversarialModel& model, const Batch& batch);
Scalar domain_objective(const AdversarialModel& model, const Batch& batch);

/// Analytic gradients of each branch loss, one matrix per parameter block
/// in declaration order.
struct BranchGradients {
  std::vector<Matrix> senone;
  std::vector<Matrix> domain;
};
BranchGradients branch_gradients(AdversarialModel& model, const Batch& batch);

/// Every score type x {1, 4} heads x positional encoding on/off for aadit,
/// plus adit. Groups: senone->{feature,senone}, domain->{feature,attention,
/// domain}, and composite->feature, the reversal path assembled by
/// accumulate_gradients checked against d(senone - lambda*domain).
std::vector<GradCheckRow> run_gradcheck(const GradCheckOptions& options);

}  // namespace aadit

#endif  // AADIT_GRADCHECK_HPP_
