// Copyright 2026 The aadit Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef AADIT_TYPES_HPP_
#define AADIT_TYPES_HPP_

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace aadit {

// All numerics are carried in 64-bit floats.
using Scalar = double;
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
using RowVector = Eigen::Matrix<Scalar, 1, Eigen::Dynamic>;
using Index = Eigen::Index;

using Label = std::int32_t;
using Labels = std::vector<Label>;

/// Invalid configuration: bad dimensions, out-of-range hyperparameters.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Invalid input data: label out of range, empty sequence.
struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// File system or file-format failure. Messages carry the path and, for
/// format errors, the byte offset.
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Non-finite loss or gradient encountered during training.
struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Broken internal contract (stale cache, mismatched trace).
struct InternalError : std::logic_error {
  using std::logic_error::logic_error;
};

}  // namespace aadit

#endif  // AADIT_TYPES_HPP_
