// Copyright 2026 The aadit Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef AADIT_CLI_HPP_
#define AADIT_CLI_HPP_

#include <ostream>
#include <string>
#include <vector>

#include "aadit/config.hpp"
#include "aadit/probe.hpp"
#include "aadit/synth.hpp"
#include "aadit/trainer.hpp"

namespace aadit {

/// Stable process exit codes.
enum ExitCode : int {
  kExitOk = 0,
  kExitInternal = 1,
  kExitConfig = 2,
  kExitIo = 3,
  kExitNumerical = 4,
  kExitGradCheck = 5,
};

/// Everything a command can be configured with. Defaults, then the
/// `--config` file, then command-line flags.
struct RunConfig {
  DatasetConfig data;
  TrainConfig train;
  ProbeConfig probe;
  std::string dataset_path;  // empty: <out>/dataset.aadd
  std::string out_dir = ".";
  std::string checkpoint_path;
  std::int64_t jobs = 1;

  std::string resolved_dataset_path() const;

  void write(KeyValueWriter& out) const;
  /// Throws ConfigError on keys no config section recognizes.
  void read(const KeyValueReader& in);
  std::string canonical() const;

  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

/// Entry point shared by the executable and the tests. `args` excludes the
/// program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace aadit

#endif  // AADIT_CLI_HPP_
