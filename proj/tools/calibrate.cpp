// Copyright 2026 The aadit Authors
// SPDX-License-Identifier: Apache-2.0

// Oracle run for the invariance trend: trains baseline, adit and aadit on
// the default synthetic corpus for several seeds and prints the measured
// probe and class accuracies as key=value text.

#include <CLI11.hpp>

#include <iostream>

#include "aadit/binary_io.hpp"
#include "aadit/cli.hpp"
#include "aadit/experiment.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Calibrate the domain-invariance trend thresholds"};
  std::string config_path;
  std::string out_path;
  int seeds = 5;
  int jobs = 1;
  app.add_option("--config", config_path, "key=value overrides of the defaults");
  app.add_option("--seeds", seeds, "number of seeds (1..N)");
  app.add_option("--out", out_path, "write the summary here as well");
  app.add_option("--jobs", jobs, "evaluation threads");
  CLI11_PARSE(app, argc, argv);

  try {
    aadit::RunConfig config;
    if (!config_path.empty()) {
      config.read(aadit::KeyValueReader::parse(aadit::read_file(config_path), config_path));
    }
    std::vector<std::uint64_t> seed_list;
    for (int s = 1; s <= seeds; ++s) seed_list.push_back(static_cast<std::uint64_t>(s));
    const aadit::TrendResult result =
        aadit::run_trend(config.data, config.train, config.probe, seed_list, jobs);
    const std::string text = aadit::format_trend(result);
    std::cout << text;
    if (!out_path.empty()) aadit::write_file(out_path, text);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
