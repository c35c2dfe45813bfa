// Copyright 2026 The aadit Authors
// SPDX-License-Identifier: Apache-2.0

#include "aadit/experiment.hpp"

#include <algorithm>

namespace aadit {

std::vector<double> TrendResult::probe(Mode mode) const {
  std::vector<double> out;
  for (const ModeOutcome& o : outcomes) {
    if (o.mode == mode) out.push_back(o.probe_acc);
  }
  return out;
}

std::vector<double> TrendResult::accuracy(Mode mode) const {
  std::vector<double> out;
  for (const ModeOutcome& o : outcomes) {
    if (o.mode == mode) out.push_back(o.class_acc);
  }
  return out;
}

double median(std::vector<double> values) {
  if (values.empty()) throw InputError("median of an empty set");
  std::sort(values.begin(), values.end());
  const std::size_t mid = values.size() / 2;
  return values.size() % 2 == 1 ? values[mid] : 0.5 * (values[mid - 1] + values[mid]);
}

double susceptible_mass_margin(const std::vector<double>& mass_by_class,
                               const std::vector<double>& susceptibility) {
  double sum = 0;
  int count = 0;
  for (std::size_t s = 1; s < mass_by_class.size(); ++s) {
    if (susceptibility.at(s) >= 0.5) {
      sum += mass_by_class[s];
      ++count;
    }
  }
  if (count == 0) throw InputError("no class with susceptibility >= 0.5");
  return sum / count - mass_by_class.at(0);
}

TrendResult run_trend(const DatasetConfig& data, const TrainConfig& train,
                      const ProbeConfig& probe, const std::vector<std::uint64_t>& seeds,
                      int jobs) {
  TrendResult result;
  result.seeds = seeds;
  for (std::uint64_t seed : seeds) {
    DatasetConfig data_cfg = data;
    data_cfg.seed = seed;
    const Dataset dataset = generate(data_cfg);
    ProbeConfig probe_cfg = probe;
    probe_cfg.seed = seed;
    result.raw_probe_acc.push_back(raw_domain_probe_accuracy(dataset, probe_cfg));
    for (Mode mode : {Mode::kBaseline, Mode::kAdit, Mode::kAadit}) {
      TrainConfig cfg = train;
      cfg.mode = mode;
      cfg.seed = seed;
      cfg.input_dim = data_cfg.frame_dim;
      cfg.classes = data_cfg.classes;
      cfg.domains = data_cfg.domains;
      const TrainResult trained = train_loop(cfg, dataset);
      ModeOutcome outcome;
      outcome.mode = mode;
      outcome.seed = seed;
      outcome.probe_acc = domain_probe_accuracy(trained.model, dataset, probe_cfg, jobs);
      outcome.class_acc = class_accuracy(trained.model, dataset.test, jobs);
      result.outcomes.push_back(outcome);
      if (mode == Mode::kAadit) {
        std::vector<double> mass =
            attention_mass_by_class(trained.model, dataset.test, data_cfg.classes);
        result.mass_margin.push_back(
            susceptible_mass_margin(mass, data_cfg.resolved_susceptibility()));
        result.attention_mass.push_back(std::move(mass));
      }
    }
  }
  return result;
}

std::string format_trend(const TrendResult& result) {
  KeyValueWriter out;
  out.add("seeds", static_cast<std::int64_t>(result.seeds.size()));
  out.add("raw.probe_acc.median", median(result.raw_probe_acc));
  out.add("raw.probe_acc", result.raw_probe_acc);
  for (Mode mode : {Mode::kBaseline, Mode::kAdit, Mode::kAadit}) {
    const std::string name = to_string(mode);
    out.add(name + ".probe_acc.median", median(result.probe(mode)));
    out.add(name + ".class_acc.median", median(result.accuracy(mode)));
    out.add(name + ".probe_acc", result.probe(mode));
    out.add(name + ".class_acc", result.accuracy(mode));
  }
  out.add("aadit.mass_margin.median", median(result.mass_margin));
  out.add("aadit.mass_margin", result.mass_margin);
  for (std::size_t i = 0; i < result.attention_mass.size(); ++i) {
    out.add("aadit.mass_by_class.seed" + std::to_string(result.seeds[i]), result.attention_mass[i]);
  }
  return out.str();
}

}  // namespace aadit
