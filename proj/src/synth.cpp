// Copyright 2026 The aadit Authors
// SPDX-License-Identifier: Apache-2.0

#include "aadit/synth.hpp"

#include <random>

#include "aadit/binary_io.hpp"

namespace aadit {

namespace {

constexpr char kMagic[] = "AADD";

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

SequenceSample generate_sequence(const DatasetConfig& config, const GenerativeModel& model,
                                 const std::vector<double>& gamma, Label domain,
                                 std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::geometric_distribution<int> extra_length(1.0 / config.segment_mean);
  std::uniform_int_distribution<Label> pick_class(0, static_cast<Label>(config.classes - 1));
  std::normal_distribution<double> noise(0.0, config.noise > 0 ? config.noise : 1.0);

  SequenceSample sample;
  const auto frames = static_cast<std::size_t>(config.frames);
  sample.classes.reserve(frames);
  while (sample.classes.size() < frames) {
    const Label cls = pick_class(rng);
    const std::size_t run = 1 + static_cast<std::size_t>(extra_length(rng));
    for (std::size_t k = 0; k < run && sample.classes.size() < frames; ++k) {
      sample.classes.push_back(cls);
    }
  }
  sample.domains.assign(frames, domain);
  sample.frames.resize(config.frame_dim, config.frames);
  for (Index t = 0; t < config.frames; ++t) {
    const Label cls = sample.classes[static_cast<std::size_t>(t)];
    sample.frames.col(t) = model.prototypes.col(cls) +
                           gamma[static_cast<std::size_t>(cls)] * model.offsets.col(domain);
    if (config.noise > 0) {
      for (Index r = 0; r < config.frame_dim; ++r) sample.frames(r, t) += noise(rng);
    }
  }
  return sample;
}

}  // namespace

std::vector<double> DatasetConfig::resolved_susceptibility() const {
  if (!susceptibility.empty()) return susceptibility;
  std::vector<double> gamma(static_cast<std::size_t>(classes), 0.0);
  for (Index s = 1; s < classes; ++s) {
    gamma[static_cast<std::size_t>(s)] =
        classes > 2 ? static_cast<double>(s - 1) / static_cast<double>(classes - 2) : 1.0;
  }
  return gamma;
}

void DatasetConfig::validate() const {
  if (frame_dim < 1) throw ConfigError("data.frame_dim must be >= 1");
  if (classes < 2) throw ConfigError("data.classes must be >= 2");
  if (classes > 65535) throw ConfigError("data.classes must fit in 16 bits");
  if (domains < 2) {
    throw ConfigError("data.domains must be >= 2 (a domain probe needs two domains)");
  }
  if (domains > 65535) throw ConfigError("data.domains must fit in 16 bits");
  if (train_per_domain < 1 || test_per_domain < 1) {
    throw ConfigError("data.train_per_domain and data.test_per_domain must be >= 1");
  }
  if (frames < 1) throw ConfigError("data.frames must be >= 1");
  if (!(segment_mean >= 1.0)) throw ConfigError("data.segment_mean must be >= 1");
  if (noise < 0 || shift < 0 || prototype_scale < 0) {
    throw ConfigError("data.noise, data.shift and data.prototype_scale must be >= 0");
  }
  if (!susceptibility.empty()) {
    if (static_cast<Index>(susceptibility.size()) != classes) {
      throw ConfigError("data.susceptibility needs one entry per class");
    }
    for (double g : susceptibility) {
      if (g < 0 || g > 1) throw ConfigError("data.susceptibility entries must lie in [0, 1]");
    }
    if (susceptibility[0] != 0) throw ConfigError("data.susceptibility of silence must be 0");
  }
}

void DatasetConfig::write(KeyValueWriter& out) const {
  out.add("data.frame_dim", frame_dim);
  out.add("data.classes", classes);
  out.add("data.domains", domains);
  out.add("data.train_per_domain", train_per_domain);
  out.add("data.test_per_domain", test_per_domain);
  out.add("data.frames", frames);
  out.add("data.segment_mean", segment_mean);
  out.add("data.noise", noise);
  out.add("data.shift", shift);
  out.add("data.prototype_scale", prototype_scale);
  out.add("data.susceptibility", susceptibility);
  out.add("data.seed", std::to_string(seed));
}

void DatasetConfig::read(const KeyValueReader& in) {
  in.read("data.frame_dim", frame_dim);
  in.read("data.classes", classes);
  in.read("data.domains", domains);
  in.read("data.train_per_domain", train_per_domain);
  in.read("data.test_per_domain", test_per_domain);
  in.read("data.frames", frames);
  in.read("data.segment_mean", segment_mean);
  in.read("data.noise", noise);
  in.read("data.shift", shift);
  in.read("data.prototype_scale", prototype_scale);
  in.read("data.susceptibility", susceptibility);
  in.read("data.seed", seed);
}

std::uint64_t sequence_seed(std::uint64_t seed, std::uint64_t index) {
  return splitmix64(splitmix64(seed) ^ index);
}

GenerativeModel generative_model(const DatasetConfig& config) {
  config.validate();
  std::mt19937_64 rng(config.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  GenerativeModel model;
  model.prototypes.resize(config.frame_dim, config.classes);
  for (Index s = 0; s < config.classes; ++s) {
    for (Index r = 0; r < config.frame_dim; ++r) {
      model.prototypes(r, s) = config.prototype_scale * normal(rng);
    }
  }
  model.offsets.resize(config.frame_dim, config.domains);
  for (Index u = 0; u < config.domains; ++u) {
    for (Index r = 0; r < config.frame_dim; ++r) model.offsets(r, u) = normal(rng);
  }
  const Vector mean = model.offsets.rowwise().mean();
  model.offsets.colwise() -= mean;
  for (Index u = 0; u < config.domains; ++u) {
    const double norm = model.offsets.col(u).norm();
    if (norm > 0) model.offsets.col(u) *= config.shift / norm;
  }
  return model;
}

Dataset generate(const DatasetConfig& config) {
  const GenerativeModel model = generative_model(config);
  const std::vector<double> gamma = config.resolved_susceptibility();
  Dataset dataset;
  dataset.config = config;
  std::uint64_t index = 0;
  for (auto [split, per_domain] : {std::pair{&dataset.train, config.train_per_domain},
                                   std::pair{&dataset.test, config.test_per_domain}}) {
    split->reserve(static_cast<std::size_t>(per_domain * config.domains));
    for (Index u = 0; u < config.domains; ++u) {
      for (Index k = 0; k < per_domain; ++k) {
        split->push_back(generate_sequence(config, model, gamma, static_cast<Label>(u),
                                           sequence_seed(config.seed, index++)));
      }
    }
  }
  return dataset;
}

std::string encode_dataset(const Dataset& dataset) {
  BinaryWriter out;
  out.put_bytes(std::string_view(kMagic, 4));
  out.put_u32(kDatasetVersion);
  KeyValueWriter kv;
  dataset.config.write(kv);
  out.put_block(kv.str());
  for (const auto* split : {&dataset.train, &dataset.test}) {
    for (const SequenceSample& s : *split) {
      const auto frames = static_cast<std::size_t>(s.frames.cols());
      if (s.classes.size() != frames || s.domains.size() != frames || frames == 0) {
        throw InputError("encode_dataset: inconsistent sequence lengths");
      }
      out.put_u16(static_cast<std::uint16_t>(s.domains.front()));
      out.put_u32(static_cast<std::uint32_t>(frames));
      for (Label y : s.classes) out.put_u16(static_cast<std::uint16_t>(y));
      for (Index t = 0; t < s.frames.cols(); ++t) {
        for (Index r = 0; r < s.frames.rows(); ++r) out.put_f64(s.frames(r, t));
      }
    }
  }
  return out.bytes();
}

Dataset decode_dataset(std::string bytes, const std::string& origin) {
  BinaryReader in(std::move(bytes), origin);
  if (in.get_bytes(4, "magic") != std::string_view(kMagic, 4)) {
    in.fail_at(0, "bad magic (not a dataset file)");
  }
  const std::size_t version_at = in.offset();
  if (in.get_u32("version") != kDatasetVersion) in.fail_at(version_at, "unsupported version");

  Dataset dataset;
  const std::size_t config_at = in.offset();
  const std::string text = in.get_block("config block");
  try {
    dataset.config.read(KeyValueReader::parse(text, origin + " config block"));
    dataset.config.validate();
  } catch (const ConfigError& e) {
    in.fail_at(config_at, std::string("invalid embedded config: ") + e.what());
  }
  const DatasetConfig& cfg = dataset.config;
  for (auto [split, per_domain] : {std::pair{&dataset.train, cfg.train_per_domain},
                                   std::pair{&dataset.test, cfg.test_per_domain}}) {
    const Index count = per_domain * cfg.domains;
    split->reserve(static_cast<std::size_t>(count));
    for (Index i = 0; i < count; ++i) {
      SequenceSample s;
      const std::size_t domain_at = in.offset();
      const Label domain = in.get_u16("domain label");
      if (domain >= cfg.domains) in.fail_at(domain_at, "domain label out of range");
      const std::size_t len_at = in.offset();
      const std::uint32_t frames = in.get_u32("sequence length");
      if (frames == 0) in.fail_at(len_at, "empty sequence");
      s.classes.resize(frames);
      for (auto& y : s.classes) {
        const std::size_t at = in.offset();
        y = in.get_u16("class label");
        if (y >= cfg.classes) in.fail_at(at, "class label out of range");
      }
      s.domains.assign(frames, domain);
      s.frames.resize(cfg.frame_dim, frames);
      for (Index t = 0; t < static_cast<Index>(frames); ++t) {
        for (Index r = 0; r < cfg.frame_dim; ++r) s.frames(r, t) = in.get_f64("frame data");
      }
      split->push_back(std::move(s));
    }
  }
  if (!in.at_end()) in.fail("trailing bytes after last sequence");
  return dataset;
}

void dataset_save(const Dataset& dataset, const std::string& path) {
  write_file(path, encode_dataset(dataset));
}

Dataset dataset_load(const std::string& path) { return decode_dataset(read_file(path), path); }

}  // namespace aadit
