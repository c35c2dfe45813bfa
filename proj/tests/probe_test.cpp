// Copyright 2026 The aadit Authors
// SPDX-License-Identifier: Apache-2.0

#include "aadit/probe.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "aadit/binary_io.hpp"
#include "aadit/experiment.hpp"

namespace aadit {
namespace {

KeyValueReader calibration() {
  const std::string path = std::string(AADIT_TEST_DATA) + "/calibration.txt";
  return KeyValueReader::parse(read_file(path), path);
}

std::vector<double> calibrated(const std::string& key) {
  std::vector<double> values;
  calibration().read(key, values);
  return values;
}

DenseLayer identity_layer(Index dim) {
  DenseLayer layer;
  layer.weights = ParamBlock("w", Matrix::Identity(dim, dim));
  layer.bias = ParamBlock("b", Matrix::Zero(dim, 1));
  layer.activation = Activation::kIdentity;
  return layer;
}

DatasetConfig quick_data() {
  DatasetConfig data;
  data.frame_dim = 8;
  data.classes = 5;
  data.domains = 4;
  data.train_per_domain = 40;
  data.test_per_domain = 20;
  data.frames = 25;
  data.seed = 2;
  return data;
}

TrainConfig quick_model_config(Mode mode, const DatasetConfig& data) {
  TrainConfig config;
  config.mode = mode;
  config.input_dim = data.frame_dim;
  config.classes = data.classes;
  config.domains = data.domains;
  config.acoustic_hidden = {12, 8, 12};
  config.split_depth = 2;
  config.domain_hidden = {6};
  config.attention = {.left = 2, .right = 2, .key_dim = 4, .heads = 2};
  return config;
}

TEST(ExtractFeatures, IdentityExtractorReturnsFrames) {
  const Dataset d = generate(quick_data());
  AdversarialModel model;
  model.feature = FeedForwardStack({identity_layer(8)});
  const std::vector<Matrix> f = extract_features(model, d.test);
  ASSERT_EQ(f.size(), d.test.size());
  for (std::size_t i = 0; i < f.size(); ++i) EXPECT_EQ(f[i], d.test[i].frames);
}

TEST(ExtractFeatures, MatchesStackForwardAndIsDeterministic) {
  const DatasetConfig data = quick_data();
  const Dataset d = generate(data);
  std::mt19937_64 rng(4);
  const AdversarialModel model = AdversarialModel::init(quick_model_config(Mode::kAdit, data), rng);
  const std::vector<Matrix> a = extract_features(model, d.test, 1);
  const std::vector<Matrix> b = extract_features(model, d.test, 3);
  EXPECT_EQ(a, b);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i], stack_forward(model.feature, d.test[i].frames).output);
    EXPECT_EQ(a[i].rows(), 8);
  }
}

TEST(ExtractFeatures, DimensionMismatch) {
  DatasetConfig data = quick_data();
  std::mt19937_64 rng(4);
  const AdversarialModel model = AdversarialModel::init(quick_model_config(Mode::kAdit, data), rng);
  data.frame_dim = 5;
  EXPECT_THROW(extract_features(model, generate(data).test), ConfigError);
}

TEST(TrainProbe, DomainFreeFeaturesGiveChance) {
  DatasetConfig data = quick_data();
  data.susceptibility.assign(5, 0.0);
  const Dataset d = generate(data);
  std::mt19937_64 rng(4);
  const AdversarialModel model = AdversarialModel::init(quick_model_config(Mode::kAdit, data), rng);
  const double acc = domain_probe_accuracy(model, d, ProbeConfig{});
  EXPECT_NEAR(acc, 0.25, 0.05);
  EXPECT_NEAR(raw_domain_probe_accuracy(d, ProbeConfig{}), 0.25, 0.05);
}

TEST(TrainProbe, SeparableFeatures) {
  std::mt19937_64 rng(8);
  std::normal_distribution<double> noise(0.0, 0.3);
  const auto make = [&](Index n, Matrix& x, Labels& y) {
    x.resize(3, n);
    y.clear();
    for (Index i = 0; i < n; ++i) {
      const Label d = static_cast<Label>(i % 3);
      for (Index r = 0; r < 3; ++r) x(r, i) = (r == d ? 4.0 : 0.0) + noise(rng);
      y.push_back(d);
    }
  };
  Matrix train_x, test_x;
  Labels train_y, test_y;
  make(600, train_x, train_y);
  make(300, test_x, test_y);
  EXPECT_GE(train_probe(train_x, train_y, test_x, test_y, 3, ProbeConfig{}), 0.99);
}

TEST(TrainProbe, DeterministicPerSeed) {
  const Dataset d = generate(quick_data());
  ProbeConfig config;
  const double a = raw_domain_probe_accuracy(d, config);
  EXPECT_EQ(a, raw_domain_probe_accuracy(d, config));
  config.seed = 99;
  const double b = raw_domain_probe_accuracy(d, config);
  EXPECT_EQ(b, raw_domain_probe_accuracy(d, config));
}

TEST(TrainProbe, SingleDomainRejected) {
  const Matrix x = Matrix::Random(2, 10);
  const Labels y(10, 1);
  EXPECT_THROW(train_probe(x, y, x, y, 2, ProbeConfig{}), InputError);
}

TEST(TrainProbe, RawFramesOfDefaultDatasetAboveCalibratedBound) {
  const std::vector<double> oracle = calibrated("raw.probe_acc");
  const double bound = *std::min_element(oracle.begin(), oracle.end()) - 0.05;
  EXPECT_GT(bound, 0.25 + 0.2);
  const double acc = raw_domain_probe_accuracy(generate(DatasetConfig{}), ProbeConfig{});
  EXPECT_GE(acc, bound);
  EXPECT_NEAR(acc, oracle.front(), 0.01);
}

TEST(ProbeConfig, Validation) {
  ProbeConfig config;
  config.epochs = 0;
  EXPECT_THROW(config.validate(), ConfigError);
  config = ProbeConfig{};
  config.learning_rate = -1;
  EXPECT_THROW(config.validate(), ConfigError);
}

TEST(ClassAccuracy, OracleModelIsPerfect) {
  // Frames are one-hot class indicators and the model passes them through
  // as logits.
  DatasetConfig data = quick_data();
  data.frame_dim = 5;
  Dataset d = generate(data);
  for (SequenceSample& s : d.test) {
    s.frames.setZero();
    for (Index t = 0; t < s.frames.cols(); ++t) s.frames(s.classes[t], t) = 1.0;
  }
  AdversarialModel model;
  model.feature = FeedForwardStack({identity_layer(5)});
  model.senone = FeedForwardStack({identity_layer(5)});
  EXPECT_EQ(class_accuracy(model, d.test), 1.0);
}

TEST(ClassAccuracy, UniformLogitsGiveChance) {
  const DatasetConfig data = quick_data();
  const Dataset d = generate(data);
  std::mt19937_64 rng(4);
  AdversarialModel model = AdversarialModel::init(quick_model_config(Mode::kBaseline, data), rng);
  model.senone.layers().back().weights.value.setZero();
  model.senone.layers().back().bias.value.setZero();
  EXPECT_NEAR(class_accuracy(model, d.test), 1.0 / 5, 0.05);
}

TEST(ClassAccuracy, DefaultBaselineWithinCalibratedBand) {
  TrainConfig config;
  config.mode = Mode::kBaseline;
  const Dataset d = generate(DatasetConfig{});
  const TrainResult trained = train_loop(config, d);
  EXPECT_NEAR(class_accuracy(trained.model, d.test), calibrated("baseline.class_acc").front(),
              0.01);
}

TEST(Evaluate, ParallelReductionIsDeterministic) {
  const DatasetConfig data = quick_data();
  const Dataset d = generate(data);
  std::mt19937_64 rng(5);
  const AdversarialModel model = AdversarialModel::init(quick_model_config(Mode::kAadit, data), rng);
  const MetricsRow a = evaluate(model, d.test, 1);
  const MetricsRow b = evaluate(model, d.test, 4);
  EXPECT_EQ(a, b);
  ASSERT_TRUE(a.class_acc && a.domain_acc && a.l_domain);
  EXPECT_EQ(*a.class_acc, class_accuracy(model, d.test));
  EXPECT_GE(*a.domain_acc, 0.0);
  EXPECT_LE(*a.domain_acc, 1.0);

  std::mt19937_64 base_rng(5);
  const AdversarialModel baseline =
      AdversarialModel::init(quick_model_config(Mode::kBaseline, data), base_rng);
  const MetricsRow c = evaluate(baseline, d.test);
  EXPECT_FALSE(c.l_domain.has_value());
  EXPECT_FALSE(c.domain_acc.has_value());
}

TEST(ParallelFor, PropagatesWorkerExceptions) {
  EXPECT_THROW(parallel_for(8, 3,
                            [](std::size_t i) {
                              if (i == 5) throw InputError("boom");
                            }),
               InputError);
}

std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream fields(line);
    while (std::getline(fields, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    rows.push_back(std::move(cells));
  }
  return rows;
}

TEST(AttentionExport, SingletonWindowIsColumnOfOnes) {
  DatasetConfig data = quick_data();
  TrainConfig config = quick_model_config(Mode::kAadit, data);
  config.attention = {.left = 0, .right = 0, .key_dim = 4, .heads = 1};
  std::mt19937_64 rng(1);
  const AdversarialModel model = AdversarialModel::init(config, rng);
  const auto rows = parse_csv(format_attention_csv(attention_trace(model, generate(data).test[0])));
  ASSERT_EQ(rows[0], (std::vector<std::string>{"head", "frame", "0"}));
  ASSERT_EQ(rows.size(), 26u);
  for (std::size_t r = 1; r < rows.size(); ++r) EXPECT_EQ(rows[r][2], "1");
}

TEST(AttentionExport, ZeroGateRowsAreUniformAndSumToOne) {
  DatasetConfig data = quick_data();
  TrainConfig config = quick_model_config(Mode::kAadit, data);
  config.attention = {.left = 3, .right = 2, .key_dim = 4, .score = ScoreType::kAdditive,
                      .heads = 2};
  std::mt19937_64 rng(1);
  AdversarialModel model = AdversarialModel::init(config, rng);
  for (AttentionHead& head : model.attention.heads) head.gate.value.setZero();
  const auto rows = parse_csv(format_attention_csv(attention_trace(model, generate(data).test[0])));
  ASSERT_EQ(rows[0], (std::vector<std::string>{"head", "frame", "-3", "-2", "-1", "0", "1", "2"}));
  ASSERT_EQ(rows.size(), 1u + 2 * 25);
  for (std::size_t r = 1; r < rows.size(); ++r) {
    ASSERT_EQ(rows[r].size(), 8u);
    double sum = 0;
    int filled = 0;
    for (std::size_t c = 2; c < 8; ++c) {
      if (rows[r][c].empty()) continue;
      sum += std::stod(rows[r][c]);
      ++filled;
    }
    EXPECT_NEAR(sum, 1.0, 1e-9);
    for (std::size_t c = 2; c < 8; ++c) {
      if (!rows[r][c].empty()) EXPECT_NEAR(std::stod(rows[r][c]), 1.0 / filled, 1e-12);
    }
    const int frame = std::stoi(rows[r][1]);
    if (frame >= 3 && frame <= 22) EXPECT_EQ(filled, 6);
  }
}

TEST(AttentionExport, NonAaditModelRejected) {
  const DatasetConfig data = quick_data();
  std::mt19937_64 rng(1);
  const AdversarialModel model = AdversarialModel::init(quick_model_config(Mode::kAdit, data), rng);
  EXPECT_THROW(attention_trace(model, generate(data).test[0]), ConfigError);
}

TEST(AttentionMass, UniformAttentionMatchesWindowCounting) {
  DatasetConfig data = quick_data();
  TrainConfig config = quick_model_config(Mode::kAadit, data);
  config.attention = {.left = 2, .right = 1, .key_dim = 4, .score = ScoreType::kAdditive};
  std::mt19937_64 rng(1);
  AdversarialModel model = AdversarialModel::init(config, rng);
  model.attention.heads[0].gate.value.setZero();
  const Dataset d = generate(data);
  std::vector<double> mass(5, 0), count(5, 0);
  for (const SequenceSample& s : d.test) {
    const Index T = s.frames.cols();
    for (Index tau = 0; tau < T; ++tau) {
      double received = 0;
      for (Index t = std::max<Index>(0, tau - 1); t <= std::min<Index>(T - 1, tau + 2); ++t) {
        const Index size = std::min<Index>(T - 1, t + 1) - std::max<Index>(0, t - 2) + 1;
        received += 1.0 / static_cast<double>(size);
      }
      mass[s.classes[tau]] += received;
      count[s.classes[tau]] += 1;
    }
  }
  const std::vector<double> got = attention_mass_by_class(model, d.test, 5);
  for (int c = 0; c < 5; ++c) EXPECT_NEAR(got[c], mass[c] / count[c], 1e-12);
}

// The reference checkpoint is the default aadit run of oracle seed 4, the
// seed with the median mass margin.
TEST(AttentionMass, ReferenceCheckpointFavoursSusceptibleFrames) {
  const TrainState state =
      checkpoint_load(std::string(AADIT_TEST_DATA) + "/reference_aadit_seed4.aadl");
  DatasetConfig data;
  data.seed = 4;
  const Dataset d = generate(data);
  const std::vector<double> mass = attention_mass_by_class(state.model, d.test, data.classes);
  const std::vector<double> oracle = calibrated("aadit.mass_by_class.seed4");
  ASSERT_EQ(mass.size(), oracle.size());
  for (std::size_t c = 0; c < mass.size(); ++c) EXPECT_NEAR(mass[c], oracle[c], 1e-9);
  EXPECT_GT(susceptible_mass_margin(mass, data.resolved_susceptibility()), 0.0);
}

}  // namespace
}  // namespace aadit
