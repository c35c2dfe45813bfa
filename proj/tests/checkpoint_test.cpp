// Copyright 2026 The aadit Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <filesystem>

#include "aadit/binary_io.hpp"
#include "aadit/synth.hpp"
#include "aadit/trainer.hpp"

namespace aadit {
namespace {

namespace fs = std::filesystem;

class CheckpointTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("aadit_checkpoint_" + std::string(::testing::UnitTest::GetInstance()
                                                  ->current_test_info()
                                                  ->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  fs::path dir_;
};

DatasetConfig small_data() {
  DatasetConfig data;
  data.frame_dim = 5;
  data.classes = 3;
  data.domains = 2;
  data.train_per_domain = 3;
  data.test_per_domain = 1;
  data.frames = 10;
  data.segment_mean = 3;
  return data;
}

TrainConfig small_config() {
  TrainConfig config;
  config.input_dim = 5;
  config.acoustic_hidden = {6, 4, 6};
  config.split_depth = 2;
  config.domain_hidden = {4};
  config.classes = 3;
  config.domains = 2;
  config.attention = {.left = 1, .right = 2, .key_dim = 4, .score = ScoreType::kAdditive,
                      .heads = 2, .positional_encoding = true};
  config.batch_size = 2;
  config.epochs = 3;
  return config;
}

TEST_F(CheckpointTest, SaveLoadSaveIsByteIdentical) {
  TrainState state = TrainState::fresh(small_config());
  state.step = 42;
  state.shuffle_rng.discard(17);
  checkpoint_save(state, path("a.aadl"));
  const TrainState loaded = checkpoint_load(path("a.aadl"));
  checkpoint_save(loaded, path("b.aadl"));
  EXPECT_EQ(read_file(path("a.aadl")), read_file(path("b.aadl")));
  EXPECT_EQ(loaded.config, state.config);
  EXPECT_EQ(loaded.step, 42u);
  EXPECT_EQ(loaded.shuffle_rng, state.shuffle_rng);
  const auto a = state.model.params();
  const auto b = std::as_const(loaded.model).params();
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i]->name, b[i]->name);
    EXPECT_EQ(a[i]->value, b[i]->value);
  }
}

TEST_F(CheckpointTest, HeaderLayout) {
  const std::string bytes = encode_checkpoint(TrainState::fresh(small_config()));
  BinaryReader in(bytes, "mem");
  EXPECT_EQ(in.get_bytes(4, "magic"), "AADL");
  EXPECT_EQ(in.get_u32("version"), 1u);
  const std::string config = in.get_block("config");
  EXPECT_EQ(config, small_config().canonical());
  const std::uint32_t name_len = in.get_u32("name length");
  EXPECT_EQ(in.get_bytes(name_len, "name"), "feature.0.weight");
  EXPECT_EQ(in.get_u64("rows"), 6u);
  EXPECT_EQ(in.get_u64("cols"), 5u);
}

TEST_F(CheckpointTest, CorruptMagicRejected) {
  std::string bytes = encode_checkpoint(TrainState::fresh(small_config()));
  bytes[1] = 'X';
  write_file(path("bad.aadl"), bytes);
  try {
    checkpoint_load(path("bad.aadl"));
    FAIL() << "expected IoError";
  } catch (const IoError& e) {
    EXPECT_NE(std::string(e.what()).find("magic"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("bad.aadl"), std::string::npos);
  }
}

TEST_F(CheckpointTest, TruncationNamesOffset) {
  const std::string bytes = encode_checkpoint(TrainState::fresh(small_config()));
  for (std::size_t keep : {std::size_t{2}, std::size_t{30}, bytes.size() / 2, bytes.size() - 3}) {
    try {
      decode_checkpoint(bytes.substr(0, keep), "cut");
      FAIL() << "expected IoError at " << keep;
    } catch (const IoError& e) {
      EXPECT_NE(std::string(e.what()).find("offset"), std::string::npos) << e.what();
    }
  }
}

TEST_F(CheckpointTest, TrailingBytesRejected) {
  const std::string bytes = encode_checkpoint(TrainState::fresh(small_config()));
  EXPECT_THROW(decode_checkpoint(bytes + "x", "extra"), IoError);
}

TEST_F(CheckpointTest, DimensionMismatchAgainstEmbeddedConfig) {
  TrainState state = TrainState::fresh(small_config());
  state.config.acoustic_hidden = {7, 4, 6};
  try {
    decode_checkpoint(encode_checkpoint(state), "mismatch");
    FAIL() << "expected IoError";
  } catch (const IoError& e) {
    const std::string what = e.what();
    EXPECT_NE(what.find("feature.0.weight"), std::string::npos) << what;
    EXPECT_NE(what.find("offset"), std::string::npos) << what;
  }
}

TEST_F(CheckpointTest, MissingFile) {
  EXPECT_THROW(checkpoint_load(path("absent.aadl")), IoError);
}

TEST_F(CheckpointTest, ResumeSplicesIntoUninterruptedRun) {
  const Dataset dataset = generate(small_data());
  const TrainConfig config = small_config();
  const std::string full_dir = path("full");
  fs::create_directories(full_dir);
  const TrainResult full = train_loop(config, dataset, full_dir);

  TrainState resumed = checkpoint_load(full_dir + "/epoch_1.aadl");
  EXPECT_EQ(resumed.step, 3u);
  const std::vector<MetricsRow> rest = continue_training(resumed, dataset);
  ASSERT_EQ(rest.size(), 2u);
  EXPECT_EQ(rest[0], full.history[1]);
  EXPECT_EQ(rest[1], full.history[2]);
  checkpoint_save(resumed, path("resumed_final.aadl"));
  EXPECT_EQ(read_file(path("resumed_final.aadl")), read_file(full_dir + "/final.aadl"));
}

TEST_F(CheckpointTest, OneStepAfterLoadMatchesUninterrupted) {
  const Dataset dataset = generate(small_data());
  TrainConfig config = small_config();
  config.epochs = 1;
  TrainState direct = TrainState::fresh(config);
  continue_training(direct, dataset);
  checkpoint_save(direct, path("e1.aadl"));
  TrainState loaded = checkpoint_load(path("e1.aadl"));

  // The next step of both runs: same shuffled order, same batch.
  const Batch batch = Batch::from(std::vector<SequenceSample>{dataset.train[0], dataset.train[4]});
  train_step(direct.model, batch, direct.config);
  train_step(loaded.model, batch, loaded.config);
  const auto a = std::as_const(direct.model).params();
  const auto b = std::as_const(loaded.model).params();
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i]->value, b[i]->value);
  EXPECT_EQ(direct.shuffle_rng(), loaded.shuffle_rng());
}

}  // namespace
}  // namespace aadit
