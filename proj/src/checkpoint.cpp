// Copyright 2026 The aadit Authors
// SPDX-License-Identifier: Apache-2.0

#include <sstream>

#include "aadit/binary_io.hpp"
#include "aadit/trainer.hpp"

namespace aadit {

namespace {

constexpr char kMagic[] = "AADL";

std::vector<std::uint64_t> rng_words(const std::mt19937_64& rng) {
  std::ostringstream text;
  text << rng;
  std::istringstream in(text.str());
  std::vector<std::uint64_t> words;
  std::uint64_t w = 0;
  while (in >> w) words.push_back(w);
  return words;
}

}  // namespace

std::string encode_checkpoint(const TrainState& state) {
  BinaryWriter out;
  out.put_bytes(std::string_view(kMagic, 4));
  out.put_u32(kCheckpointVersion);
  out.put_block(state.config.canonical());
  for (const ParamBlock* block : state.model.params()) {
    out.put_u32(static_cast<std::uint32_t>(block->name.size()));
    out.put_bytes(block->name);
    out.put_u64(static_cast<std::uint64_t>(block->value.rows()));
    out.put_u64(static_cast<std::uint64_t>(block->value.cols()));
    for (Index r = 0; r < block->value.rows(); ++r) {
      for (Index c = 0; c < block->value.cols(); ++c) out.put_f64(block->value(r, c));
    }
  }
  out.put_u64(state.step);
  const std::vector<std::uint64_t> words = rng_words(state.shuffle_rng);
  out.put_u32(static_cast<std::uint32_t>(words.size()));
  for (std::uint64_t w : words) out.put_u64(w);
  return out.bytes();
}

TrainState decode_checkpoint(std::string bytes, const std::string& origin) {
  BinaryReader in(std::move(bytes), origin);
  if (in.get_bytes(4, "magic") != std::string_view(kMagic, 4)) {
    in.fail_at(0, "bad magic (not a checkpoint file)");
  }
  const std::size_t version_at = in.offset();
  if (in.get_u32("version") != kCheckpointVersion) in.fail_at(version_at, "unsupported version");

  const std::size_t config_at = in.offset();
  const std::string text = in.get_block("config block");
  TrainState state;
  try {
    state.config.read(KeyValueReader::parse(text, origin + " config block"));
    state.config.validate();
    // Structure only; every value is overwritten below.
    std::mt19937_64 scratch(0);
    state.model = AdversarialModel::init(state.config, scratch);
  } catch (const ConfigError& e) {
    in.fail_at(config_at, std::string("invalid embedded config: ") + e.what());
  }

  for (ParamBlock* block : state.model.params()) {
    const std::size_t block_at = in.offset();
    const std::uint32_t name_len = in.get_u32("block name length");
    const std::string_view name = in.get_bytes(name_len, "block name");
    if (name != block->name) {
      in.fail_at(block_at, "expected parameter block '" + block->name + "', found '" +
                               std::string(name) + "'");
    }
    const std::size_t dims_at = in.offset();
    const std::uint64_t rows = in.get_u64("block rows");
    const std::uint64_t cols = in.get_u64("block cols");
    if (rows != static_cast<std::uint64_t>(block->value.rows()) ||
        cols != static_cast<std::uint64_t>(block->value.cols())) {
      in.fail_at(dims_at, "block '" + block->name + "' is " + std::to_string(rows) + "x" +
                              std::to_string(cols) + ", embedded config implies " +
                              std::to_string(block->value.rows()) + "x" +
                              std::to_string(block->value.cols()));
    }
    for (Index r = 0; r < block->value.rows(); ++r) {
      for (Index c = 0; c < block->value.cols(); ++c) {
        block->value(r, c) = in.get_f64("block data");
      }
    }
    block->zero_grad();
  }

  state.step = in.get_u64("step counter");
  const std::size_t rng_at = in.offset();
  const std::uint32_t count = in.get_u32("rng word count");
  std::ostringstream text_state;
  for (std::uint32_t i = 0; i < count; ++i) {
    if (i > 0) text_state << ' ';
    text_state << in.get_u64("rng state");
  }
  std::istringstream parse(text_state.str());
  parse >> state.shuffle_rng;
  if (parse.fail()) in.fail_at(rng_at, "invalid rng state");
  if (!in.at_end()) in.fail("trailing bytes after rng state");
  return state;
}

void checkpoint_save(const TrainState& state, const std::string& path) {
  write_file(path, encode_checkpoint(state));
}

TrainState checkpoint_load(const std::string& path) {
  return decode_checkpoint(read_file(path), path);
}

}  // namespace aadit
