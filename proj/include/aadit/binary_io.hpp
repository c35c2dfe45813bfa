// Copyright 2026 The aadit Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef AADIT_BINARY_IO_HPP_
#define AADIT_BINARY_IO_HPP_

#include <cstdint>
#include <string>
#include <string_view>

namespace aadit {

/// Little-endian byte sink.
class BinaryWriter {
 public:
  void put_bytes(std::string_view bytes) { buffer_.append(bytes); }
  void put_u16(std::uint16_t v);
  void put_u32(std::uint32_t v);
  void put_u64(std::uint64_t v);
  void put_f64(double v);
  /// u64 byte length followed by the bytes.
  void put_block(std::string_view bytes);

  const std::string& bytes() const { return buffer_; }

 private:
  void put_le(std::uint64_t v, int width);
  std::string buffer_;
};

/// Little-endian byte source. Every failure throws IoError carrying the
/// source path and the byte offset at which decoding failed.
class BinaryReader {
 public:
  BinaryReader(std::string data, std::string origin)
      : data_(std::move(data)), origin_(std::move(origin)) {}

  std::string_view get_bytes(std::size_t n, std::string_view what);
  std::uint16_t get_u16(std::string_view what);
  std::uint32_t get_u32(std::string_view what);
  std::uint64_t get_u64(std::string_view what);
  double get_f64(std::string_view what);
  std::string get_block(std::string_view what);

  std::size_t offset() const { return offset_; }
  bool at_end() const { return offset_ == data_.size(); }
  const std::string& origin() const { return origin_; }

  /// Throws IoError "<origin>: <message> at offset <n>".
  [[noreturn]] void fail(std::string_view message) const;
  [[noreturn]] void fail_at(std::size_t offset, std::string_view message) const;

 private:
  std::uint64_t get_le(int width, std::string_view what);

  std::string data_;
  std::string origin_;
  std::size_t offset_ = 0;
};

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view bytes);

}  // namespace aadit

#endif  // AADIT_BINARY_IO_HPP_
