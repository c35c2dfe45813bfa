// Copyright 2026 The aadit Authors
// SPDX-License-Identifier: Apache-2.0

#include "aadit/binary_io.hpp"

#include <bit>
#include <cerrno>
#include <cstring>
#include <fstream>
#include <sstream>

#include "aadit/types.hpp"

namespace aadit {

void BinaryWriter::put_le(std::uint64_t v, int width) {
  for (int i = 0; i < width; ++i) {
    buffer_.push_back(static_cast<char>((v >> (8 * i)) & 0xffu));
  }
}

void BinaryWriter::put_u16(std::uint16_t v) { put_le(v, 2); }
void BinaryWriter::put_u32(std::uint32_t v) { put_le(v, 4); }
void BinaryWriter::put_u64(std::uint64_t v) { put_le(v, 8); }
void BinaryWriter::put_f64(double v) { put_le(std::bit_cast<std::uint64_t>(v), 8); }

void BinaryWriter::put_block(std::string_view bytes) {
  put_u64(bytes.size());
  put_bytes(bytes);
}

void BinaryReader::fail(std::string_view message) const { fail_at(offset_, message); }

void BinaryReader::fail_at(std::size_t offset, std::string_view message) const {
  std::ostringstream msg;
  msg << origin_ << ": " << message << " at offset " << offset;
  throw IoError(msg.str());
}

std::string_view BinaryReader::get_bytes(std::size_t n, std::string_view what) {
  if (data_.size() - offset_ < n) {
    fail("truncated file reading " + std::string(what));
  }
  std::string_view out(data_.data() + offset_, n);
  offset_ += n;
  return out;
}

std::uint64_t BinaryReader::get_le(int width, std::string_view what) {
  const std::string_view raw = get_bytes(static_cast<std::size_t>(width), what);
  std::uint64_t v = 0;
  for (int i = 0; i < width; ++i) {
    v |= static_cast<std::uint64_t>(static_cast<unsigned char>(raw[static_cast<std::size_t>(i)]))
         << (8 * i);
  }
  return v;
}

std::uint16_t BinaryReader::get_u16(std::string_view what) {
  return static_cast<std::uint16_t>(get_le(2, what));
}
std::uint32_t BinaryReader::get_u32(std::string_view what) {
  return static_cast<std::uint32_t>(get_le(4, what));
}
std::uint64_t BinaryReader::get_u64(std::string_view what) { return get_le(8, what); }
double BinaryReader::get_f64(std::string_view what) {
  return std::bit_cast<double>(get_le(8, what));
}

std::string BinaryReader::get_block(std::string_view what) {
  const std::size_t at = offset_;
  const std::uint64_t n = get_u64(what);
  if (n > data_.size() - offset_) fail_at(at, "block length exceeds file size for " + std::string(what));
  return std::string(get_bytes(static_cast<std::size_t>(n), what));
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path + ": cannot open for reading: " + std::strerror(errno));
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw IoError(path + ": read failed");
  return buf.str();
}

void write_file(const std::string& path, std::string_view bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(path + ": cannot open for writing: " + std::strerror(errno));
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  out.flush();
  if (!out) throw IoError(path + ": write failed");
}

}  // namespace aadit
