#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <string>
#include <string_view>
#include <vector>

#include <zlib.h>

#include "socialmotion/error.h"

namespace socialmotion::detail {

// Little-endian byte stream writer.
class ByteWriter {
 public:
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) {
      bytes_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
  }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) {
      bytes_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
  }
  void f32(float v) {
    u32(std::bit_cast<std::uint32_t>(v));
  }
  void raw(std::string_view s) {
    bytes_.insert(bytes_.end(), s.begin(), s.end());
  }
  void str(std::string_view s) {
    u32(static_cast<std::uint32_t>(s.size()));
    raw(s);
  }
  void crc() {
    u32(checksum(bytes_.data(), bytes_.size()));
  }
  const std::vector<std::uint8_t>& bytes() const {
    return bytes_;
  }

  static std::uint32_t checksum(const std::uint8_t* data, std::size_t n) {
    return static_cast<std::uint32_t>(::crc32(0L, data, static_cast<uInt>(n)));
  }

 private:
  std::vector<std::uint8_t> bytes_;
};

// Bounds-checked little-endian reader; running off the end is a Format error
// naming the truncated field.
class ByteReader {
 public:
  ByteReader(const std::uint8_t* data, std::size_t size, std::string source)
      : data_(data), size_(size), source_(std::move(source)) {}

  std::uint32_t u32(const char* what) {
    need(4, what);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) {
      v |= static_cast<std::uint32_t>(data_[pos_ + i]) << (8 * i);
    }
    pos_ += 4;
    return v;
  }
  std::uint64_t u64(const char* what) {
    need(8, what);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) {
      v |= static_cast<std::uint64_t>(data_[pos_ + i]) << (8 * i);
    }
    pos_ += 8;
    return v;
  }
  float f32(const char* what) {
    return std::bit_cast<float>(u32(what));
  }
  std::string raw(std::size_t n, const char* what) {
    need(n, what);
    std::string s(reinterpret_cast<const char*>(data_ + pos_), n);
    pos_ += n;
    return s;
  }
  std::string str(const char* what) {
    const std::uint32_t n = u32(what);
    return raw(n, what);
  }
  std::size_t position() const {
    return pos_;
  }
  std::size_t remaining() const {
    return size_ - pos_;
  }

 private:
  void need(std::size_t n, const char* what) {
    if (size_ - pos_ < n) {
      fail(ErrorCode::Format, source_ + ": truncated while reading " + what);
    }
  }

  const std::uint8_t* data_;
  std::size_t size_;
  std::size_t pos_ = 0;
  std::string source_;
};

std::vector<std::uint8_t> read_file_bytes(const std::string& path);
void write_file_bytes(const std::string& path, const std::vector<std::uint8_t>& bytes);

// Verifies the trailing CRC-32 over everything before it.
void verify_trailing_crc(const std::vector<std::uint8_t>& bytes, const std::string& source);

} // namespace socialmotion::detail
