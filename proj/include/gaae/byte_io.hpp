// Copyright 2026 The GAAE Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <span>
#include <string>
#include <string_view>

#include "gaae/error.hpp"

namespace gaae {

// Little-endian encoder appending to an in-memory byte string.
class ByteWriter {
 public:
  void Bytes(std::string_view raw) { buffer_.append(raw); }

  void U8(std::uint8_t v) { buffer_.push_back(static_cast<char>(v)); }

  void U32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) U8(static_cast<std::uint8_t>(v >> (8 * i)));
  }

  void U64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) U8(static_cast<std::uint8_t>(v >> (8 * i)));
  }

  void F64(double v) { U64(std::bit_cast<std::uint64_t>(v)); }

  void F64s(std::span<const double> values) {
    for (double v : values) F64(v);
  }

  const std::string& buffer() const { return buffer_; }
  std::string Release() { return std::move(buffer_); }

 private:
  std::string buffer_;
};

// Little-endian decoder. Every failure reports the offset it stopped at.
class ByteReader {
 public:
  explicit ByteReader(std::string_view data) : data_(data) {}

  std::uint64_t offset() const { return offset_; }
  std::size_t remaining() const { return data_.size() - offset_; }

  std::string_view Bytes(std::size_t n, const char* what) {
    Require(n, what);
    std::string_view out = data_.substr(offset_, n);
    offset_ += n;
    return out;
  }

  std::uint8_t U8(const char* what) {
    Require(1, what);
    return static_cast<std::uint8_t>(data_[offset_++]);
  }

  std::uint32_t U32(const char* what) {
    Require(4, what);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) {
      v |= static_cast<std::uint32_t>(
               static_cast<std::uint8_t>(data_[offset_ + i]))
           << (8 * i);
    }
    offset_ += 4;
    return v;
  }

  std::uint64_t U64(const char* what) {
    Require(8, what);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) {
      v |= static_cast<std::uint64_t>(
               static_cast<std::uint8_t>(data_[offset_ + i]))
           << (8 * i);
    }
    offset_ += 8;
    return v;
  }

  double F64(const char* what) { return std::bit_cast<double>(U64(what)); }

  void F64s(std::span<double> out, const char* what) {
    Require(8 * out.size(), what);
    for (double& v : out) v = F64(what);
  }

  void ExpectEnd() const {
    if (offset_ != data_.size()) {
      throw FormatError(
          std::to_string(data_.size() - offset_) + " trailing bytes", offset_);
    }
  }

 private:
  void Require(std::size_t n, const char* what) const {
    if (data_.size() - offset_ < n) {
      throw FormatError(std::string("truncated input while reading ") + what,
                        offset_);
    }
  }

  std::string_view data_;
  std::uint64_t offset_ = 0;
};

inline std::string ReadFileBytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string() + " for reading");
  return std::string(std::istreambuf_iterator<char>(in),
                     std::istreambuf_iterator<char>());
}

inline void WriteFileBytes(const std::filesystem::path& path,
                           std::string_view bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("short write to " + path.string());
}

}  // namespace gaae
