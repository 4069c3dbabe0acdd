/*
 * Copyright 2026 The arcard Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

// Little-endian section container shared by dataset snapshots and model
// checkpoints:
//
//   magic[8] | u32 format_version | u32 section_count |
//   { tag[4] | u64 payload_length | payload } * section_count

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "arcard/errors.hpp"

namespace arcard {

static_assert(std::endian::native == std::endian::little,
              "binary containers are written in host order; big-endian hosts are unsupported");

class BinaryWriter {
 public:
  void u8(uint8_t v) { buf_.push_back(static_cast<char>(v)); }
  void u32(uint32_t v) { raw(&v, sizeof v); }
  void u64(uint64_t v) { raw(&v, sizeof v); }
  void i64(int64_t v) { raw(&v, sizeof v); }
  void f32(float v) { raw(&v, sizeof v); }
  void f64(double v) { raw(&v, sizeof v); }
  void str(std::string_view s) {
    u64(s.size());
    buf_.append(s.data(), s.size());
  }
  template <typename T>
  void array(std::span<const T> values) {
    u64(values.size());
    raw(values.data(), values.size_bytes());
  }
  void raw(const void* data, size_t size) {
    buf_.append(static_cast<const char*>(data), size);
  }

  const std::string& data() const { return buf_; }
  std::string take() { return std::move(buf_); }

 private:
  std::string buf_;
};

class BinaryReader {
 public:
  BinaryReader(std::string_view data, ErrorCode on_error) : data_(data), error_(on_error) {}

  uint8_t u8() { return scalar<uint8_t>(); }
  uint32_t u32() { return scalar<uint32_t>(); }
  uint64_t u64() { return scalar<uint64_t>(); }
  int64_t i64() { return scalar<int64_t>(); }
  float f32() { return scalar<float>(); }
  double f64() { return scalar<double>(); }
  std::string str() {
    const uint64_t n = u64();
    need(n);
    std::string out(data_.substr(pos_, n));
    pos_ += n;
    return out;
  }
  template <typename T>
  std::vector<T> array() {
    const uint64_t n = u64();
    if (n > (data_.size() - pos_) / sizeof(T)) fail(error_, "truncated array");
    std::vector<T> out(n);
    std::memcpy(out.data(), data_.data() + pos_, n * sizeof(T));
    pos_ += n * sizeof(T);
    return out;
  }
  void raw(void* out, size_t size) {
    need(size);
    std::memcpy(out, data_.data() + pos_, size);
    pos_ += size;
  }

  size_t remaining() const { return data_.size() - pos_; }
  bool done() const { return pos_ == data_.size(); }
  void expect_done() const {
    if (!done()) fail(error_, "trailing bytes in section");
  }

 private:
  template <typename T>
  T scalar() {
    need(sizeof(T));
    T v;
    std::memcpy(&v, data_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return v;
  }
  void need(uint64_t n) const {
    if (n > data_.size() - pos_) fail(error_, "truncated data");
  }

  std::string_view data_;
  size_t pos_ = 0;
  ErrorCode error_;
};

struct Container {
  uint32_t version = 0;
  std::map<std::string, std::string> sections;  // tag -> payload

  const std::string& section(const std::string& tag, ErrorCode on_missing) const {
    auto it = sections.find(tag);
    if (it == sections.end()) fail(on_missing, "missing section '" + tag + "'");
    return it->second;
  }
};

// Sections are written in the order given.
void write_container(const std::filesystem::path& path, std::string_view magic, uint32_t version,
                     const std::vector<std::pair<std::string, std::string>>& sections);

// Throws `corrupt` on malformed input and kVersionMismatch when the version
// differs from `expected_version`.
Container read_container(const std::filesystem::path& path, std::string_view magic,
                         uint32_t expected_version, ErrorCode corrupt);

uint64_t fnv1a64(std::string_view bytes, uint64_t seed = 1469598103934665603ull);

}  // namespace arcard
