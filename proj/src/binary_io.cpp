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

#include "arcard/binary_io.hpp"

#include <fstream>
#include <sstream>

namespace arcard {

void write_container(const std::filesystem::path& path, std::string_view magic, uint32_t version,
                     const std::vector<std::pair<std::string, std::string>>& sections) {
  if (magic.size() != 8) fail(ErrorCode::kInternal, "container magic must be 8 bytes");
  BinaryWriter w;
  w.raw(magic.data(), magic.size());
  w.u32(version);
  w.u32(static_cast<uint32_t>(sections.size()));
  for (const auto& [tag, payload] : sections) {
    if (tag.size() != 4) fail(ErrorCode::kInternal, "section tags are 4 bytes");
    w.raw(tag.data(), 4);
    w.u64(payload.size());
    w.raw(payload.data(), payload.size());
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::kIoError, "cannot write " + path.string());
  out.write(w.data().data(), static_cast<std::streamsize>(w.data().size()));
  if (!out) fail(ErrorCode::kIoError, "write failed on " + path.string());
}

Container read_container(const std::filesystem::path& path, std::string_view magic,
                         uint32_t expected_version, ErrorCode corrupt) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::kIoError, "cannot open " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  const std::string bytes = buffer.str();

  BinaryReader r(bytes, corrupt);
  char head[8];
  r.raw(head, sizeof head);
  if (std::string_view(head, 8) != magic) fail(corrupt, path.string() + ": bad magic");
  Container c;
  c.version = r.u32();
  if (c.version != expected_version) {
    fail(ErrorCode::kVersionMismatch, path.string() + ": format version " +
                                          std::to_string(c.version) + ", expected " +
                                          std::to_string(expected_version));
  }
  const uint32_t count = r.u32();
  for (uint32_t i = 0; i < count; ++i) {
    char tag[4];
    r.raw(tag, sizeof tag);
    const uint64_t length = r.u64();
    if (length > r.remaining()) fail(corrupt, path.string() + ": truncated section");
    std::string payload(length, '\0');
    if (length > 0) r.raw(payload.data(), length);
    c.sections.emplace(std::string(tag, 4), std::move(payload));
  }
  r.expect_done();
  return c;
}

uint64_t fnv1a64(std::string_view bytes, uint64_t seed) {
  uint64_t h = seed;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace arcard
