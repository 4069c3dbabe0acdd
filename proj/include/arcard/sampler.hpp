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

#include <condition_variable>
#include <cstdint>
#include <map>
#include <mutex>
#include <ostream>
#include <span>
#include <thread>
#include <vector>

#include "arcard/dataset.hpp"
#include "arcard/layout.hpp"
#include "arcard/rng.hpp"

namespace arcard {

// Role of one table in a drawn full-join row. A hanging slot is a NULL below
// a real parent without partners here; a bridge slot is a NULL whose subtree
// still holds the non-NULL part of the row.
enum class SlotState : uint8_t { kReal, kHanging, kBridge };

struct DrawnKeys {
  std::vector<SlotState> state;  // per table
  std::vector<uint32_t> row;     // per table; meaningful when real
};

struct SamplerConfig {
  size_t batch_size = 2048;
  uint32_t worker_count = 1;
  uint64_t seed = 0;
};

// Row-major logical tokens, one row per sample.
struct SampleBatch {
  size_t width = 0;
  std::vector<Token> tokens;

  size_t rows() const { return width == 0 ? 0 : tokens.size() / width; }
  std::span<const Token> row(size_t i) const { return {tokens.data() + i * width, width}; }
};

// Writes logical rows as CSV with a header of layout column names. Content
// cells are decoded, fanout cells hold the fanout value.
void write_rows_csv(std::ostream& out, const Dataset& dataset, const ModelLayout& layout,
                    const SampleBatch& batch);

// Uniform sampler over the full outer join of a dataset. Immutable; any
// number of threads may draw concurrently.
class JoinSampler {
 public:
  JoinSampler(const Dataset& dataset, const ModelLayout& layout);

  const Dataset& dataset() const { return *dataset_; }
  const ModelLayout& layout() const { return *layout_; }

  // Top-down weighted descent over the tree.
  DrawnKeys draw_keys(Rng& rng) const;
  // Content, indicator and fanout tokens in layout order.
  void complete_row(const DrawnKeys& keys, std::span<Token> out) const;

  // Row `index` of the stream named by `seed`. Each row owns its generator,
  // so output does not depend on how rows are split across workers.
  void sample_row(uint64_t seed, uint64_t index, std::span<Token> out) const;
  SampleBatch sample_batch(const SamplerConfig& config, uint64_t first_index = 0) const;

  void write_csv(std::ostream& out, const SampleBatch& batch) const {
    write_rows_csv(out, *dataset_, *layout_, batch);
  }

 private:
  struct LinkTable {
    std::vector<uint64_t> offsets;  // per parent-column token
    std::vector<uint32_t> groups;
    std::vector<Weight> cum;        // running sum within each token's range
    std::vector<uint32_t> unmatched_groups;
    std::vector<Weight> unmatched_cum;
    Weight unmatched_total = 0;
  };

  uint32_t pick_row(uint32_t table, uint32_t group, Rng& rng) const;

  const Dataset* dataset_;
  const ModelLayout* layout_;
  std::vector<Weight> root_cum_;
  Weight root_real_total_ = 0;
  std::vector<LinkTable> links_;                  // per schema link
  std::vector<std::vector<Weight>> bridge_cum_;   // per table, over child links
  std::vector<std::vector<Token>> fanout_tokens_;  // per fanout column: key token -> token
  std::vector<uint32_t> fanout_columns_;
};

// Bounded producer/consumer queue of training batches. Batch k always holds
// stream rows [k * batch_size, (k + 1) * batch_size), so the sequence seen by
// the consumer is the same for every worker count. Producers block while
// `capacity` batches are waiting.
class SamplePipeline {
 public:
  SamplePipeline(const JoinSampler& sampler, SamplerConfig config, size_t capacity = 4,
                 uint64_t first_batch = 0);
  ~SamplePipeline();
  SamplePipeline(const SamplePipeline&) = delete;
  SamplePipeline& operator=(const SamplePipeline&) = delete;

  SampleBatch next();

 private:
  void work(uint64_t first);

  const JoinSampler& sampler_;
  SamplerConfig config_;
  size_t capacity_;
  uint64_t next_ = 0;
  bool stop_ = false;
  std::mutex mu_;
  std::condition_variable cv_;
  std::map<uint64_t, SampleBatch> ready_;
  std::vector<std::thread> workers_;
};

}  // namespace arcard
