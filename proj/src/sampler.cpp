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

#include "arcard/sampler.hpp"

#include <algorithm>

namespace arcard {

namespace {

// Index of the first entry of `cum[lo, hi)` exceeding r.
size_t pick(const std::vector<Weight>& cum, size_t lo, size_t hi, Weight r) {
  auto it = std::upper_bound(cum.begin() + static_cast<ptrdiff_t>(lo),
                             cum.begin() + static_cast<ptrdiff_t>(hi), r);
  return static_cast<size_t>(it - cum.begin());
}

}  // namespace

JoinSampler::JoinSampler(const Dataset& dataset, const ModelLayout& layout)
    : dataset_(&dataset), layout_(&layout) {
  const JoinSchema& schema = dataset.schema();
  const JoinCounts& counts = dataset.counts();
  if (layout.logical_count() == 0) fail(ErrorCode::kLayoutMismatch, "empty layout");

  const JoinCountTable& root = counts.table(schema.root());
  for (uint32_t g = 0; g < root.groups.size(); ++g) {
    root_real_total_ =
        checked_add(root_real_total_, checked_mul(root.weights[g], root.groups.count(g)));
    root_cum_.push_back(root_real_total_);
  }

  links_.resize(schema.links().size());
  for (uint32_t l = 0; l < schema.links().size(); ++l) {
    const auto& link = schema.links()[l];
    const JoinCountTable& child = counts.table(link.child);
    const KeyIndex& parent_index = dataset.indexes().at({link.parent, link.parent_column});
    const uint32_t domain = dataset.dictionary({link.parent, link.parent_column}).domain();
    const size_t pos = child.groups.key_position(link.child_column);
    LinkTable& lt = links_[l];

    std::vector<std::vector<uint32_t>> by_token(domain);
    for (uint32_t h = 0; h < child.groups.size(); ++h) {
      const Token v = child.groups.key(h)[pos];
      const Weight mass = checked_mul(child.weights[h], child.groups.count(h));
      if (v != kNullToken && v < domain && parent_index.fanout(v) > 0) {
        by_token[v].push_back(h);
      } else {
        lt.unmatched_total = checked_add(lt.unmatched_total, mass);
        lt.unmatched_groups.push_back(h);
        lt.unmatched_cum.push_back(lt.unmatched_total);
      }
    }
    lt.offsets.assign(static_cast<size_t>(domain) + 1, 0);
    for (uint32_t v = 0; v < domain; ++v) {
      lt.offsets[v + 1] = lt.offsets[v] + by_token[v].size();
      Weight running = 0;
      for (uint32_t h : by_token[v]) {
        running = checked_add(running, checked_mul(child.weights[h], child.groups.count(h)));
        lt.groups.push_back(h);
        lt.cum.push_back(running);
      }
    }
  }

  bridge_cum_.resize(schema.table_count());
  for (uint32_t t = 0; t < schema.table_count(); ++t) {
    Weight running = 0;
    for (uint32_t l : schema.child_links(t)) {
      const Weight z = counts.table(schema.links()[l].child).bridge_weight;
      running = checked_add(running, checked_add(links_[l].unmatched_total, z));
      bridge_cum_[t].push_back(running);
    }
    if (running != counts.table(t).bridge_weight) {
      fail(ErrorCode::kInternal, "bridge weights disagree with join counts");
    }
  }

  for (uint32_t i = 0; i < layout.logical_count(); ++i) {
    const LogicalColumn& col = layout.columns()[i];
    if (col.kind != LogicalKind::kFanout) continue;
    const KeyIndex& index = dataset.indexes().at(col.ref);
    const uint32_t domain = dataset.dictionary(col.ref).domain();
    std::vector<Token> map(domain, 0);
    for (Token v = 0; v < domain; ++v) {
      const uint64_t f = index.fanout(v);
      if (f > 0) map[v] = layout.fanout_token(i, f);
    }
    fanout_columns_.push_back(i);
    fanout_tokens_.push_back(std::move(map));
  }
}

uint32_t JoinSampler::pick_row(uint32_t table, uint32_t group, Rng& rng) const {
  const auto rows = dataset_->counts().table(table).groups.rows(group);
  if (rows.empty()) fail(ErrorCode::kIndexMiss, "empty key group");
  return rows[rng.below(rows.size())];
}

DrawnKeys JoinSampler::draw_keys(Rng& rng) const {
  const JoinSchema& schema = dataset_->schema();
  const size_t n = schema.table_count();
  DrawnKeys keys;
  keys.state.assign(n, SlotState::kHanging);
  keys.row.assign(n, 0);

  const uint32_t root = schema.root();
  const Weight total = dataset_->full_join_size();
  if (total == 0) fail(ErrorCode::kInvalidArgument, "cannot sample an empty join");
  const Weight r = rng.below128(total);
  if (r < root_real_total_) {
    const auto g = static_cast<uint32_t>(pick(root_cum_, 0, root_cum_.size(), r));
    keys.state[root] = SlotState::kReal;
    keys.row[root] = pick_row(root, g, rng);
  } else {
    keys.state[root] = SlotState::kBridge;
  }

  for (uint32_t t : schema.bfs_order()) {
    const auto& child_links = schema.child_links(t);
    if (child_links.empty()) continue;
    switch (keys.state[t]) {
      case SlotState::kHanging:
        for (uint32_t l : child_links) keys.state[schema.links()[l].child] = SlotState::kHanging;
        break;
      case SlotState::kReal:
        for (uint32_t l : child_links) {
          const auto& link = schema.links()[l];
          const LinkTable& lt = links_[l];
          const Token v = dataset_->store(t).columns[link.parent_column][keys.row[t]];
          const uint64_t lo = v < lt.offsets.size() - 1 ? lt.offsets[v] : 0;
          const uint64_t hi = v < lt.offsets.size() - 1 ? lt.offsets[v + 1] : 0;
          if (v == kNullToken || lo == hi) {
            keys.state[link.child] = SlotState::kHanging;
            continue;
          }
          const Weight x = rng.below128(lt.cum[hi - 1]);
          const uint32_t h = lt.groups[pick(lt.cum, lo, hi, x)];
          keys.state[link.child] = SlotState::kReal;
          keys.row[link.child] = pick_row(link.child, h, rng);
        }
        break;
      case SlotState::kBridge: {
        const auto& cum = bridge_cum_[t];
        const Weight x = rng.below128(cum.back());
        const size_t chosen = pick(cum, 0, cum.size(), x);
        const Weight offset = x - (chosen == 0 ? 0 : cum[chosen - 1]);
        for (size_t i = 0; i < child_links.size(); ++i) {
          const auto& link = schema.links()[child_links[i]];
          if (i != chosen) {
            keys.state[link.child] = SlotState::kHanging;
            continue;
          }
          const LinkTable& lt = links_[child_links[i]];
          if (offset < lt.unmatched_total) {
            const uint32_t h = lt.unmatched_groups[pick(lt.unmatched_cum, 0,
                                                        lt.unmatched_cum.size(), offset)];
            keys.state[link.child] = SlotState::kReal;
            keys.row[link.child] = pick_row(link.child, h, rng);
          } else {
            keys.state[link.child] = SlotState::kBridge;
          }
        }
        break;
      }
    }
  }
  return keys;
}

void JoinSampler::complete_row(const DrawnKeys& keys, std::span<Token> out) const {
  const ModelLayout& layout = *layout_;
  if (out.size() != layout.logical_count()) fail(ErrorCode::kLayoutMismatch, "row width");
  const auto& stores = dataset_->stores();
  size_t i = 0;
  for (uint32_t t = 0; t < stores.size(); ++t) {
    const bool real = keys.state[t] == SlotState::kReal;
    if (real && keys.row[t] >= stores[t].row_count()) {
      fail(ErrorCode::kIndexMiss, "drawn row outside table " + stores[t].name);
    }
    for (const auto& col : stores[t].columns) out[i++] = real ? col[keys.row[t]] : kNullToken;
  }
  for (uint32_t t = 0; t < stores.size(); ++t) {
    out[i++] = keys.state[t] == SlotState::kReal ? 1 : 0;
  }
  for (size_t f = 0; f < fanout_columns_.size(); ++f) {
    const ColumnRef ref = layout.columns()[fanout_columns_[f]].ref;
    const Token key = keys.state[ref.table] == SlotState::kReal
                          ? stores[ref.table].columns[ref.column][keys.row[ref.table]]
                          : kNullToken;
    out[fanout_columns_[f]] = fanout_tokens_[f][key];
  }
}

void JoinSampler::sample_row(uint64_t seed, uint64_t index, std::span<Token> out) const {
  Rng rng(derive_seed(seed, {index}));
  complete_row(draw_keys(rng), out);
}

SampleBatch JoinSampler::sample_batch(const SamplerConfig& config, uint64_t first_index) const {
  if (config.worker_count == 0) fail(ErrorCode::kInvalidArgument, "worker_count must be >= 1");
  SampleBatch batch;
  batch.width = layout_->logical_count();
  batch.tokens.resize(config.batch_size * batch.width);
  auto run = [&](size_t lo, size_t hi) {
    for (size_t i = lo; i < hi; ++i) {
      sample_row(config.seed, first_index + i,
                 std::span<Token>(batch.tokens.data() + i * batch.width, batch.width));
    }
  };
  const size_t workers = std::min<size_t>(config.worker_count, std::max<size_t>(config.batch_size, 1));
  if (workers <= 1) {
    run(0, config.batch_size);
    return batch;
  }
  std::vector<std::thread> threads;
  std::vector<std::exception_ptr> errors(workers);
  const size_t chunk = (config.batch_size + workers - 1) / workers;
  for (size_t w = 0; w < workers; ++w) {
    threads.emplace_back([&, w] {
      try {
        run(std::min(config.batch_size, w * chunk), std::min(config.batch_size, (w + 1) * chunk));
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& th : threads) th.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return batch;
}

void write_rows_csv(std::ostream& out, const Dataset& dataset, const ModelLayout& layout,
                    const SampleBatch& batch) {
  const auto& cols = layout.columns();
  for (size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << cols[i].name;
  out << "\n";
  for (size_t r = 0; r < batch.rows(); ++r) {
    const auto row = batch.row(r);
    for (size_t i = 0; i < cols.size(); ++i) {
      if (i) out << ",";
      const LogicalColumn& col = cols[i];
      switch (col.kind) {
        case LogicalKind::kContent: {
          auto v = dataset.dictionary(col.ref).decode(row[i]);
          if (!v) break;
          if (const auto* s = std::get_if<std::string>(&*v)) {
            out << '"';
            for (char c : *s) out << (c == '"' ? "\"\"" : std::string(1, c));
            out << '"';
          } else {
            out << std::get<int64_t>(*v);
          }
          break;
        }
        case LogicalKind::kIndicator:
          out << row[i];
          break;
        case LogicalKind::kFanout:
          out << col.fanout_values[row[i]];
          break;
      }
    }
    out << "\n";
  }
}

// ---------------------------------------------------------------------------

SamplePipeline::SamplePipeline(const JoinSampler& sampler, SamplerConfig config, size_t capacity,
                               uint64_t first_batch)
    : sampler_(sampler), config_(config), capacity_(std::max<size_t>(capacity, 1)),
      next_(first_batch) {
  if (config_.worker_count == 0) fail(ErrorCode::kInvalidArgument, "worker_count must be >= 1");
  for (uint32_t w = 0; w < config_.worker_count; ++w) {
    workers_.emplace_back([this, k = first_batch + w] { work(k); });
  }
}

SamplePipeline::~SamplePipeline() {
  {
    std::lock_guard lock(mu_);
    stop_ = true;
  }
  cv_.notify_all();
  for (auto& th : workers_) th.join();
}

void SamplePipeline::work(uint64_t first) {
  SamplerConfig single = config_;
  single.worker_count = 1;
  for (uint64_t k = first;; k += config_.worker_count) {
    {
      std::unique_lock lock(mu_);
      cv_.wait(lock, [&] { return stop_ || k < next_ + capacity_; });
      if (stop_) return;
    }
    SampleBatch batch;
    try {
      batch = sampler_.sample_batch(single, k * config_.batch_size);
    } catch (...) {
      // Surface as an empty batch; next() reports it.
      batch.width = 0;
    }
    {
      std::lock_guard lock(mu_);
      ready_.emplace(k, std::move(batch));
    }
    cv_.notify_all();
  }
}

SampleBatch SamplePipeline::next() {
  std::unique_lock lock(mu_);
  cv_.wait(lock, [&] { return ready_.count(next_) > 0; });
  auto node = ready_.extract(next_);
  ++next_;
  lock.unlock();
  cv_.notify_all();
  if (node.mapped().width == 0 && config_.batch_size > 0) {
    fail(ErrorCode::kInternal, "sampler worker failed");
  }
  return std::move(node.mapped());
}

}  // namespace arcard
