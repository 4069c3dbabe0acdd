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

#include "arcard/join_counts.hpp"

#include <algorithm>
#include <numeric>

#include "arcard/rng.hpp"

namespace arcard {

Weight checked_add(Weight a, Weight b) {
  Weight out;
  if (__builtin_add_overflow(a, b, &out)) fail(ErrorCode::kOverflow, "join count overflow");
  return out;
}

Weight checked_mul(Weight a, Weight b) {
  Weight out;
  if (__builtin_mul_overflow(a, b, &out)) fail(ErrorCode::kOverflow, "join count overflow");
  return out;
}

std::string weight_to_string(Weight w) {
  if (w == 0) return "0";
  std::string digits;
  while (w > 0) {
    digits.push_back(static_cast<char>('0' + static_cast<int>(w % 10)));
    w /= 10;
  }
  std::reverse(digits.begin(), digits.end());
  return digits;
}

Weight weight_from_string(std::string_view text) {
  if (text.empty()) fail(ErrorCode::kInvalidArgument, "empty weight");
  Weight w = 0;
  for (char c : text) {
    if (c < '0' || c > '9') fail(ErrorCode::kInvalidArgument, "bad weight '" + std::string(text) + "'");
    w = checked_add(checked_mul(w, 10), static_cast<Weight>(c - '0'));
  }
  return w;
}

double weight_to_double(Weight w) {
  const auto hi = static_cast<uint64_t>(w >> 64);
  const auto lo = static_cast<uint64_t>(w);
  return static_cast<double>(hi) * 18446744073709551616.0 + static_cast<double>(lo);
}

// ---------------------------------------------------------------------------

KeyIndexSet KeyIndexSet::Build(const JoinSchema& schema, const std::vector<TableStore>& stores) {
  KeyIndexSet set;
  set.by_table.resize(schema.table_count());
  for (uint32_t t = 0; t < schema.table_count(); ++t) {
    for (uint32_t c : schema.edge_columns(t)) {
      set.by_table[t].emplace(c, KeyIndex::Build(stores.at(t), c));
    }
  }
  return set;
}

const KeyIndex* KeyIndexSet::find(ColumnRef ref) const {
  if (ref.table >= by_table.size()) return nullptr;
  auto it = by_table[ref.table].find(ref.column);
  return it == by_table[ref.table].end() ? nullptr : &it->second;
}

const KeyIndex& KeyIndexSet::at(ColumnRef ref) const {
  const KeyIndex* index = find(ref);
  if (!index) {
    fail(ErrorCode::kSchemaMismatch, "no key index for table " + std::to_string(ref.table) +
                                         " column " + std::to_string(ref.column));
  }
  return *index;
}

// ---------------------------------------------------------------------------
// KeyGroups

KeyGroups KeyGroups::Build(const TableStore& store, std::vector<uint32_t> key_columns) {
  KeyGroups g;
  g.key_columns_ = std::move(key_columns);
  const size_t n = store.row_count();
  const size_t arity = g.key_columns_.size();
  g.row_group_.assign(n, 0);
  std::vector<uint64_t> counts;

  if (arity == 0) {
    if (n > 0) counts.push_back(n);
  } else if (arity == 1) {
    // Groups in token order.
    const auto& col = store.columns.at(g.key_columns_[0]);
    const uint32_t domain = store.dictionaries.at(g.key_columns_[0]).domain();
    std::vector<uint32_t> group_of_token(domain, 0);
    for (size_t r = 0; r < n; ++r) {
      if (col[r] >= domain) fail(ErrorCode::kTokenOutOfRange, "key token outside its dictionary");
      group_of_token[col[r]] = 1;
    }
    for (Token t = 0; t < domain; ++t) {
      if (group_of_token[t]) {
        group_of_token[t] = static_cast<uint32_t>(g.keys_.size());
        g.keys_.push_back(t);
      }
    }
    counts.assign(g.keys_.size(), 0);
    for (size_t r = 0; r < n; ++r) {
      const uint32_t slot = group_of_token[col[r]];
      ++counts[slot];
      g.row_group_[r] = slot;
    }
  } else {
    // Open addressing over group ids; keys live flat in g.keys_.
    size_t cap = 16;
    while (cap < 2 * n) cap <<= 1;
    std::vector<uint32_t> slots(cap, UINT32_MAX);
    std::vector<const Token*> cols(arity);
    for (size_t k = 0; k < arity; ++k) cols[k] = store.columns.at(g.key_columns_[k]).data();
    for (size_t r = 0; r < n; ++r) {
      uint64_t h = 1469598103934665603ull;
      for (size_t k = 0; k < arity; ++k) h = mix64(h ^ cols[k][r]);
      size_t pos = h & (cap - 1);
      for (;; pos = (pos + 1) & (cap - 1)) {
        const uint32_t id = slots[pos];
        if (id == UINT32_MAX) {
          slots[pos] = static_cast<uint32_t>(counts.size());
          counts.push_back(0);
          for (size_t k = 0; k < arity; ++k) g.keys_.push_back(cols[k][r]);
          break;
        }
        const Token* key = g.keys_.data() + static_cast<size_t>(id) * arity;
        size_t k = 0;
        while (k < arity && key[k] == cols[k][r]) ++k;
        if (k == arity) break;
      }
      ++counts[slots[pos]];
      g.row_group_[r] = slots[pos];
    }
  }

  g.offsets_.assign(counts.size() + 1, 0);
  std::partial_sum(counts.begin(), counts.end(), g.offsets_.begin() + 1);
  g.rows_.resize(n);
  for (uint32_t r = static_cast<uint32_t>(n); r-- > 0;) g.rows_[--g.offsets_[g.row_group_[r] + 1]] = r;
  std::rotate(g.offsets_.begin(), g.offsets_.begin() + 1, g.offsets_.end());
  g.offsets_.back() = n;
  return g;
}

size_t KeyGroups::key_position(uint32_t column) const {
  auto it = std::find(key_columns_.begin(), key_columns_.end(), column);
  if (it == key_columns_.end()) {
    fail(ErrorCode::kSchemaMismatch, "column " + std::to_string(column) + " is not a key column");
  }
  return static_cast<size_t>(it - key_columns_.begin());
}

std::optional<uint32_t> KeyGroups::find(std::span<const Token> key) const {
  if (key.size() != key_columns_.size()) return std::nullopt;
  const size_t arity = key.size();
  if (arity == 1) {
    auto it = std::lower_bound(keys_.begin(), keys_.end(), key[0]);
    if (it == keys_.end() || *it != key[0]) return std::nullopt;
    return static_cast<uint32_t>(it - keys_.begin());
  }
  for (uint32_t g = 0; g < size(); ++g) {
    if (std::equal(key.begin(), key.end(), keys_.begin() + static_cast<ptrdiff_t>(g * arity))) {
      return g;
    }
  }
  return std::nullopt;
}

std::optional<Weight> JoinCountTable::weight_of(std::span<const Token> key) const {
  auto g = groups.find(key);
  if (!g) return std::nullopt;
  return weights[*g];
}

Weight full_join_size(const JoinCountTable& root) {
  Weight total = root.bridge_weight;
  for (uint32_t g = 0; g < root.groups.size(); ++g) {
    total = checked_add(total, checked_mul(root.weights[g], root.groups.count(g)));
  }
  return total;
}

// ---------------------------------------------------------------------------
// DP

JoinCounts JoinCounts::Compute(const JoinSchema& schema, const std::vector<TableStore>& stores,
                               const KeyIndexSet& indexes) {
  const size_t n = schema.table_count();
  if (stores.size() != n) fail(ErrorCode::kSchemaMismatch, "store count does not match schema");
  JoinCounts counts;
  counts.tables_.resize(n);
  for (uint32_t t = 0; t < n; ++t) {
    counts.tables_[t].table = t;
    counts.tables_[t].groups = KeyGroups::Build(stores[t], schema.edge_columns(t));
  }

  const auto& order = schema.bfs_order();
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    const uint32_t t = *it;
    JoinCountTable& self = counts.tables_[t];
    const size_t groups = self.groups.size();
    self.weights.assign(groups, 1);
    Weight bridge = 0;

    for (uint32_t l : schema.child_links(t)) {
      const auto& link = schema.links()[l];
      const JoinCountTable& child = counts.tables_[link.child];
      indexes.at({t, link.parent_column});  // must exist
      indexes.at({link.child, link.child_column});

      // Total child weight per join value.
      const size_t child_pos = child.groups.key_position(link.child_column);
      std::vector<Weight> per_value(stores[t].dictionaries.at(link.parent_column).domain(), 0);
      for (uint32_t h = 0; h < child.groups.size(); ++h) {
        const Token v = child.groups.key(h)[child_pos];
        const Weight mass = checked_mul(child.weights[h], child.groups.count(h));
        if (v == kNullToken) {
          bridge = checked_add(bridge, mass);
        } else {
          if (v >= per_value.size()) fail(ErrorCode::kSchemaMismatch, "join key dictionaries are not shared");
          per_value[v] = checked_add(per_value[v], mass);
        }
      }
      bridge = checked_add(bridge, child.bridge_weight);

      const size_t self_pos = self.groups.key_position(link.parent_column);
      std::vector<bool> matched(per_value.size(), false);
      for (uint32_t g = 0; g < groups; ++g) {
        const Token v = self.groups.key(g)[self_pos];
        if (v == kNullToken || per_value[v] == 0) continue;  // hanging NULL weight 1
        matched[v] = true;
        self.weights[g] = checked_mul(self.weights[g], per_value[v]);
      }
      // Child tuples with no partner here are reachable only through our
      // NULL tuple.
      for (Token v = 1; v < per_value.size(); ++v) {
        if (!matched[v]) bridge = checked_add(bridge, per_value[v]);
      }
    }
    self.bridge_weight = bridge;
  }
  counts.full_join_size_ = arcard::full_join_size(counts.tables_[schema.root()]);
  return counts;
}

JoinCounts JoinCounts::FromParts(const JoinSchema& schema, const std::vector<TableStore>& stores,
                                 std::vector<std::vector<Weight>> weights,
                                 std::vector<Weight> bridge_weights) {
  const size_t n = schema.table_count();
  if (stores.size() != n || weights.size() != n || bridge_weights.size() != n) {
    fail(ErrorCode::kSchemaMismatch, "join count tables do not match schema");
  }
  JoinCounts counts;
  counts.tables_.resize(n);
  for (uint32_t t = 0; t < n; ++t) {
    auto& table = counts.tables_[t];
    table.table = t;
    table.groups = KeyGroups::Build(stores[t], schema.edge_columns(t));
    if (weights[t].size() != table.groups.size()) {
      fail(ErrorCode::kSchemaMismatch, "join count table size mismatch for " + stores[t].name);
    }
    table.weights = std::move(weights[t]);
    table.bridge_weight = bridge_weights[t];
  }
  counts.full_join_size_ = arcard::full_join_size(counts.tables_[schema.root()]);
  return counts;
}

}  // namespace arcard
