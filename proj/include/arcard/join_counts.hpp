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

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "arcard/schema.hpp"
#include "arcard/store.hpp"

namespace arcard {

// Exact join-count arithmetic. Overflow throws rather than wraps.
using Weight = unsigned __int128;

Weight checked_add(Weight a, Weight b);
Weight checked_mul(Weight a, Weight b);
std::string weight_to_string(Weight w);
Weight weight_from_string(std::string_view text);
double weight_to_double(Weight w);

// Key indexes for every edge column of every table.
struct KeyIndexSet {
  std::vector<std::map<uint32_t, KeyIndex>> by_table;

  static KeyIndexSet Build(const JoinSchema& schema, const std::vector<TableStore>& stores);
  const KeyIndex* find(ColumnRef ref) const;
  const KeyIndex& at(ColumnRef ref) const;
};

// Rows of a table grouped by their tuple of edge-column tokens. This is the
// composite index used for content lookup of a sampled key tuple. Single-column
// groups are in token order.
class KeyGroups {
 public:
  KeyGroups() = default;
  static KeyGroups Build(const TableStore& store, std::vector<uint32_t> key_columns);

  size_t size() const { return offsets_.empty() ? 0 : offsets_.size() - 1; }
  const std::vector<uint32_t>& key_columns() const { return key_columns_; }
  std::span<const Token> key(uint32_t group) const {
    return {keys_.data() + static_cast<size_t>(group) * key_columns_.size(), key_columns_.size()};
  }
  // Position of `column` within the key tuple.
  size_t key_position(uint32_t column) const;
  std::span<const uint32_t> rows(uint32_t group) const {
    return {rows_.data() + offsets_[group], static_cast<size_t>(offsets_[group + 1] - offsets_[group])};
  }
  uint64_t count(uint32_t group) const { return offsets_[group + 1] - offsets_[group]; }
  uint32_t group_of_row(uint32_t row) const { return row_group_.at(row); }
  std::optional<uint32_t> find(std::span<const Token> key) const;

 private:
  std::vector<uint32_t> key_columns_;
  std::vector<Token> keys_;
  std::vector<uint64_t> offsets_;
  std::vector<uint32_t> rows_;
  std::vector<uint32_t> row_group_;
};

// Join counts of one table, stored per key tuple rather than per row.
//
// A NULL (virtual) tuple plays two roles. Joined below a real parent that has
// no partner here, it stands for an all-NULL subtree and always weighs 1.
// Joined below a NULL parent it bridges to this table's children, picking up
// their unmatched tuples; `bridge_weight` is that count. The all-NULL row is
// never counted, so leaves have bridge weight 0.
struct JoinCountTable {
  uint32_t table = 0;
  KeyGroups groups;
  std::vector<Weight> weights;  // per group
  Weight bridge_weight = 0;

  static constexpr Weight kHangingNullWeight = 1;

  std::optional<Weight> weight_of(std::span<const Token> key) const;
};

class JoinCounts {
 public:
  JoinCounts() = default;

  // Bottom-up over the tree; linear in total row count.
  static JoinCounts Compute(const JoinSchema& schema, const std::vector<TableStore>& stores,
                            const KeyIndexSet& indexes);

  const JoinCountTable& table(uint32_t t) const { return tables_.at(t); }
  size_t table_count() const { return tables_.size(); }
  // Rows of the full outer join, NULL-padded rows included.
  Weight full_join_size() const { return full_join_size_; }

  // Rebuilds from serialized weights (snapshot load). Groups are recomputed
  // from `stores`; the weights must line up with them.
  static JoinCounts FromParts(const JoinSchema& schema, const std::vector<TableStore>& stores,
                              std::vector<std::vector<Weight>> weights,
                              std::vector<Weight> bridge_weights);

 private:
  std::vector<JoinCountTable> tables_;
  Weight full_join_size_ = 0;
};

// |J| from the root table's counts.
Weight full_join_size(const JoinCountTable& root);

}  // namespace arcard
