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
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "arcard/schema.hpp"

namespace arcard {

using Token = uint32_t;
inline constexpr Token kNullToken = 0;

using Value = std::variant<int64_t, std::string>;

std::string value_to_string(const Value& v);

// Order-preserving bijection between the distinct non-null values of a column
// and tokens 1..n. Token 0 is NULL.
class Dictionary {
 public:
  Dictionary() = default;
  explicit Dictionary(ValueType type) : type_(type) {}

  // Sorts and deduplicates; every value must match `type`.
  static Dictionary FromValues(ValueType type, std::vector<Value> values);

  ValueType type() const { return type_; }
  size_t value_count() const {
    return type_ == ValueType::kInteger ? ints_.size() : strings_.size();
  }
  // Number of tokens including NULL.
  uint32_t domain() const { return static_cast<uint32_t>(value_count() + 1); }

  std::optional<Token> find(const Value& v) const;
  // NULL for token 0; throws TokenOutOfRange past the end.
  std::optional<Value> decode(Token t) const;

  // Number of non-null values strictly below / at most `v`. With tokens
  // 1..n in value order, these are also the largest qualifying tokens.
  uint32_t count_less(const Value& v) const;
  uint32_t count_less_equal(const Value& v) const;

  const std::vector<int64_t>& int_values() const { return ints_; }
  const std::vector<std::string>& string_values() const { return strings_; }

  bool operator==(const Dictionary&) const = default;

 private:
  ValueType type_ = ValueType::kInteger;
  std::vector<int64_t> ints_;
  std::vector<std::string> strings_;
};

// Row-aligned token columns of one table plus their dictionaries.
struct TableStore {
  std::string name;
  std::vector<std::vector<Token>> columns;
  std::vector<Dictionary> dictionaries;

  size_t row_count() const { return columns.empty() ? 0 : columns.front().size(); }
};

// One row of raw cells, std::nullopt meaning NULL.
using RawRow = std::vector<std::optional<Value>>;

// Reads a header-first CSV (comma separated, double-quote escaping). An
// unquoted empty field is NULL; a quoted empty field is the empty string.
TableStore load_table(const std::filesystem::path& path, const TableDef& table);
TableStore parse_table_csv(std::string_view text, const TableDef& table);
// Builds a store from in-memory rows laid out as table.columns.
TableStore make_table(const TableDef& table, const std::vector<RawRow>& rows);

// Joined key columns must share one token space so that tokens can be
// compared across tables. Rebuilds each equivalence class of joined columns
// with the union dictionary and re-encodes the affected columns.
void unify_join_dictionaries(const JoinSchema& schema, std::vector<TableStore>& stores);

// Posting lists of one join-key column: token -> ascending row positions.
// NULL rows are not indexed.
class KeyIndex {
 public:
  KeyIndex() = default;
  static KeyIndex Build(const TableStore& store, uint32_t column);

  uint32_t column() const { return column_; }
  uint32_t domain() const { return static_cast<uint32_t>(offsets_.empty() ? 0 : offsets_.size() - 1); }
  std::span<const uint32_t> postings(Token t) const;
  // Number of rows carrying `t`; 1 for NULL.
  uint64_t fanout(Token t) const;
  uint64_t indexed_rows() const { return rows_.size(); }

 private:
  friend class SnapshotCodec;
  uint32_t column_ = 0;
  std::vector<uint64_t> offsets_;
  std::vector<uint32_t> rows_;
};

}  // namespace arcard
