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
#include <span>
#include <string>
#include <vector>

#include "arcard/dataset.hpp"
#include "arcard/factorize.hpp"

namespace arcard {

enum class LogicalKind { kContent, kIndicator, kFanout };

// One column of a full-join row as the model sees it.
//
// Content columns carry dictionary tokens. Indicator columns are 0/1.
// Fanout columns carry an index into `fanout_values`, which lists the
// distinct fanout values of key column `ref` in ascending order.
struct LogicalColumn {
  LogicalKind kind = LogicalKind::kContent;
  ColumnRef ref;  // indicator: {table, 0}
  std::string name;
  uint32_t domain = 1;
  std::vector<uint64_t> fanout_values;
  uint32_t first_sub = 0;
  uint32_t sub_count = 1;
  ColumnFactorization factorization;
};

struct SubColumn {
  uint32_t logical = 0;
  uint32_t level = 0;
  uint32_t domain = 1;
};

// Column order of the model: every table column in declared order, then one
// indicator per table, then one fanout column per edge key column.
class ModelLayout {
 public:
  ModelLayout() = default;

  // Fanout domains take the union over all given datasets, which must share
  // the schema and dictionaries (snapshots of one history).
  static ModelLayout Build(const JoinSchema& schema, std::span<const Dataset* const> datasets,
                           FactorizationSpec spec);
  static ModelLayout Build(const Dataset& dataset, FactorizationSpec spec);

  FactorizationSpec spec() const { return spec_; }
  const std::vector<LogicalColumn>& columns() const { return columns_; }
  const std::vector<SubColumn>& subcolumns() const { return subcolumns_; }
  size_t logical_count() const { return columns_.size(); }
  size_t sub_count() const { return subcolumns_.size(); }

  uint32_t content_column(ColumnRef ref) const;
  uint32_t indicator_column(uint32_t table) const;
  // Throws LayoutMismatch if `key` has no fanout column.
  uint32_t fanout_column(ColumnRef key) const;
  // Token of a fanout value; throws LayoutMismatch for unseen values.
  Token fanout_token(uint32_t logical, uint64_t value) const;

  // Logical row -> subcolumn digits, and back.
  void factorize_row(std::span<const Token> logical, std::span<int32_t> out) const;
  std::vector<Token> defactorize_row(std::span<const int32_t> subs) const;

  std::string to_json() const;
  static ModelLayout FromJson(std::string_view text);

  bool operator==(const ModelLayout& other) const;

 private:
  void finish();

  FactorizationSpec spec_;
  std::vector<LogicalColumn> columns_;
  std::vector<SubColumn> subcolumns_;
  std::map<ColumnRef, uint32_t> content_index_;
  std::vector<uint32_t> indicator_index_;
  std::map<ColumnRef, uint32_t> fanout_index_;
};

}  // namespace arcard
