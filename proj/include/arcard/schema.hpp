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

#include <compare>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "arcard/errors.hpp"

namespace arcard {

enum class ColumnKind { kContent, kJoinKey };
enum class ValueType { kInteger, kString };

struct ColumnDef {
  std::string name;
  ColumnKind kind = ColumnKind::kContent;
  ValueType value_type = ValueType::kInteger;
  bool range_filterable = false;
};

struct TableDef {
  std::string name;
  std::vector<ColumnDef> columns;
  // CSV path; relative paths resolve against the data directory.
  std::string file;
};

// Declared as "parent.col = child.col". The tree is re-oriented from the
// declared root when the schema is built, so the declared direction only
// matters for error messages.
struct JoinEdge {
  std::string parent_table;
  std::string parent_column;
  std::string child_table;
  std::string child_column;
};

struct SchemaDef {
  std::vector<TableDef> tables;
  std::vector<JoinEdge> edges;
  std::string root;
};

struct ColumnRef {
  uint32_t table = 0;
  uint32_t column = 0;
  auto operator<=>(const ColumnRef&) const = default;
};

// A validated join schema with its tree orientation precomputed.
// Immutable once built.
class JoinSchema {
 public:
  // One per edge, oriented away from the root.
  struct Link {
    uint32_t parent = 0;
    uint32_t child = 0;
    uint32_t parent_column = 0;
    uint32_t child_column = 0;
  };

  JoinSchema() = default;

  // Throws Error with the first violated invariant.
  static JoinSchema Build(SchemaDef def);

  const SchemaDef& def() const { return def_; }
  size_t table_count() const { return def_.tables.size(); }
  const TableDef& table(uint32_t t) const { return def_.tables.at(t); }
  const ColumnDef& column(ColumnRef ref) const {
    return def_.tables.at(ref.table).columns.at(ref.column);
  }
  uint32_t root() const { return root_; }

  std::optional<uint32_t> find_table(std::string_view name) const;
  std::optional<ColumnRef> find_column(std::string_view table,
                                       std::string_view column) const;
  // Resolves "table.column".
  std::optional<ColumnRef> resolve(std::string_view qualified) const;
  std::string qualified_name(ColumnRef ref) const;

  const std::vector<Link>& links() const { return links_; }
  // Index into links() of the edge to the parent; empty at the root.
  std::optional<uint32_t> parent_link(uint32_t table) const {
    return parent_link_.at(table);
  }
  const std::vector<uint32_t>& child_links(uint32_t table) const {
    return child_links_.at(table);
  }
  // Root first, then breadth-first.
  const std::vector<uint32_t>& bfs_order() const { return bfs_order_; }
  // Columns of `table` that take part in at least one edge, ascending.
  const std::vector<uint32_t>& edge_columns(uint32_t table) const {
    return edge_columns_.at(table);
  }
  // Tables adjacent to `table` in the tree.
  std::vector<uint32_t> neighbors(uint32_t table) const;

 private:
  SchemaDef def_;
  uint32_t root_ = 0;
  std::vector<Link> links_;
  std::vector<std::optional<uint32_t>> parent_link_;
  std::vector<std::vector<uint32_t>> child_links_;
  std::vector<uint32_t> bfs_order_;
  std::vector<std::vector<uint32_t>> edge_columns_;
};

Status validate_schema(const SchemaDef& def);

// Schema config documents (JSON; see README for the grammar).
SchemaDef parse_schema_config(std::string_view text);
JoinSchema load_schema_config(const std::filesystem::path& path);
std::string schema_to_config(const SchemaDef& def);

enum class CompareOp { kLt, kGt, kLe, kGe, kEq, kIn };

std::string_view compare_op_name(CompareOp op);
std::optional<CompareOp> parse_compare_op(std::string_view text);

using Literal = std::variant<int64_t, std::string>;

struct Predicate {
  std::string column;  // "table.column"
  CompareOp op = CompareOp::kEq;
  std::vector<Literal> literals;  // exactly one unless op is IN
};

struct QuerySpec {
  std::vector<std::string> tables;
  std::vector<Predicate> predicates;
};

Status validate_query(const JoinSchema& schema, const QuerySpec& query);

// Table indices of the query, ascending. Throws on unknown tables.
std::vector<uint32_t> query_table_indices(const JoinSchema& schema,
                                          const QuerySpec& query);

// For every table outside the query, the join-key column on the edge incident
// to it along the unique tree path toward the query subtree.
std::map<uint32_t, ColumnRef> resolve_fanout_keys(const JoinSchema& schema,
                                                  const QuerySpec& query);

// Whether `tables` induces a connected subtree.
bool is_connected_subtree(const JoinSchema& schema,
                          const std::vector<uint32_t>& tables);

// Every connected subtree, each as ascending table indices; ordered by size
// then lexicographically.
std::vector<std::vector<uint32_t>> connected_subtrees(const JoinSchema& schema);

}  // namespace arcard
