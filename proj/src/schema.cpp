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

#include "arcard/schema.hpp"

#include <algorithm>
#include <deque>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "json.hpp"

namespace arcard {

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kOk: return "Ok";
    case ErrorCode::kCycleDetected: return "CycleDetected";
    case ErrorCode::kDisconnected: return "Disconnected";
    case ErrorCode::kUnknownColumn: return "UnknownColumn";
    case ErrorCode::kDuplicateName: return "DuplicateName";
    case ErrorCode::kQueryNotSubtree: return "QueryNotSubtree";
    case ErrorCode::kBadLiteralType: return "BadLiteralType";
    case ErrorCode::kMissingColumn: return "MissingColumn";
    case ErrorCode::kTypeParseError: return "TypeParseError";
    case ErrorCode::kIoError: return "IoError";
    case ErrorCode::kSchemaMismatch: return "SchemaMismatch";
    case ErrorCode::kOverflow: return "Overflow";
    case ErrorCode::kIndexMiss: return "IndexMiss";
    case ErrorCode::kTokenOutOfRange: return "TokenOutOfRange";
    case ErrorCode::kSubtokenOutOfRange: return "SubtokenOutOfRange";
    case ErrorCode::kUnsupportedOperator: return "UnsupportedOperator";
    case ErrorCode::kLayoutMismatch: return "LayoutMismatch";
    case ErrorCode::kNonFiniteLoss: return "NonFiniteLoss";
    case ErrorCode::kVersionMismatch: return "VersionMismatch";
    case ErrorCode::kCorruptCheckpoint: return "CorruptCheckpoint";
    case ErrorCode::kTooLarge: return "TooLarge";
    case ErrorCode::kEmptyJoinGraph: return "EmptyJoinGraph";
    case ErrorCode::kConfigError: return "ConfigError";
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kInternal: return "Internal";
  }
  return "Unknown";
}

namespace {

std::optional<uint32_t> table_index(const SchemaDef& def, std::string_view name) {
  for (uint32_t t = 0; t < def.tables.size(); ++t) {
    if (def.tables[t].name == name) return t;
  }
  return std::nullopt;
}

std::optional<uint32_t> column_index(const TableDef& table, std::string_view name) {
  for (uint32_t c = 0; c < table.columns.size(); ++c) {
    if (table.columns[c].name == name) return c;
  }
  return std::nullopt;
}

struct UnionFind {
  std::vector<uint32_t> parent;
  explicit UnionFind(size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0u); }
  uint32_t find(uint32_t x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  }
  bool unite(uint32_t a, uint32_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    parent[b] = a;
    return true;
  }
};

// Resolved endpoints of an edge, by index.
struct ResolvedEdge {
  ColumnRef a;
  ColumnRef b;
};

// Checks everything; on success fills `resolved` and `root`.
Status check_schema(const SchemaDef& def, std::vector<ResolvedEdge>* resolved,
                    uint32_t* root) {
  if (def.tables.empty()) {
    return {ErrorCode::kDisconnected, "schema declares no tables"};
  }
  std::unordered_set<std::string> table_names;
  for (const auto& table : def.tables) {
    if (table.name.empty()) return {ErrorCode::kConfigError, "table with empty name"};
    if (!table_names.insert(table.name).second) {
      return {ErrorCode::kDuplicateName, "duplicate table name '" + table.name + "'"};
    }
    if (table.columns.empty()) {
      return {ErrorCode::kMissingColumn, "table '" + table.name + "' has no columns"};
    }
    std::unordered_set<std::string> column_names;
    for (const auto& column : table.columns) {
      if (column.name.empty()) {
        return {ErrorCode::kConfigError, "column with empty name in '" + table.name + "'"};
      }
      if (!column_names.insert(column.name).second) {
        return {ErrorCode::kDuplicateName,
                "duplicate column '" + column.name + "' in table '" + table.name + "'"};
      }
    }
  }
  auto root_index = table_index(def, def.root);
  if (!root_index) {
    return {ErrorCode::kUnknownColumn, "root table '" + def.root + "' is not declared"};
  }

  std::vector<ResolvedEdge> edges;
  for (const auto& edge : def.edges) {
    const std::string label = edge.parent_table + "." + edge.parent_column + " = " +
                              edge.child_table + "." + edge.child_column;
    auto pt = table_index(def, edge.parent_table);
    auto ct = table_index(def, edge.child_table);
    if (!pt || !ct) return {ErrorCode::kUnknownColumn, "edge '" + label + "' names an unknown table"};
    auto pc = column_index(def.tables[*pt], edge.parent_column);
    auto cc = column_index(def.tables[*ct], edge.child_column);
    if (!pc || !cc) return {ErrorCode::kUnknownColumn, "edge '" + label + "' names an unknown column"};
    const auto& pcol = def.tables[*pt].columns[*pc];
    const auto& ccol = def.tables[*ct].columns[*cc];
    if (pcol.kind != ColumnKind::kJoinKey || ccol.kind != ColumnKind::kJoinKey) {
      return {ErrorCode::kUnknownColumn, "edge '" + label + "' references a non join_key column"};
    }
    if (*pt == *ct) {
      return {ErrorCode::kCycleDetected, "edge '" + label + "' joins a table to itself"};
    }
    if (pcol.value_type != ccol.value_type) {
      return {ErrorCode::kSchemaMismatch, "edge '" + label + "' joins columns of different types"};
    }
    edges.push_back({{*pt, *pc}, {*ct, *cc}});
  }

  UnionFind uf(def.tables.size());
  for (size_t e = 0; e < edges.size(); ++e) {
    if (!uf.unite(edges[e].a.table, edges[e].b.table)) {
      return {ErrorCode::kCycleDetected, "edge '" + def.edges[e].parent_table + "." +
                                             def.edges[e].parent_column + " = " +
                                             def.edges[e].child_table + "." +
                                             def.edges[e].child_column + "' closes a cycle"};
    }
  }
  const uint32_t component = uf.find(0);
  for (uint32_t t = 1; t < def.tables.size(); ++t) {
    if (uf.find(t) != component) {
      return {ErrorCode::kDisconnected, "table '" + def.tables[t].name +
                                            "' is not connected to '" + def.tables[0].name + "'"};
    }
  }
  if (resolved) *resolved = std::move(edges);
  if (root) *root = *root_index;
  return Status::Ok();
}

}  // namespace

Status validate_schema(const SchemaDef& def) { return check_schema(def, nullptr, nullptr); }

JoinSchema JoinSchema::Build(SchemaDef def) {
  std::vector<ResolvedEdge> edges;
  uint32_t root = 0;
  Status status = check_schema(def, &edges, &root);
  if (!status.ok()) fail(status.code, status.message);

  JoinSchema schema;
  schema.def_ = std::move(def);
  schema.root_ = root;
  const size_t n = schema.def_.tables.size();
  schema.parent_link_.assign(n, std::nullopt);
  schema.child_links_.assign(n, {});
  schema.edge_columns_.assign(n, {});

  std::vector<std::vector<size_t>> incident(n);
  for (size_t e = 0; e < edges.size(); ++e) {
    incident[edges[e].a.table].push_back(e);
    incident[edges[e].b.table].push_back(e);
    schema.edge_columns_[edges[e].a.table].push_back(edges[e].a.column);
    schema.edge_columns_[edges[e].b.table].push_back(edges[e].b.column);
  }
  for (auto& cols : schema.edge_columns_) {
    std::sort(cols.begin(), cols.end());
    cols.erase(std::unique(cols.begin(), cols.end()), cols.end());
  }

  std::vector<bool> seen(n, false);
  std::deque<uint32_t> queue{root};
  seen[root] = true;
  while (!queue.empty()) {
    const uint32_t t = queue.front();
    queue.pop_front();
    schema.bfs_order_.push_back(t);
    for (size_t e : incident[t]) {
      const bool t_is_a = edges[e].a.table == t;
      const ColumnRef self = t_is_a ? edges[e].a : edges[e].b;
      const ColumnRef other = t_is_a ? edges[e].b : edges[e].a;
      if (seen[other.table]) continue;
      seen[other.table] = true;
      const auto link = static_cast<uint32_t>(schema.links_.size());
      schema.links_.push_back({t, other.table, self.column, other.column});
      schema.child_links_[t].push_back(link);
      schema.parent_link_[other.table] = link;
      queue.push_back(other.table);
    }
  }
  return schema;
}

std::optional<uint32_t> JoinSchema::find_table(std::string_view name) const {
  return table_index(def_, name);
}

std::optional<ColumnRef> JoinSchema::find_column(std::string_view table,
                                                 std::string_view column) const {
  auto t = find_table(table);
  if (!t) return std::nullopt;
  auto c = column_index(def_.tables[*t], column);
  if (!c) return std::nullopt;
  return ColumnRef{*t, *c};
}

std::optional<ColumnRef> JoinSchema::resolve(std::string_view qualified) const {
  const auto dot = qualified.find('.');
  if (dot == std::string_view::npos) return std::nullopt;
  return find_column(qualified.substr(0, dot), qualified.substr(dot + 1));
}

std::string JoinSchema::qualified_name(ColumnRef ref) const {
  return def_.tables.at(ref.table).name + "." + column(ref).name;
}

std::vector<uint32_t> JoinSchema::neighbors(uint32_t table) const {
  std::vector<uint32_t> out;
  if (auto p = parent_link_.at(table)) out.push_back(links_[*p].parent);
  for (uint32_t l : child_links_.at(table)) out.push_back(links_[l].child);
  return out;
}

// ---------------------------------------------------------------------------
// Config documents

namespace {

using nlohmann::json;

void require_keys(const json& obj, std::initializer_list<std::string_view> allowed,
                  std::string_view where) {
  if (!obj.is_object()) fail(ErrorCode::kConfigError, std::string(where) + " must be an object");
  for (const auto& [key, _] : obj.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      fail(ErrorCode::kConfigError, "unknown key '" + key + "' in " + std::string(where));
    }
  }
}

std::string get_string(const json& obj, const char* key, std::string_view where) {
  auto it = obj.find(key);
  if (it == obj.end() || !it->is_string()) {
    fail(ErrorCode::kConfigError, std::string(where) + " needs string '" + key + "'");
  }
  return it->get<std::string>();
}

std::pair<std::string, std::string> split_qualified(std::string_view text) {
  auto trim = [](std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
  };
  text = trim(text);
  const auto dot = text.find('.');
  if (dot == std::string_view::npos || dot == 0 || dot + 1 == text.size()) {
    fail(ErrorCode::kConfigError, "expected table.column, got '" + std::string(text) + "'");
  }
  return {std::string(text.substr(0, dot)), std::string(text.substr(dot + 1))};
}

}  // namespace

SchemaDef parse_schema_config(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    fail(ErrorCode::kConfigError, std::string("schema config is not valid JSON: ") + e.what());
  }
  require_keys(doc, {"root", "tables", "edges"}, "schema config");
  SchemaDef def;
  def.root = get_string(doc, "root", "schema config");
  if (!doc.contains("tables") || !doc["tables"].is_array()) {
    fail(ErrorCode::kConfigError, "schema config needs a 'tables' list");
  }
  for (const auto& jt : doc["tables"]) {
    require_keys(jt, {"name", "file", "columns"}, "table");
    TableDef table;
    table.name = get_string(jt, "name", "table");
    table.file = jt.contains("file") ? get_string(jt, "file", "table") : table.name + ".csv";
    if (!jt.contains("columns") || !jt["columns"].is_array()) {
      fail(ErrorCode::kConfigError, "table '" + table.name + "' needs a 'columns' list");
    }
    for (const auto& jc : jt["columns"]) {
      require_keys(jc, {"name", "kind", "type", "range_filterable"}, "column");
      ColumnDef column;
      column.name = get_string(jc, "name", "column");
      const std::string kind = jc.contains("kind") ? get_string(jc, "kind", "column") : "content";
      if (kind == "content") {
        column.kind = ColumnKind::kContent;
      } else if (kind == "join_key") {
        column.kind = ColumnKind::kJoinKey;
      } else {
        fail(ErrorCode::kConfigError, "column kind must be content or join_key, got '" + kind + "'");
      }
      const std::string type = get_string(jc, "type", "column");
      if (type == "integer") {
        column.value_type = ValueType::kInteger;
      } else if (type == "string") {
        column.value_type = ValueType::kString;
      } else {
        fail(ErrorCode::kConfigError, "column type must be integer or string, got '" + type + "'");
      }
      if (jc.contains("range_filterable")) {
        if (!jc["range_filterable"].is_boolean()) {
          fail(ErrorCode::kConfigError, "range_filterable must be a boolean");
        }
        column.range_filterable = jc["range_filterable"].get<bool>();
      }
      table.columns.push_back(std::move(column));
    }
    def.tables.push_back(std::move(table));
  }
  if (doc.contains("edges")) {
    if (!doc["edges"].is_array()) fail(ErrorCode::kConfigError, "'edges' must be a list");
    for (const auto& je : doc["edges"]) {
      if (!je.is_string()) fail(ErrorCode::kConfigError, "edges are strings of the form 'a.x = b.y'");
      const std::string text = je.get<std::string>();
      const auto eq = text.find('=');
      if (eq == std::string::npos || text.find('=', eq + 1) != std::string::npos) {
        fail(ErrorCode::kConfigError, "malformed edge '" + text + "'");
      }
      auto [pt, pc] = split_qualified(std::string_view(text).substr(0, eq));
      auto [ct, cc] = split_qualified(std::string_view(text).substr(eq + 1));
      def.edges.push_back({pt, pc, ct, cc});
    }
  }
  return def;
}

JoinSchema load_schema_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::kIoError, "cannot open schema config " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return JoinSchema::Build(parse_schema_config(buffer.str()));
}

std::string schema_to_config(const SchemaDef& def) {
  json doc;
  doc["root"] = def.root;
  doc["tables"] = json::array();
  for (const auto& table : def.tables) {
    json jt;
    jt["name"] = table.name;
    jt["file"] = table.file;
    jt["columns"] = json::array();
    for (const auto& c : table.columns) {
      jt["columns"].push_back({{"name", c.name},
                               {"kind", c.kind == ColumnKind::kJoinKey ? "join_key" : "content"},
                               {"type", c.value_type == ValueType::kInteger ? "integer" : "string"},
                               {"range_filterable", c.range_filterable}});
    }
    doc["tables"].push_back(std::move(jt));
  }
  doc["edges"] = json::array();
  for (const auto& e : def.edges) {
    doc["edges"].push_back(e.parent_table + "." + e.parent_column + " = " + e.child_table + "." +
                           e.child_column);
  }
  return doc.dump(2);
}

// ---------------------------------------------------------------------------
// Queries

std::string_view compare_op_name(CompareOp op) {
  switch (op) {
    case CompareOp::kLt: return "<";
    case CompareOp::kGt: return ">";
    case CompareOp::kLe: return "<=";
    case CompareOp::kGe: return ">=";
    case CompareOp::kEq: return "=";
    case CompareOp::kIn: return "IN";
  }
  return "?";
}

std::optional<CompareOp> parse_compare_op(std::string_view text) {
  if (text == "<") return CompareOp::kLt;
  if (text == ">") return CompareOp::kGt;
  if (text == "<=") return CompareOp::kLe;
  if (text == ">=") return CompareOp::kGe;
  if (text == "=" || text == "==") return CompareOp::kEq;
  if (text == "IN" || text == "in") return CompareOp::kIn;
  return std::nullopt;
}

bool is_connected_subtree(const JoinSchema& schema, const std::vector<uint32_t>& tables) {
  if (tables.empty()) return false;
  std::vector<bool> member(schema.table_count(), false);
  for (uint32_t t : tables) member.at(t) = true;
  // In a tree, a vertex subset is connected iff exactly one member has its
  // parent outside the subset.
  size_t tops = 0;
  for (uint32_t t : tables) {
    auto p = schema.parent_link(t);
    if (!p || !member[schema.links()[*p].parent]) ++tops;
  }
  return tops == 1;
}

std::vector<uint32_t> query_table_indices(const JoinSchema& schema, const QuerySpec& query) {
  std::vector<uint32_t> out;
  for (const auto& name : query.tables) {
    auto t = schema.find_table(name);
    if (!t) fail(ErrorCode::kUnknownColumn, "query names unknown table '" + name + "'");
    out.push_back(*t);
  }
  std::sort(out.begin(), out.end());
  if (std::adjacent_find(out.begin(), out.end()) != out.end()) {
    fail(ErrorCode::kDuplicateName, "query lists a table twice");
  }
  return out;
}

Status validate_query(const JoinSchema& schema, const QuerySpec& query) {
  std::vector<uint32_t> tables;
  try {
    tables = query_table_indices(schema, query);
  } catch (const Error& e) {
    return Status::FromError(e);
  }
  if (!is_connected_subtree(schema, tables)) {
    return {ErrorCode::kQueryNotSubtree, "query tables do not form a connected subtree"};
  }
  for (const auto& pred : query.predicates) {
    auto ref = schema.resolve(pred.column);
    if (!ref) return {ErrorCode::kUnknownColumn, "unknown column '" + pred.column + "'"};
    if (!std::binary_search(tables.begin(), tables.end(), ref->table)) {
      return {ErrorCode::kUnknownColumn,
              "predicate column '" + pred.column + "' belongs to a table outside the query"};
    }
    if (pred.literals.empty()) {
      return {ErrorCode::kBadLiteralType, "predicate on '" + pred.column + "' has no literal"};
    }
    if (pred.op != CompareOp::kIn && pred.literals.size() != 1) {
      return {ErrorCode::kBadLiteralType,
              "predicate on '" + pred.column + "' takes exactly one literal"};
    }
    const ColumnDef& col = schema.column(*ref);
    for (const auto& lit : pred.literals) {
      const bool is_int = std::holds_alternative<int64_t>(lit);
      if (is_int != (col.value_type == ValueType::kInteger)) {
        return {ErrorCode::kBadLiteralType,
                "literal type does not match column '" + pred.column + "'"};
      }
    }
    const bool range = pred.op == CompareOp::kLt || pred.op == CompareOp::kGt ||
                       pred.op == CompareOp::kLe || pred.op == CompareOp::kGe;
    if (range && !col.range_filterable) {
      return {ErrorCode::kUnsupportedOperator,
              "range operator on column '" + pred.column + "' which is not range_filterable"};
    }
  }
  return Status::Ok();
}

std::map<uint32_t, ColumnRef> resolve_fanout_keys(const JoinSchema& schema,
                                                  const QuerySpec& query) {
  const auto tables = query_table_indices(schema, query);
  if (!is_connected_subtree(schema, tables)) {
    fail(ErrorCode::kQueryNotSubtree, "query tables do not form a connected subtree");
  }
  // Multi-source BFS out of the query subtree; the edge by which an omitted
  // table is first reached is the one on its path toward the query.
  const size_t n = schema.table_count();
  std::vector<bool> seen(n, false);
  std::deque<uint32_t> queue;
  for (uint32_t t : tables) {
    seen[t] = true;
    queue.push_back(t);
  }
  std::map<uint32_t, ColumnRef> keys;
  while (!queue.empty()) {
    const uint32_t t = queue.front();
    queue.pop_front();
    auto visit = [&](uint32_t other, uint32_t other_column) {
      if (seen[other]) return;
      seen[other] = true;
      keys[other] = ColumnRef{other, other_column};
      queue.push_back(other);
    };
    if (auto p = schema.parent_link(t)) {
      const auto& link = schema.links()[*p];
      visit(link.parent, link.parent_column);
    }
    for (uint32_t l : schema.child_links(t)) {
      const auto& link = schema.links()[l];
      visit(link.child, link.child_column);
    }
  }
  return keys;
}

std::vector<std::vector<uint32_t>> connected_subtrees(const JoinSchema& schema) {
  const size_t n = schema.table_count();
  std::vector<std::vector<uint32_t>> out;
  if (n <= 20) {
    for (uint64_t mask = 1; mask < (uint64_t{1} << n); ++mask) {
      std::vector<uint32_t> subset;
      for (uint32_t t = 0; t < n; ++t) {
        if (mask >> t & 1) subset.push_back(t);
      }
      if (is_connected_subtree(schema, subset)) out.push_back(std::move(subset));
    }
  } else {
    // Grow subtrees from each top vertex; avoids the 2^n scan.
    std::set<std::vector<uint32_t>> found;
    std::vector<std::vector<uint32_t>> frontier;
    for (uint32_t t = 0; t < n; ++t) frontier.push_back({t});
    while (!frontier.empty()) {
      std::vector<std::vector<uint32_t>> next;
      for (auto& s : frontier) {
        if (!found.insert(s).second) continue;
        for (uint32_t t : s) {
          for (uint32_t nb : schema.neighbors(t)) {
            if (std::binary_search(s.begin(), s.end(), nb)) continue;
            auto grown = s;
            grown.insert(std::upper_bound(grown.begin(), grown.end(), nb), nb);
            next.push_back(std::move(grown));
          }
        }
      }
      frontier = std::move(next);
    }
    out.assign(found.begin(), found.end());
  }
  std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    return a.size() != b.size() ? a.size() < b.size() : a < b;
  });
  return out;
}

}  // namespace arcard
