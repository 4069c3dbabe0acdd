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

#include "support/fixtures.hpp"

#include <string>

namespace arcard::testing {

SchemaDef three_table_schema() {
  SchemaDef def;
  def.tables = {
      {"A", {{"x", ColumnKind::kJoinKey, ValueType::kInteger, true}}, "A.csv"},
      {"B",
       {{"x", ColumnKind::kJoinKey, ValueType::kInteger, true},
        {"y", ColumnKind::kJoinKey, ValueType::kString, false}},
       "B.csv"},
      {"C", {{"y", ColumnKind::kJoinKey, ValueType::kString, false}}, "C.csv"},
  };
  def.edges = {{"A", "x", "B", "x"}, {"B", "y", "C", "y"}};
  def.root = "A";
  return def;
}

Dataset three_table_dataset() {
  const SchemaDef def = three_table_schema();
  auto i = [](int64_t v) { return std::optional<Value>(Value{v}); };
  auto s = [](const char* v) { return std::optional<Value>(Value{std::string(v)}); };
  std::vector<TableStore> stores;
  stores.push_back(make_table(def.tables[0], {{i(1)}, {i(2)}}));
  stores.push_back(make_table(def.tables[1], {{i(1), s("a")}, {i(2), s("b")}, {i(2), s("c")}}));
  stores.push_back(make_table(def.tables[2], {{s("c")}, {s("c")}, {s("d")}}));
  return Dataset::FromStores(JoinSchema::Build(def), std::move(stores));
}

QuerySpec three_table_q1() {
  return QuerySpec{{"A", "B", "C"}, {Predicate{"A.x", CompareOp::kEq, {Literal{int64_t{2}}}}}};
}

QuerySpec three_table_q2() {
  return QuerySpec{{"A"}, {Predicate{"A.x", CompareOp::kEq, {Literal{int64_t{2}}}}}};
}

namespace {

Dataset try_random_instance(uint64_t seed, const RandomInstanceOptions& o) {
  Rng rng(seed);
  const uint32_t n = o.min_tables + static_cast<uint32_t>(rng.below(o.max_tables - o.min_tables + 1ull));
  SchemaDef def;
  def.tables.resize(n);
  for (uint32_t t = 0; t < n; ++t) {
    def.tables[t].name = "r" + std::to_string(t);
    def.tables[t].file = def.tables[t].name + ".csv";
  }
  std::vector<uint32_t> parent(n, 0);
  std::vector<ValueType> edge_type(n, ValueType::kInteger);
  std::vector<uint64_t> edge_domain(n, 2);
  // Per edge (indexed by child), the key column on each side.
  std::vector<uint32_t> parent_col(n, 0), child_col(n, 0);
  auto key_column = [&](uint32_t t, ValueType type) -> uint32_t {
    auto& cols = def.tables[t].columns;
    if (rng.uniform() < 0.3) {
      for (uint32_t c = 0; c < cols.size(); ++c) {
        if (cols[c].kind == ColumnKind::kJoinKey && cols[c].value_type == type) return c;
      }
    }
    cols.push_back(ColumnDef{"k" + std::to_string(cols.size()), ColumnKind::kJoinKey, type,
                             type == ValueType::kInteger && rng.uniform() < 0.5});
    return static_cast<uint32_t>(cols.size() - 1);
  };
  for (uint32_t t = 1; t < n; ++t) {
    parent[t] = static_cast<uint32_t>(rng.below(t));
    edge_type[t] = rng.uniform() < 0.8 ? ValueType::kInteger : ValueType::kString;
    edge_domain[t] = 2 + rng.below(std::max<uint64_t>(1, o.max_rows / 3));
    parent_col[t] = key_column(parent[t], edge_type[t]);
    child_col[t] = key_column(t, edge_type[t]);
    def.edges.push_back(JoinEdge{def.tables[parent[t]].name, def.tables[parent[t]].columns[parent_col[t]].name,
                                 def.tables[t].name, def.tables[t].columns[child_col[t]].name});
  }
  for (uint32_t t = 0; t < n; ++t) {
    const uint32_t contents = 1 + static_cast<uint32_t>(rng.below(2));
    for (uint32_t c = 0; c < contents; ++c) {
      const bool str = rng.uniform() < 0.4;
      def.tables[t].columns.push_back(ColumnDef{"v" + std::to_string(c), ColumnKind::kContent,
                                                str ? ValueType::kString : ValueType::kInteger,
                                                !str || rng.uniform() < 0.5});
    }
  }
  def.root = def.tables[rng.below(n)].name;

  // Domain of every key column: the largest domain among its edges.
  std::vector<std::vector<uint64_t>> key_domain(n);
  for (uint32_t t = 0; t < n; ++t) key_domain[t].assign(def.tables[t].columns.size(), 0);
  for (uint32_t t = 1; t < n; ++t) {
    auto& pd = key_domain[parent[t]][parent_col[t]];
    auto& cd = key_domain[t][child_col[t]];
    pd = std::max(pd, edge_domain[t]);
    cd = std::max(cd, edge_domain[t]);
  }

  std::vector<TableStore> stores;
  for (uint32_t t = 0; t < n; ++t) {
    const TableDef& table = def.tables[t];
    const uint64_t rows = 1 + rng.below(o.max_rows);
    std::vector<RawRow> raw;
    for (uint64_t r = 0; r < rows; ++r) {
      RawRow row(table.columns.size());
      for (size_t c = 0; c < table.columns.size(); ++c) {
        if (rng.uniform() < o.null_rate) continue;
        const ColumnDef& col = table.columns[c];
        const int64_t v = col.kind == ColumnKind::kJoinKey
                              ? 1 + static_cast<int64_t>(rng.below(key_domain[t][c] + 1))
                              : static_cast<int64_t>(rng.below(6));
        if (col.value_type == ValueType::kInteger) {
          row[c] = Value{v};
        } else {
          row[c] = Value{std::string(col.kind == ColumnKind::kJoinKey ? "s" : "c") + std::to_string(v)};
        }
      }
      raw.push_back(std::move(row));
    }
    stores.push_back(make_table(table, raw));
  }
  return Dataset::FromStores(JoinSchema::Build(def), std::move(stores));
}

}  // namespace

Dataset random_instance(uint64_t seed, const RandomInstanceOptions& options) {
  for (uint64_t attempt = 0;; ++attempt) {
    Dataset ds = try_random_instance(derive_seed(seed, {attempt}), options);
    if (ds.full_join_size() <= 20000) return ds;
  }
}

QuerySpec random_query(const Dataset& dataset, Rng& rng) {
  return random_query(dataset, rng, rng.below(connected_subtrees(dataset.schema()).size()));
}

QuerySpec random_query(const Dataset& dataset, Rng& rng, size_t graph_index) {
  const JoinSchema& schema = dataset.schema();
  const auto graphs = connected_subtrees(schema);
  const auto& graph = graphs[graph_index % graphs.size()];
  QuerySpec q;
  for (uint32_t t : graph) q.tables.push_back(schema.table(t).name);
  const uint64_t preds = rng.below(4);
  for (uint64_t i = 0; i < preds; ++i) {
    const uint32_t t = graph[rng.below(graph.size())];
    const auto c = static_cast<uint32_t>(rng.below(schema.table(t).columns.size()));
    const ColumnDef& col = schema.table(t).columns[c];
    const Dictionary& dict = dataset.dictionary({t, c});
    Predicate p;
    p.column = schema.qualified_name({t, c});
    p.op = col.range_filterable ? static_cast<CompareOp>(rng.below(6))
                                : (rng.below(2) ? CompareOp::kEq : CompareOp::kIn);
    const uint64_t count = p.op == CompareOp::kIn ? 1 + rng.below(3) : 1;
    for (uint64_t k = 0; k < count; ++k) {
      if (dict.value_count() > 0 && rng.uniform() < 0.7) {
        const auto token = static_cast<Token>(1 + rng.below(dict.value_count()));
        p.literals.push_back(*dict.decode(token));
      } else if (col.value_type == ValueType::kInteger) {
        p.literals.push_back(Literal{static_cast<int64_t>(rng.below(12)) - 2});
      } else {
        p.literals.push_back(Literal{std::string(rng.uniform() < 0.5 ? "c9" : "s0")});
      }
    }
    q.predicates.push_back(std::move(p));
  }
  return q;
}

}  // namespace arcard::testing
