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

#include <gtest/gtest.h>

#include <algorithm>

#include "arcard/schema.hpp"
#include "support/fixtures.hpp"

namespace arcard {
namespace {

using testing::three_table_schema;

SchemaDef with_edges(std::vector<JoinEdge> edges) {
  SchemaDef def = three_table_schema();
  def.edges = std::move(edges);
  return def;
}

TEST(ValidateSchema, ThreeTableChainIsOk) {
  EXPECT_TRUE(validate_schema(three_table_schema()).ok());
}

TEST(ValidateSchema, SingleTableIsOk) {
  SchemaDef def;
  def.tables = {{"T", {{"a", ColumnKind::kContent, ValueType::kInteger, true}}, ""}};
  def.root = "T";
  EXPECT_TRUE(validate_schema(def).ok());
}

TEST(ValidateSchema, TriangleIsCycle) {
  SchemaDef def = three_table_schema();
  def.tables[0].columns.push_back({"y", ColumnKind::kJoinKey, ValueType::kString, false});
  def.edges.push_back({"C", "y", "A", "y"});
  EXPECT_EQ(validate_schema(def).code, ErrorCode::kCycleDetected);
}

TEST(ValidateSchema, MissingEdgeIsDisconnected) {
  EXPECT_EQ(validate_schema(with_edges({{"A", "x", "B", "x"}})).code, ErrorCode::kDisconnected);
}

TEST(ValidateSchema, UnknownEdgeColumn) {
  EXPECT_EQ(validate_schema(with_edges({{"A", "x", "B", "x"}, {"B", "zz", "C", "y"}})).code,
            ErrorCode::kUnknownColumn);
}

TEST(ValidateSchema, EdgeOnContentColumnRejected) {
  SchemaDef def = three_table_schema();
  def.tables[2].columns[0].kind = ColumnKind::kContent;
  EXPECT_FALSE(validate_schema(def).ok());
}

TEST(ValidateSchema, DuplicateNames) {
  SchemaDef def = three_table_schema();
  def.tables[2].name = "B";
  EXPECT_EQ(validate_schema(def).code, ErrorCode::kDuplicateName);
  def = three_table_schema();
  def.tables[1].columns[1].name = "x";
  EXPECT_EQ(validate_schema(def).code, ErrorCode::kDuplicateName);
}

TEST(ValidateSchema, InvariantUnderReordering) {
  for (uint64_t seed = 0; seed < 30; ++seed) {
    SchemaDef def = testing::random_instance(seed).schema().def();
    Rng rng(seed);
    for (size_t i = def.tables.size(); i > 1; --i) std::swap(def.tables[i - 1], def.tables[rng.below(i)]);
    for (size_t i = def.edges.size(); i > 1; --i) std::swap(def.edges[i - 1], def.edges[rng.below(i)]);
    EXPECT_TRUE(validate_schema(def).ok()) << "seed " << seed;
  }
}

TEST(SchemaConfig, RoundTrip) {
  const SchemaDef def = three_table_schema();
  const SchemaDef back = parse_schema_config(schema_to_config(def));
  EXPECT_EQ(schema_to_config(back), schema_to_config(def));
  EXPECT_EQ(back.root, "A");
  ASSERT_EQ(back.edges.size(), 2u);
}

TEST(SchemaConfig, UnknownKeyIsError) {
  std::string text = schema_to_config(three_table_schema());
  text.insert(text.find('{') + 1, "\"bogus\": 1,");
  EXPECT_THROW(parse_schema_config(text), Error);
}

TEST(ResolveFanoutKeys, OnlyA) {
  const JoinSchema s = JoinSchema::Build(three_table_schema());
  const auto keys = resolve_fanout_keys(s, QuerySpec{{"A"}, {}});
  ASSERT_EQ(keys.size(), 2u);
  EXPECT_EQ(s.qualified_name(keys.at(1)), "B.x");
  EXPECT_EQ(s.qualified_name(keys.at(2)), "C.y");
}

TEST(ResolveFanoutKeys, AllTablesIsEmpty) {
  const JoinSchema s = JoinSchema::Build(three_table_schema());
  EXPECT_TRUE(resolve_fanout_keys(s, QuerySpec{{"A", "B", "C"}, {}}).empty());
}

TEST(ResolveFanoutKeys, BAndC) {
  const JoinSchema s = JoinSchema::Build(three_table_schema());
  const auto keys = resolve_fanout_keys(s, QuerySpec{{"B", "C"}, {}});
  ASSERT_EQ(keys.size(), 1u);
  EXPECT_EQ(s.qualified_name(keys.at(0)), "A.x");
}

TEST(ResolveFanoutKeys, OneKeyPerOmittedTableOnRandomTrees) {
  for (uint64_t seed = 0; seed < 40; ++seed) {
    const Dataset ds = testing::random_instance(seed);
    const JoinSchema& s = ds.schema();
    for (const auto& graph : connected_subtrees(s)) {
      QuerySpec q;
      for (uint32_t t : graph) q.tables.push_back(s.table(t).name);
      const auto keys = resolve_fanout_keys(s, q);
      EXPECT_EQ(keys.size(), s.table_count() - graph.size());
      for (const auto& [table, key] : keys) {
        EXPECT_EQ(key.table, table);
        EXPECT_EQ(std::count(graph.begin(), graph.end(), table), 0);
        // The key sits on the edge toward the query: its neighbor across
        // that edge is closer to (or inside) the query.
        EXPECT_EQ(s.column(key).kind, ColumnKind::kJoinKey);
      }
    }
  }
}

TEST(ValidateQuery, SkippingMiddleTableIsNotSubtree) {
  const JoinSchema s = JoinSchema::Build(three_table_schema());
  EXPECT_EQ(validate_query(s, QuerySpec{{"A", "C"}, {}}).code, ErrorCode::kQueryNotSubtree);
}

TEST(ValidateQuery, SingleTableWithPredicate) {
  const JoinSchema s = JoinSchema::Build(three_table_schema());
  EXPECT_TRUE(validate_query(s, testing::three_table_q2()).ok());
}

TEST(ValidateQuery, PredicateOnUnselectedTable) {
  const JoinSchema s = JoinSchema::Build(three_table_schema());
  QuerySpec q{{"A"}, {Predicate{"B.x", CompareOp::kEq, {Literal{int64_t{1}}}}}};
  EXPECT_EQ(validate_query(s, q).code, ErrorCode::kUnknownColumn);
}

TEST(ValidateQuery, LiteralTypeMismatch) {
  const JoinSchema s = JoinSchema::Build(three_table_schema());
  QuerySpec q{{"A"}, {Predicate{"A.x", CompareOp::kEq, {Literal{std::string("2")}}}}};
  EXPECT_EQ(validate_query(s, q).code, ErrorCode::kBadLiteralType);
}

TEST(ConnectedSubtrees, ChainOfThreeHasSix) {
  const JoinSchema s = JoinSchema::Build(three_table_schema());
  EXPECT_EQ(connected_subtrees(s).size(), 6u);
}

TEST(CompareOps, NamesRoundTrip) {
  for (int i = 0; i < 6; ++i) {
    const auto op = static_cast<CompareOp>(i);
    EXPECT_EQ(parse_compare_op(compare_op_name(op)), op);
  }
  EXPECT_FALSE(parse_compare_op("LIKE").has_value());
}

}  // namespace
}  // namespace arcard
