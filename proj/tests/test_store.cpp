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

#include <filesystem>
#include <fstream>

#include "arcard/dataset.hpp"
#include "arcard/store.hpp"
#include "support/fixtures.hpp"

namespace arcard {
namespace {

TableDef people() {
  return {"P",
          {{"id", ColumnKind::kJoinKey, ValueType::kInteger, false},
           {"name", ColumnKind::kContent, ValueType::kString, false},
           {"age", ColumnKind::kContent, ValueType::kInteger, true}},
          "P.csv"};
}

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::kOk;
}

TEST(Csv, ParsesNullsQuotesAndReorderedHeader) {
  const TableStore s = parse_table_csv(
      "age,name,id,extra\n"
      "30,\"Smith, J\",1,x\n"
      ",\"\",2,y\r\n"
      "41,,3,z\n"
      "\n",
      people());
  ASSERT_EQ(s.row_count(), 3u);
  const Dictionary& names = s.dictionaries[1];
  EXPECT_EQ(names.decode(s.columns[1][0]), Value{std::string("Smith, J")});
  // A quoted empty field is the empty string; a bare empty field is NULL.
  EXPECT_EQ(names.decode(s.columns[1][1]), Value{std::string()});
  EXPECT_EQ(s.columns[1][2], kNullToken);
  EXPECT_EQ(s.columns[2][1], kNullToken);
  EXPECT_EQ(s.dictionaries[2].decode(s.columns[2][2]), Value{int64_t{41}});
}

TEST(Csv, Errors) {
  EXPECT_EQ(code_of([] { parse_table_csv("id,name\n1,a\n", people()); }), ErrorCode::kMissingColumn);
  EXPECT_EQ(code_of([] { parse_table_csv("id,name,age\n1,a,old\n", people()); }),
            ErrorCode::kTypeParseError);
  EXPECT_EQ(code_of([] { parse_table_csv("id,name,age\n1,a\n", people()); }), ErrorCode::kTypeParseError);
  EXPECT_EQ(code_of([] { parse_table_csv("id,name,age\n1,\"a,3\n", people()); }),
            ErrorCode::kTypeParseError);
  EXPECT_EQ(code_of([] { load_table("/nonexistent/P.csv", people()); }), ErrorCode::kIoError);
}

TEST(Dictionary, SortedTokensAndRankQueries) {
  const Dictionary d = Dictionary::FromValues(
      ValueType::kInteger, {Value{int64_t{5}}, Value{int64_t{-2}}, Value{int64_t{5}}, Value{int64_t{9}}});
  EXPECT_EQ(d.value_count(), 3u);
  EXPECT_EQ(d.domain(), 4u);
  EXPECT_EQ(d.find(Value{int64_t{-2}}), Token{1});
  EXPECT_EQ(d.find(Value{int64_t{9}}), Token{3});
  EXPECT_FALSE(d.find(Value{int64_t{6}}).has_value());
  EXPECT_FALSE(d.decode(kNullToken).has_value());
  EXPECT_EQ(d.count_less(Value{int64_t{5}}), 1u);
  EXPECT_EQ(d.count_less_equal(Value{int64_t{5}}), 2u);
  EXPECT_EQ(d.count_less(Value{int64_t{100}}), 3u);
  EXPECT_EQ(code_of([&] { d.decode(4); }), ErrorCode::kTokenOutOfRange);
}

TEST(Dictionary, TokensPreserveValueOrder) {
  Rng rng(7);
  std::vector<Value> values;
  for (int i = 0; i < 200; ++i) values.push_back(Value{"s" + std::to_string(rng.below(60))});
  const Dictionary d = Dictionary::FromValues(ValueType::kString, values);
  for (Token t = 2; t < d.domain(); ++t) EXPECT_LT(*d.decode(t - 1), *d.decode(t));
  for (const auto& v : values) EXPECT_EQ(*d.decode(*d.find(v)), v);
}

TEST(KeyIndex, PostingsAndFanouts) {
  const Dataset ds = testing::three_table_dataset();
  const TableStore& c = ds.store(2);
  const KeyIndex idx = KeyIndex::Build(c, 0);
  const Token tc = *ds.dictionary({2, 0}).find(Value{std::string("c")});
  const Token td = *ds.dictionary({2, 0}).find(Value{std::string("d")});
  const Token ta = *ds.dictionary({2, 0}).find(Value{std::string("a")});
  EXPECT_EQ(idx.fanout(tc), 2u);
  EXPECT_EQ(idx.fanout(td), 1u);
  EXPECT_EQ(idx.fanout(ta), 0u);
  EXPECT_EQ(idx.fanout(kNullToken), 1u);
  EXPECT_EQ(idx.postings(tc).size(), 2u);
  EXPECT_EQ(idx.indexed_rows(), 3u);
}

TEST(Unify, JoinedColumnsShareTokens) {
  const Dataset ds = testing::three_table_dataset();
  // B.y holds a, b, c and C.y holds c, d: one shared dictionary.
  EXPECT_EQ(ds.dictionary({1, 1}), ds.dictionary({2, 0}));
  EXPECT_EQ(ds.dictionary({1, 1}).value_count(), 4u);
  EXPECT_EQ(ds.dictionary({0, 0}), ds.dictionary({1, 0}));
}

TEST(Dataset, IngestFromCsvFiles) {
  const auto dir = std::filesystem::temp_directory_path() / "arcard_ingest_test";
  std::filesystem::create_directories(dir);
  std::ofstream(dir / "A.csv") << "x\n1\n2\n";
  std::ofstream(dir / "B.csv") << "x,y\n1,a\n2,b\n2,c\n";
  std::ofstream(dir / "C.csv") << "y\nc\nc\nd\n";
  const Dataset ds = Dataset::Ingest(JoinSchema::Build(testing::three_table_schema()), dir);
  EXPECT_EQ(ds.full_join_size(), Weight{5});
  EXPECT_EQ(ds.dictionary_digest(), testing::three_table_dataset().dictionary_digest());
  std::filesystem::remove_all(dir);
}

TEST(Dataset, SnapshotRoundTrip) {
  const auto path = std::filesystem::temp_directory_path() / "arcard_snapshot_test.bin";
  for (uint64_t seed = 0; seed < 10; ++seed) {
    const Dataset ds = testing::random_instance(seed);
    ds.SaveSnapshot(path);
    const Dataset back = Dataset::LoadSnapshot(path);
    EXPECT_EQ(back.full_join_size(), ds.full_join_size());
    EXPECT_EQ(back.dictionary_digest(), ds.dictionary_digest());
    for (uint32_t t = 0; t < ds.schema().table_count(); ++t) {
      EXPECT_EQ(back.store(t).columns, ds.store(t).columns);
      EXPECT_EQ(back.counts().table(t).weights, ds.counts().table(t).weights);
    }
  }
  std::filesystem::remove(path);
}

TEST(Dataset, CorruptSnapshotRejected) {
  const auto path = std::filesystem::temp_directory_path() / "arcard_snapshot_bad.bin";
  testing::three_table_dataset().SaveSnapshot(path);
  std::string bytes;
  {
    std::ifstream in(path, std::ios::binary);
    bytes.assign(std::istreambuf_iterator<char>(in), {});
  }
  for (size_t cut : {size_t{4}, bytes.size() / 2, bytes.size() - 1}) {
    std::ofstream(path, std::ios::binary) << bytes.substr(0, cut);
    const ErrorCode code = code_of([&] { Dataset::LoadSnapshot(path); });
    EXPECT_TRUE(code == ErrorCode::kCorruptCheckpoint || code == ErrorCode::kVersionMismatch)
        << "cut " << cut;
  }
  std::filesystem::remove(path);
}

TEST(Dataset, RestrictRootDropsOrphanedChildren) {
  const Dataset ds = testing::three_table_dataset();
  // Keep only A.x = 1: B rows with x = 2 pointed only at dropped rows.
  const Dataset part = ds.RestrictRoot({true, false});
  EXPECT_EQ(part.store(0).row_count(), 1u);
  EXPECT_EQ(part.store(1).row_count(), 1u);
  // C rows c were reachable only through the dropped B row (2, c); d never
  // joined anything and stays.
  EXPECT_EQ(part.store(2).row_count(), 1u);
  EXPECT_EQ(part.dictionary_digest(), ds.dictionary_digest());
  EXPECT_EQ(ds.RestrictRoot({true, true}).full_join_size(), ds.full_join_size());
}

}  // namespace
}  // namespace arcard
