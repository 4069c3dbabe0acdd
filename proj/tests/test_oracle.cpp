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
#include <cmath>
#include <map>
#include <set>

#include "arcard/oracle.hpp"
#include "support/brute_force.hpp"
#include "support/fixtures.hpp"

namespace arcard {
namespace {

std::vector<std::vector<Token>> rows_of(const SampleBatch& b) {
  std::vector<std::vector<Token>> out;
  for (size_t i = 0; i < b.rows(); ++i) out.emplace_back(b.row(i).begin(), b.row(i).end());
  std::sort(out.begin(), out.end());
  return out;
}

TEST(Materialize, ThreeTableExampleRows) {
  const Dataset ds = testing::three_table_dataset();
  const ModelLayout layout = ModelLayout::Build(ds, {});
  const MaterializedJoin j = materialize(ds, layout);
  ASSERT_EQ(j.size(), 5u);
  // Decoded as printed: A.x, B.x, B.y, C.y, then indicators and fanouts.
  std::vector<std::string> lines;
  for (size_t i = 0; i < j.size(); ++i) {
    std::string line;
    for (uint32_t c = 0; c < layout.logical_count(); ++c) {
      const LogicalColumn& col = layout.columns()[c];
      const Token tok = j.rows.row(i)[c];
      std::string cell;
      if (col.kind == LogicalKind::kContent) {
        const auto v = ds.dictionary(col.ref).decode(tok);
        cell = v ? value_to_string(*v) : "-";
      } else if (col.kind == LogicalKind::kIndicator) {
        cell = std::to_string(tok);
      } else {
        cell = std::to_string(col.fanout_values[tok]);
      }
      line += (c ? " " : "") + cell;
    }
    lines.push_back(line);
  }
  std::sort(lines.begin(), lines.end());
  // Columns: A.x B.x B.y C.y 1A 1B 1C F(A.x) F(B.x) F(B.y) F(C.y)
  const std::vector<std::string> expected = {
      "- - - d 0 0 1 1 1 1 1",
      "1 1 a - 1 1 0 1 1 1 1",
      "2 2 b - 1 1 0 1 2 1 1",
      "2 2 c c 1 1 1 1 2 1 2",
      "2 2 c c 1 1 1 1 2 1 2",
  };
  EXPECT_EQ(lines, expected);
}

TEST(Materialize, SingleTableIsItself) {
  SchemaDef def;
  def.tables = {{"T",
                 {{"k", ColumnKind::kJoinKey, ValueType::kInteger, false},
                  {"v", ColumnKind::kContent, ValueType::kInteger, true}},
                 ""}};
  def.root = "T";
  std::vector<RawRow> raw = {{Value{int64_t{1}}, Value{int64_t{5}}},
                             {Value{int64_t{1}}, Value{int64_t{6}}},
                             {Value{int64_t{2}}, std::nullopt}};
  const Dataset ds = Dataset::FromStores(JoinSchema::Build(def), {make_table(def.tables[0], raw)});
  const ModelLayout layout = ModelLayout::Build(ds, {});
  const MaterializedJoin j = materialize(ds, layout);
  ASSERT_EQ(j.size(), 3u);
  EXPECT_EQ(layout.logical_count(), 3u);  // k, v, indicator; no edges, no fanouts
  for (size_t i = 0; i < 3; ++i) EXPECT_EQ(j.rows.row(i)[2], 1u);
}

TEST(Materialize, CapExceededIsTooLarge) {
  const Dataset ds = testing::three_table_dataset();
  const ModelLayout layout = ModelLayout::Build(ds, {});
  try {
    materialize(ds, layout, 4);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kTooLarge);
  }
}

TEST(Materialize, EqualsEnumerationOnRandomInstances) {
  for (uint64_t seed = 0; seed < 60; ++seed) {
    const Dataset ds = testing::random_instance(seed);
    const ModelLayout layout = ModelLayout::Build(ds, {});
    const MaterializedJoin j = materialize(ds, layout);
    EXPECT_EQ(Weight{j.size()}, ds.full_join_size());
    auto expected = testing::brute_layout_rows(ds, layout);
    std::sort(expected.begin(), expected.end());
    EXPECT_EQ(rows_of(j.rows), expected) << "seed " << seed;
    // Indicator columns agree with the NULL pattern of the source rows.
    for (size_t i = 0; i < j.size(); ++i) {
      for (uint32_t t = 0; t < ds.schema().table_count(); ++t) {
        EXPECT_EQ(j.rows.row(i)[layout.indicator_column(t)], j.source(i)[t] >= 0 ? 1u : 0u);
      }
    }
  }
}

TEST(TrueCardinality, ThreeTableQueries) {
  const Dataset ds = testing::three_table_dataset();
  EXPECT_EQ(true_cardinality(ds, testing::three_table_q1()), Weight{2});
  EXPECT_EQ(true_cardinality(ds, testing::three_table_q2()), Weight{1});
  EXPECT_EQ(true_cardinality(ds, QuerySpec{{"A", "B", "C"}, {}}), Weight{2});
  EXPECT_EQ(true_cardinality(ds, QuerySpec{{"B", "C"}, {}}), Weight{2});
}

TEST(TrueCardinality, MatchesEnumerationOnRandomQueries) {
  for (uint64_t seed = 0; seed < 60; ++seed) {
    const Dataset ds = testing::random_instance(seed);
    Rng rng(derive_seed(seed, {99}));
    for (int i = 0; i < 25; ++i) {
      const QuerySpec q = testing::random_query(ds, rng);
      EXPECT_EQ(true_cardinality(ds, q), Weight{testing::brute_cardinality(ds, q)}) << "seed " << seed;
    }
  }
}

TEST(TrueCardinality, RejectsInvalidQuery) {
  const Dataset ds = testing::three_table_dataset();
  EXPECT_THROW(true_cardinality(ds, QuerySpec{{"A", "C"}, {}}), Error);
}

TEST(EmpiricalBackend, MarginalOfAx) {
  const Dataset ds = testing::three_table_dataset();
  const ModelLayout layout = ModelLayout::Build(ds, {});
  const EmpiricalBackend backend(layout, materialize(ds, layout));
  PrefixMatrix prefix = PrefixMatrix::Constant(1, static_cast<Eigen::Index>(layout.sub_count()), kWildcard);
  Eigen::MatrixXd p;
  backend.conditional(0, prefix, p);
  const Token two = *ds.dictionary({0, 0}).find(Value{int64_t{2}});
  EXPECT_DOUBLE_EQ(p(0, two), 3.0 / 5.0);
  EXPECT_DOUBLE_EQ(p.row(0).sum(), 1.0);
}

TEST(EmpiricalBackend, FullPrefixIsOneHot) {
  const Dataset ds = testing::random_instance(3);
  const ModelLayout layout = ModelLayout::Build(ds, {});
  const MaterializedJoin j = materialize(ds, layout);
  const EmpiricalBackend backend(layout, j);
  const size_t w = layout.sub_count();
  PrefixMatrix rows(static_cast<Eigen::Index>(j.size()), static_cast<Eigen::Index>(w));
  for (size_t r = 0; r < j.size(); ++r) {
    layout.factorize_row(j.rows.row(r), std::span<int32_t>(rows.data() + r * w, w));
  }
  // The last subcolumn is a fanout digit, fixed by its key column earlier in
  // the row, so conditioning on the whole prefix leaves a single value.
  Eigen::MatrixXd p;
  const auto last = static_cast<uint32_t>(w - 1);
  backend.conditional(last, rows, p);
  for (Eigen::Index r = 0; r < rows.rows(); ++r) {
    EXPECT_NEAR(p.row(r).sum(), 1.0, 1e-12);
    EXPECT_GT(p(r, rows(r, last)), 0.0);
    EXPECT_EQ((p.row(r).array() > 0).count(), 1);
  }
}

TEST(EmpiricalBackend, LikelihoodEqualsEmpiricalFrequency) {
  for (uint64_t seed = 0; seed < 10; ++seed) {
    const Dataset ds = testing::random_instance(seed);
    const ModelLayout layout = ModelLayout::Build(ds, {});
    const MaterializedJoin j = materialize(ds, layout);
    const EmpiricalBackend backend(layout, j);
    const size_t w = layout.sub_count();
    PrefixMatrix rows(static_cast<Eigen::Index>(j.size()), static_cast<Eigen::Index>(w));
    for (size_t r = 0; r < j.size(); ++r) {
      layout.factorize_row(j.rows.row(r), std::span<int32_t>(rows.data() + r * w, w));
    }
    const auto ll = backend.log_likelihood(rows);
    std::map<std::vector<Token>, double> freq;
    for (size_t r = 0; r < j.size(); ++r) {
      freq[{j.rows.row(r).begin(), j.rows.row(r).end()}] += 1.0 / static_cast<double>(j.size());
    }
    // KL(empirical || backend) = 0.
    double kl = 0.0;
    std::set<std::vector<Token>> seen;
    for (size_t r = 0; r < j.size(); ++r) {
      std::vector<Token> key(j.rows.row(r).begin(), j.rows.row(r).end());
      if (!seen.insert(key).second) continue;
      kl += freq[key] * (std::log(freq[key]) - ll[r]);
    }
    EXPECT_NEAR(kl, 0.0, 1e-9) << "seed " << seed;
  }
}

}  // namespace
}  // namespace arcard
