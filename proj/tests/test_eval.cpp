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
#include <array>
#include <cmath>
#include <filesystem>
#include <functional>

#include "arcard/eval.hpp"
#include "arcard/oracle.hpp"
#include "arcard/query_io.hpp"
#include "support/brute_force.hpp"
#include "support/fixtures.hpp"

namespace arcard {
namespace {

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::kOk;
}

TEST(QError, ExamplesAndSymmetry) {
  EXPECT_DOUBLE_EQ(q_error(10, 10), 1.0);
  EXPECT_DOUBLE_EQ(q_error(20, 10), 2.0);
  EXPECT_DOUBLE_EQ(q_error(5, 10), 2.0);
  EXPECT_DOUBLE_EQ(q_error(0, 4), 4.0);
  EXPECT_DOUBLE_EQ(q_error(0.2, 0), 1.0);
  Rng rng(1);
  for (int i = 0; i < 100; ++i) {
    const double a = 1 + 1000 * rng.uniform(), b = 1 + 1000 * rng.uniform();
    EXPECT_DOUBLE_EQ(q_error(a, b), q_error(b, a));
    EXPECT_GE(q_error(a, b), 1.0);
  }
}

TEST(Quantile, InterpolatesAndSummaryIsMonotone) {
  EXPECT_DOUBLE_EQ(quantile({1, 2, 3, 4}, 0.5), 2.5);
  EXPECT_DOUBLE_EQ(quantile({7}, 0.95), 7.0);
  EXPECT_DOUBLE_EQ(quantile({3, 1, 2}, 1.0), 3.0);
  EXPECT_DOUBLE_EQ(quantile({3, 1, 2}, 0.0), 1.0);
  Rng rng(4);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> v(1 + rng.below(60));
    for (auto& x : v) x = 1 + std::exp(4 * rng.uniform());
    const QuantileSummary s = summarize(v);
    EXPECT_EQ(s.count, v.size());
    EXPECT_LE(s.p50, s.p95);
    EXPECT_LE(s.p95, s.p99);
    EXPECT_LE(s.p99, s.max);
    EXPECT_DOUBLE_EQ(s.max, *std::max_element(v.begin(), v.end()));
  }
  EXPECT_EQ(summarize({}).count, 0u);
}

TEST(Workload, RoundRobinOverChosenGraphs) {
  const Dataset ds = testing::three_table_dataset();
  WorkloadSpec spec;
  spec.query_count = 100;
  spec.join_graphs = {{0}, {0, 1}, {1, 2}, {0, 1, 2}};
  spec.seed = 3;
  const auto w = generate_workload(ds, spec);
  ASSERT_EQ(w.size(), 100u);
  std::array<int, 4> per{};
  for (const auto& q : w) {
    ++per[q.graph];
    EXPECT_EQ(q.query.tables.size(), spec.join_graphs[q.graph].size());
    EXPECT_GE(q.truth, Weight{1});
    EXPECT_EQ(q.truth, Weight{testing::brute_cardinality(ds, q.query)});
  }
  EXPECT_EQ(per, (std::array<int, 4>{25, 25, 25, 25}));
}

TEST(Workload, QueriesAreValidAndReproducible) {
  for (uint64_t seed = 0; seed < 15; ++seed) {
    const Dataset ds = testing::random_instance(seed);
    WorkloadSpec spec;
    spec.query_count = 20;
    spec.min_filters = 1;
    spec.max_filters = 3;
    spec.seed = seed;
    std::vector<WorkloadQuery> w;
    try {
      w = generate_workload(ds, spec);
    } catch (const Error& e) {
      // Some random instances have a subtree whose inner join is empty.
      EXPECT_EQ(e.code(), ErrorCode::kEmptyJoinGraph);
      continue;
    }
    EXPECT_EQ(workload_to_jsonl(w), workload_to_jsonl(generate_workload(ds, spec)));
    const JoinSchema& s = ds.schema();
    for (const auto& q : w) {
      EXPECT_TRUE(validate_query(s, q.query).ok());
      EXPECT_LE(q.query.predicates.size(), 3u);
      EXPECT_GE(q.truth, Weight{1});
      EXPECT_EQ(q.truth, Weight{testing::brute_cardinality(ds, q.query)});
      for (const auto& p : q.query.predicates) {
        const ColumnRef ref = *s.resolve(p.column);
        EXPECT_EQ(s.column(ref).kind, ColumnKind::kContent);
        if (!s.column(ref).range_filterable) EXPECT_EQ(p.op, CompareOp::kEq);
      }
    }
  }
}

TEST(Workload, EmptyGraphReported) {
  SchemaDef def = testing::three_table_schema();
  std::vector<TableStore> stores = {
      make_table(def.tables[0], {{Value{int64_t{1}}}}),
      make_table(def.tables[1], {{Value{int64_t{2}}, Value{std::string("a")}}}),
      make_table(def.tables[2], {{Value{std::string("a")}}}),
  };
  const Dataset ds = Dataset::FromStores(JoinSchema::Build(def), std::move(stores));
  WorkloadSpec spec;
  spec.join_graphs = {{0, 1}};
  spec.max_attempts = 1000;
  EXPECT_EQ(code_of([&] { generate_workload(ds, spec); }), ErrorCode::kEmptyJoinGraph);
}

TEST(Evaluate, ExactBackendGivesUnitQErrors) {
  const Dataset ds = synth_dataset({SynthShape::kChain, 3, 150, 0.8, 1.0, 0.05, 0.05, 8, 2}).to_dataset();
  const ModelLayout layout = ModelLayout::Build(ds, {});
  const EmpiricalBackend backend(layout, materialize(ds, layout));
  WorkloadSpec spec;
  spec.query_count = 24;
  spec.seed = 1;
  const auto w = generate_workload(ds, spec);
  EstimateOptions o;
  o.exhaustive = true;
  const QErrorReport r = evaluate(ds, backend, w, o);
  EXPECT_EQ(r.failures, 0u);
  EXPECT_EQ(r.summary.count, 24u);
  EXPECT_LT(r.summary.max, 1.0 + 1e-9);
  EXPECT_EQ(report_digest(r), report_digest(evaluate(ds, backend, w, o)));
  const std::string lines = report_to_jsonl(r);
  EXPECT_EQ(std::count(lines.begin(), lines.end(), '\n'), 25);
}

TEST(Synth, ReproducibleAndShaped) {
  const SynthParams p{SynthShape::kStar, 4, 300, 0.5, 1.2, 0.02, 0.02, 10, 9};
  const SynthInstance a = synth_dataset(p);
  const SynthInstance b = synth_dataset(p);
  EXPECT_EQ(a.rows, b.rows);
  EXPECT_EQ(schema_to_config(a.schema), schema_to_config(b.schema));
  const Dataset ds = a.to_dataset();
  EXPECT_EQ(ds.schema().table_count(), 4u);
  auto parent = [](const Dataset& d, uint32_t t) { return d.schema().links()[*d.schema().parent_link(t)].parent; };
  for (uint32_t t = 1; t < 4; ++t) EXPECT_EQ(parent(ds, t), 0u);
  SynthParams c = p;
  c.shape = SynthShape::kChain;
  const Dataset chain = synth_dataset(c).to_dataset();
  for (uint32_t t = 1; t < 4; ++t) EXPECT_EQ(parent(chain, t), t - 1);

  const auto dir = std::filesystem::temp_directory_path() / "arcard_synth_test";
  a.write(dir);
  const Dataset back = Dataset::Ingest(load_schema_config(dir / "schema.json"), dir);
  EXPECT_EQ(back.full_join_size(), ds.full_join_size());
  std::filesystem::remove_all(dir);
  EXPECT_EQ(code_of([] { synth_dataset({SynthShape::kStar, 3, 10, 1.5}); }), ErrorCode::kInvalidArgument);
}

// Chi-square test of independence between a parent's attribute and its
// child's attribute over matched pairs.
double pair_independence_p(double correlation) {
  const SynthParams p{SynthShape::kStar, 2, 4000, correlation, 1.0, 0.0, 0.0, 8, 21};
  const SynthInstance inst = synth_dataset(p);
  // t0: id, a, b, c; t1: pid, a, b, c.
  auto bucket = [](const Value& v) { return std::min<int64_t>(std::get<int64_t>(v), 3); };
  std::array<std::array<double, 4>, 4> table{};
  for (const auto& row : inst.rows[1]) {
    const int64_t pid = std::get<int64_t>(*row[0]);
    const auto& parent = inst.rows[0][static_cast<size_t>(pid - 1)];
    table[bucket(*parent[1])][bucket(*row[1])] += 1;
  }
  double n = 0;
  std::array<double, 4> rs{}, cs{};
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) {
      rs[i] += table[i][j];
      cs[j] += table[i][j];
      n += table[i][j];
    }
  }
  double stat = 0;
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) {
      const double e = rs[i] * cs[j] / n;
      stat += (table[i][j] - e) * (table[i][j] - e) / e;
    }
  }
  return testing::chi_square_sf(stat, 9);
}

TEST(Synth, CorrelationKnob) {
  EXPECT_GT(pair_independence_p(0.0), 1e-3);
  EXPECT_LT(pair_independence_p(0.8), 1e-6);
}

TEST(Updates, PartitionsAreCumulativeAndCoverTheRoot) {
  const Dataset ds = synth_dataset({SynthShape::kStar, 3, 200, 0.8, 1.0, 0.02, 0.02, 8, 5}).to_dataset();
  const auto parts = root_partitions(ds, *ds.schema().resolve("t0.a"), 4);
  ASSERT_EQ(parts.size(), 4u);
  size_t prev = 0;
  for (const auto& p : parts) {
    const auto kept = static_cast<size_t>(std::count(p.begin(), p.end(), true));
    EXPECT_GT(kept, prev);
    prev = kept;
  }
  EXPECT_EQ(prev, ds.store(0).row_count());
  for (size_t k = 1; k < parts.size(); ++k) {
    for (size_t r = 0; r < parts[k].size(); ++r) {
      if (parts[k - 1][r]) EXPECT_TRUE(parts[k][r]);
    }
  }
}

TEST(QueryIo, QueryRoundTripAndErrors) {
  const QuerySpec q{{"A", "B"},
                    {Predicate{"A.x", CompareOp::kLe, {Literal{int64_t{5}}}},
                     Predicate{"B.y", CompareOp::kIn, {Literal{std::string("a")}, Literal{std::string("c")}}}}};
  const QuerySpec back = parse_query(query_to_json(q));
  EXPECT_EQ(query_to_json(back), query_to_json(q));
  const QuerySpec obj = parse_query(R"({"tables":["A"],"predicates":[{"column":"A.x","op":"=","value":2}]})");
  ASSERT_EQ(obj.predicates.size(), 1u);
  EXPECT_EQ(obj.predicates[0].op, CompareOp::kEq);
  EXPECT_EQ(code_of([] { parse_query(R"({"tables":["A"],"predicates":[["A.x","~",1]]})"); }),
            ErrorCode::kUnsupportedOperator);
  EXPECT_EQ(code_of([] { parse_query(R"({"tables":["A"],"predicates":[["A.x","=",1.5]]})"); }),
            ErrorCode::kBadLiteralType);
  EXPECT_EQ(code_of([] { parse_query("{"); }), ErrorCode::kConfigError);
  EXPECT_EQ(parse_query_lines(query_to_json(q) + "\n\n" + query_to_json(q) + "\n").size(), 2u);
}

TEST(QueryIo, WorkloadRoundTrip) {
  const Dataset ds = testing::random_instance(2);
  WorkloadSpec spec;
  spec.query_count = 10;
  spec.min_filters = 0;
  spec.max_filters = 2;
  try {
    const auto w = generate_workload(ds, spec);
    const auto back = parse_workload_jsonl(workload_to_jsonl(w));
    ASSERT_EQ(back.size(), w.size());
    for (size_t i = 0; i < w.size(); ++i) {
      EXPECT_EQ(back[i].truth, w[i].truth);
      EXPECT_EQ(back[i].graph, w[i].graph);
    }
    EXPECT_EQ(workload_to_jsonl(back), workload_to_jsonl(w));
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kEmptyJoinGraph);
  }
}

TEST(QueryIo, StrictOptionParsers) {
  EXPECT_TRUE(parse_estimate_options(R"({"samples":"exhaustive"})").exhaustive);
  EXPECT_EQ(parse_estimate_options(R"({"samples":50,"seed":3})").samples, 50u);
  EXPECT_EQ(parse_estimate_options("").samples, EstimateOptions{}.samples);
  EXPECT_EQ(code_of([] { parse_estimate_options(R"({"sample":5})"); }), ErrorCode::kConfigError);
  EXPECT_EQ(parse_train_options(R"({"tuples":1000,"workers":2})").worker_count, 2u);
  EXPECT_EQ(code_of([] { parse_train_options(R"({"tuples":-1})"); }), ErrorCode::kConfigError);
  const JoinSchema s = JoinSchema::Build(testing::three_table_schema());
  const WorkloadSpec w = parse_workload_spec(s, R"({"queries":8,"join_graphs":[["A","B"],["C"]]})");
  EXPECT_EQ(w.query_count, 8u);
  EXPECT_EQ(w.join_graphs, (std::vector<std::vector<uint32_t>>{{0, 1}, {2}}));
  EXPECT_EQ(code_of([&] { parse_workload_spec(s, R"({"join_graphs":[["A","C"]]})"); }),
            ErrorCode::kQueryNotSubtree);
  EXPECT_EQ(parse_synth_params(R"({"shape":"chain","tables":5})").tables, 5u);
  EXPECT_EQ(code_of([] { parse_synth_params(R"({"shape":"ring"})"); }), ErrorCode::kConfigError);
}

}  // namespace
}  // namespace arcard
