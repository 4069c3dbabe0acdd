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

#include "arcard/eval.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <numeric>

#include "arcard/binary_io.hpp"
#include "arcard/oracle.hpp"
#include "arcard/rng.hpp"
#include "arcard/sampler.hpp"

namespace arcard {

double q_error(double estimate, double truth) {
  const double e = std::max(1.0, estimate);
  const double t = std::max(1.0, truth);
  return std::max(e / t, t / e);
}

double quantile(std::vector<double> values, double q) {
  if (values.empty()) return 1.0;
  std::sort(values.begin(), values.end());
  const double pos = std::clamp(q, 0.0, 1.0) * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<size_t>(std::floor(pos));
  const size_t hi = std::min(lo + 1, values.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return values[lo] + (values[hi] - values[lo]) * frac;
}

QuantileSummary summarize(const std::vector<double>& q_errors) {
  QuantileSummary s;
  s.count = q_errors.size();
  if (q_errors.empty()) return s;
  s.p50 = quantile(q_errors, 0.50);
  s.p95 = quantile(q_errors, 0.95);
  s.p99 = quantile(q_errors, 0.99);
  s.max = *std::max_element(q_errors.begin(), q_errors.end());
  // Interpolation is monotone in q, but keep the chain exact under rounding.
  s.p95 = std::max(s.p95, s.p50);
  s.p99 = std::max(s.p99, s.p95);
  s.max = std::max(s.max, s.p99);
  return s;
}

// ---------------------------------------------------------------------------
// Workload generation

namespace {

QuerySpec bare_query(const JoinSchema& schema, const std::vector<uint32_t>& tables) {
  QuerySpec q;
  for (uint32_t t : tables) q.tables.push_back(schema.table(t).name);
  return q;
}

}  // namespace

std::vector<WorkloadQuery> generate_workload(const Dataset& dataset, const WorkloadSpec& spec) {
  const JoinSchema& schema = dataset.schema();
  if (spec.min_filters > spec.max_filters) {
    fail(ErrorCode::kInvalidArgument, "min_filters exceeds max_filters");
  }
  std::vector<std::vector<uint32_t>> graphs =
      spec.join_graphs.empty() ? connected_subtrees(schema) : spec.join_graphs;
  for (auto& g : graphs) {
    std::sort(g.begin(), g.end());
    g.erase(std::unique(g.begin(), g.end()), g.end());
    if (g.empty() || g.back() >= schema.table_count() || !is_connected_subtree(schema, g)) {
      fail(ErrorCode::kQueryNotSubtree, "join graph is not a connected subtree");
    }
  }
  std::vector<WorkloadQuery> out;
  if (spec.query_count == 0) return out;

  const ModelLayout layout = ModelLayout::Build(dataset, FactorizationSpec{});
  const JoinSampler sampler(dataset, layout);

  struct GraphInfo {
    std::vector<uint32_t> indicators;
    std::vector<uint32_t> fanouts;
  };
  std::vector<GraphInfo> info(graphs.size());
  for (size_t g = 0; g < graphs.size(); ++g) {
    const QuerySpec bare = bare_query(schema, graphs[g]);
    if (true_cardinality(dataset, bare) == 0) {
      fail(ErrorCode::kEmptyJoinGraph, "inner join of {" + [&] {
        std::string s;
        for (const auto& t : bare.tables) s += (s.empty() ? "" : ",") + t;
        return s;
      }() + "} is empty");
    }
    for (uint32_t t : graphs[g]) info[g].indicators.push_back(layout.indicator_column(t));
    for (const auto& [table, key] : resolve_fanout_keys(schema, bare)) {
      info[g].fanouts.push_back(layout.fanout_column(key));
    }
  }

  std::vector<Token> row(layout.logical_count());
  for (size_t i = 0; i < spec.query_count; ++i) {
    const auto g = static_cast<uint32_t>(i % graphs.size());
    Rng rng(derive_seed(spec.seed, {3, i}));
    const uint64_t row_seed = derive_seed(spec.seed, {4, i});

    // Rejection on indicators gives a uniform row of the full join with all
    // graph tables present; accepting with 1/prod(fanouts) makes it a
    // uniform tuple of the graph's inner join.
    bool found = false;
    for (uint64_t attempt = 0; attempt < spec.max_attempts && !found; ++attempt) {
      sampler.sample_row(row_seed, attempt, row);
      bool present = true;
      for (uint32_t c : info[g].indicators) present = present && row[c] == 1;
      if (!present) continue;
      double product = 1.0;
      for (uint32_t c : info[g].fanouts) {
        product *= static_cast<double>(layout.columns()[c].fanout_values.at(row[c]));
      }
      found = rng.uniform() * product < 1.0;
    }
    if (!found) fail(ErrorCode::kEmptyJoinGraph, "no inner-join tuple drawn within the attempt limit");

    std::vector<ColumnRef> candidates;
    for (uint32_t t : graphs[g]) {
      for (uint32_t c = 0; c < schema.table(t).columns.size(); ++c) {
        if (schema.table(t).columns[c].kind != ColumnKind::kContent) continue;
        if (row[layout.content_column({t, c})] != kNullToken) candidates.push_back({t, c});
      }
    }
    const uint32_t want = spec.min_filters + static_cast<uint32_t>(rng.below(spec.max_filters - spec.min_filters + 1ull));
    const size_t k = std::min<size_t>(want, candidates.size());
    for (size_t j = 0; j < k; ++j) {
      std::swap(candidates[j], candidates[j + rng.below(candidates.size() - j)]);
    }
    std::sort(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(k));

    WorkloadQuery wq;
    wq.graph = g;
    wq.query = bare_query(schema, graphs[g]);
    for (size_t j = 0; j < k; ++j) {
      const ColumnRef ref = candidates[j];
      const ColumnDef& def = schema.column(ref);
      Predicate p;
      p.column = schema.qualified_name(ref);
      static constexpr CompareOp kRangeOps[] = {CompareOp::kLe, CompareOp::kGe, CompareOp::kEq};
      p.op = def.range_filterable ? kRangeOps[rng.below(3)] : CompareOp::kEq;
      const Value v = *dataset.dictionary(ref).decode(row[layout.content_column(ref)]);
      p.literals.push_back(std::visit([](const auto& x) { return Literal{x}; }, v));
      wq.query.predicates.push_back(std::move(p));
    }
    wq.truth = true_cardinality(dataset, wq.query);
    if (wq.truth == 0) fail(ErrorCode::kInternal, "generated query has an empty answer");
    out.push_back(std::move(wq));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Evaluation

QErrorReport evaluate(const Dataset& dataset, const DensityBackend& backend,
                      const std::vector<WorkloadQuery>& workload, const EstimateOptions& options,
                      std::optional<Weight> full_join_size) {
  std::vector<QuerySpec> queries;
  queries.reserve(workload.size());
  for (const auto& w : workload) queries.push_back(w.query);
  const auto outcomes = estimate_batch(dataset, backend, queries, options, full_join_size);

  QErrorReport report;
  report.options = options;
  std::vector<double> errors;
  for (size_t i = 0; i < workload.size(); ++i) {
    QueryResult r;
    r.status = outcomes[i].status;
    r.truth = workload[i].truth;
    r.estimate = outcomes[i].estimate;
    r.latency_ms = outcomes[i].latency_ms;
    if (r.status.ok()) {
      r.q_error = q_error(r.estimate.cardinality, weight_to_double(r.truth));
      errors.push_back(r.q_error);
    } else {
      ++report.failures;
    }
    report.results.push_back(std::move(r));
  }
  report.summary = summarize(errors);
  return report;
}

uint64_t report_digest(const QErrorReport& report) {
  BinaryWriter w;
  w.u64(report.results.size());
  for (const auto& r : report.results) {
    w.u32(static_cast<uint32_t>(r.status.code));
    w.str(weight_to_string(r.truth));
    w.f64(r.estimate.cardinality);
    w.f64(r.estimate.raw);
    w.f64(r.estimate.selectivity);
    w.u64(r.estimate.samples);
    w.u64(r.estimate.seed);
    w.u8(r.estimate.zero_mass ? 1 : 0);
    w.f64(r.q_error);
  }
  w.f64(report.summary.p50);
  w.f64(report.summary.p95);
  w.f64(report.summary.p99);
  w.f64(report.summary.max);
  w.u64(report.failures);
  const auto& bytes = w.data();
  return fnv1a64(bytes);
}

// ---------------------------------------------------------------------------
// Synthetic instances

namespace {

class Zipf {
 public:
  Zipf(uint64_t n, double s) : cum_(n) {
    double acc = 0.0;
    for (uint64_t i = 0; i < n; ++i) {
      acc += 1.0 / std::pow(static_cast<double>(i + 1), s);
      cum_[i] = acc;
    }
  }
  uint64_t draw(Rng& rng) const {
    const double u = rng.uniform() * cum_.back();
    const auto it = std::upper_bound(cum_.begin(), cum_.end(), u);
    return std::min<uint64_t>(static_cast<uint64_t>(it - cum_.begin()), cum_.size() - 1);
  }

 private:
  std::vector<double> cum_;
};

std::string csv_cell(const std::optional<Value>& v) {
  if (!v) return "";
  if (const auto* i = std::get_if<int64_t>(&*v)) return std::to_string(*i);
  std::string out = "\"";
  for (char c : std::get<std::string>(*v)) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

}  // namespace

SynthInstance synth_dataset(const SynthParams& params) {
  if (params.tables == 0 || params.rows == 0 || params.attribute_domain == 0) {
    fail(ErrorCode::kInvalidArgument, "synthetic instance needs tables, rows and attributes");
  }
  if (params.correlation < 0.0 || params.correlation > 1.0 || params.null_fraction < 0.0 ||
      params.dangling_fraction < 0.0 || params.null_fraction + params.dangling_fraction > 1.0) {
    fail(ErrorCode::kInvalidArgument, "synthetic fractions out of range");
  }
  const uint32_t n = params.tables;
  std::vector<int64_t> parent(n, -1);
  for (uint32_t t = 1; t < n; ++t) parent[t] = params.shape == SynthShape::kStar ? 0 : t - 1;
  std::vector<bool> has_children(n, false);
  for (uint32_t t = 1; t < n; ++t) has_children[static_cast<size_t>(parent[t])] = true;

  SynthInstance inst;
  inst.schema.root = "t0";
  // Column positions per table.
  struct Cols {
    int id = -1, pid = -1, a = -1, b = -1, c = -1;
  };
  std::vector<Cols> cols(n);
  for (uint32_t t = 0; t < n; ++t) {
    TableDef def;
    def.name = "t" + std::to_string(t);
    def.file = def.name + ".csv";
    auto add = [&](std::string name, ColumnKind kind, ValueType type, bool range) {
      def.columns.push_back(ColumnDef{std::move(name), kind, type, range});
      return static_cast<int>(def.columns.size() - 1);
    };
    if (has_children[t]) cols[t].id = add("id", ColumnKind::kJoinKey, ValueType::kInteger, false);
    if (t > 0) cols[t].pid = add("pid", ColumnKind::kJoinKey, ValueType::kInteger, false);
    cols[t].a = add("a", ColumnKind::kContent, ValueType::kInteger, true);
    cols[t].b = t == 0 ? add("b", ColumnKind::kContent, ValueType::kString, false)
                       : add("b", ColumnKind::kContent, ValueType::kInteger, true);
    cols[t].c = add("c", ColumnKind::kContent, ValueType::kInteger, true);
    inst.schema.tables.push_back(std::move(def));
    if (t > 0) {
      const std::string p = "t" + std::to_string(parent[t]);
      inst.schema.edges.push_back(JoinEdge{p, "id", "t" + std::to_string(t), "pid"});
    }
  }

  const Zipf attr(params.attribute_domain, params.skew);
  const Zipf rank(params.rows, params.skew);
  std::vector<std::vector<int64_t>> bucket_of(n);  // attribute a per row
  inst.rows.resize(n);
  for (uint32_t t = 0; t < n; ++t) {
    Rng rng(derive_seed(params.seed, {t}));
    const size_t width = inst.schema.tables[t].columns.size();
    // Parents grouped by attribute, for correlated key choice.
    std::vector<std::vector<uint64_t>> by_bucket;
    if (t > 0) {
      by_bucket.resize(params.attribute_domain);
      const auto& pb = bucket_of[static_cast<size_t>(parent[t])];
      for (uint64_t r = 0; r < pb.size(); ++r) by_bucket[static_cast<size_t>(pb[r])].push_back(r);
    }
    bucket_of[t].resize(params.rows);
    for (uint64_t r = 0; r < params.rows; ++r) {
      RawRow row(width);
      const auto a = static_cast<int64_t>(attr.draw(rng));
      bucket_of[t][r] = a;
      if (cols[t].id >= 0) row[static_cast<size_t>(cols[t].id)] = Value{static_cast<int64_t>(r + 1)};
      if (cols[t].pid >= 0) {
        const double u = rng.uniform();
        std::optional<Value> key;
        if (u < params.null_fraction) {
          key = std::nullopt;
        } else if (u < params.null_fraction + params.dangling_fraction) {
          key = Value{static_cast<int64_t>(params.rows + 1 + rng.below(params.rows))};
        } else {
          const auto& same = by_bucket[static_cast<size_t>(a)];
          uint64_t p = 0;
          if (!same.empty() && rng.uniform() < params.correlation) {
            p = same[rng.below(same.size())];
          } else {
            p = rank.draw(rng);
          }
          key = Value{static_cast<int64_t>(p + 1)};
        }
        row[static_cast<size_t>(cols[t].pid)] = key;
      }
      row[static_cast<size_t>(cols[t].a)] = Value{a};
      const bool follow = rng.uniform() < 0.8;
      if (t == 0) {
        const int64_t cat = follow ? a % 5 : static_cast<int64_t>(rng.below(5));
        row[static_cast<size_t>(cols[t].b)] = Value{"k" + std::to_string(cat)};
      } else {
        const int64_t b = follow ? a * 2 + static_cast<int64_t>(rng.below(3))
                                 : static_cast<int64_t>(rng.below(2ull * params.attribute_domain + 2));
        row[static_cast<size_t>(cols[t].b)] = Value{b};
      }
      const int64_t c = rng.uniform() < 0.5 ? (a + static_cast<int64_t>(rng.below(4))) / 2
                                            : static_cast<int64_t>(rng.below(params.attribute_domain));
      row[static_cast<size_t>(cols[t].c)] = Value{c};
      inst.rows[t].push_back(std::move(row));
    }
  }
  return inst;
}

Dataset SynthInstance::to_dataset() const {
  std::vector<TableStore> stores;
  for (size_t t = 0; t < schema.tables.size(); ++t) {
    stores.push_back(make_table(schema.tables[t], rows[t]));
  }
  return Dataset::FromStores(JoinSchema::Build(schema), std::move(stores));
}

void SynthInstance::write(const std::filesystem::path& dir) const {
  std::filesystem::create_directories(dir);
  for (size_t t = 0; t < schema.tables.size(); ++t) {
    const TableDef& def = schema.tables[t];
    std::ofstream out(dir / def.file, std::ios::binary);
    if (!out) fail(ErrorCode::kIoError, "cannot write " + (dir / def.file).string());
    for (size_t c = 0; c < def.columns.size(); ++c) out << (c ? "," : "") << def.columns[c].name;
    out << '\n';
    for (const auto& row : rows[t]) {
      for (size_t c = 0; c < row.size(); ++c) out << (c ? "," : "") << csv_cell(row[c]);
      out << '\n';
    }
    if (!out) fail(ErrorCode::kIoError, "write failed on " + (dir / def.file).string());
  }
  std::ofstream out(dir / "schema.json", std::ios::binary);
  out << schema_to_config(schema) << '\n';
  if (!out) fail(ErrorCode::kIoError, "write failed on " + (dir / "schema.json").string());
}

// ---------------------------------------------------------------------------
// Append simulation

std::vector<std::vector<bool>> root_partitions(const Dataset& dataset, ColumnRef column,
                                               uint32_t partitions) {
  const JoinSchema& schema = dataset.schema();
  if (column.table != schema.root()) {
    fail(ErrorCode::kInvalidArgument, "partition column must belong to the root table");
  }
  if (partitions == 0) fail(ErrorCode::kInvalidArgument, "need at least one partition");
  const auto& values = dataset.store(column.table).columns.at(column.column);
  std::vector<uint32_t> order(values.size());
  std::iota(order.begin(), order.end(), 0u);
  std::stable_sort(order.begin(), order.end(),
                   [&](uint32_t x, uint32_t y) { return values[x] < values[y]; });
  std::vector<std::vector<bool>> out;
  std::vector<bool> keep(values.size(), false);
  for (uint32_t p = 0; p < partitions; ++p) {
    const size_t lo = values.size() * p / partitions;
    const size_t hi = values.size() * (p + 1) / partitions;
    for (size_t i = lo; i < hi; ++i) keep[order[i]] = true;
    out.push_back(keep);
  }
  return out;
}

UpdateReport simulate_updates(const Dataset& full, const UpdateSpec& spec) {
  const JoinSchema& schema = full.schema();
  const auto ref = schema.resolve(spec.partition_column);
  if (!ref) fail(ErrorCode::kUnknownColumn, "unknown partition column '" + spec.partition_column + "'");
  if (spec.partitions < 2) fail(ErrorCode::kInvalidArgument, "need at least two partitions");

  std::vector<Dataset> snapshots;
  for (const auto& keep : root_partitions(full, *ref, spec.partitions)) {
    snapshots.push_back(full.RestrictRoot(keep));
  }
  std::vector<const Dataset*> ptrs;
  for (const auto& s : snapshots) ptrs.push_back(&s);
  const ModelLayout layout = ModelLayout::Build(schema, ptrs, spec.factorization);
  const uint64_t digest = full.dictionary_digest();
  const Dataset& last = snapshots.back();

  UpdateReport report;
  for (const auto& s : snapshots) report.snapshot_sizes.push_back(s.full_join_size());

  TrainOptions base_opts;
  base_opts.tuples = spec.base_tuples;
  base_opts.worker_count = spec.worker_count;
  base_opts.seed = derive_seed(spec.seed, {11});
  const uint64_t init_seed = derive_seed(spec.seed, {10});

  ArModel base(layout, spec.model, init_seed, digest);
  {
    const JoinSampler sampler(snapshots.front(), layout);
    base.train(sampler, base_opts);
  }
  const auto workload = generate_workload(last, spec.workload);

  report.strategies.push_back(
      {"stale", 0, evaluate(last, base, workload, spec.estimate, snapshots.front().full_join_size())});

  ArModel fast = base;
  const uint64_t appends = spec.partitions - 1;
  const auto total_fast = static_cast<uint64_t>(
      std::floor(static_cast<double>(spec.base_tuples) * spec.fast_fraction));
  uint64_t fast_tuples = 0;
  for (uint64_t k = 1; k <= appends; ++k) {
    const uint64_t budget = total_fast * k / appends - total_fast * (k - 1) / appends;
    TrainOptions o = base_opts;
    o.seed = derive_seed(spec.seed, {12, k});
    const JoinSampler sampler(snapshots[k], layout);
    fast_tuples += incremental_update(fast, sampler, budget, o).tuples;
  }
  report.strategies.push_back({"fast_update", fast_tuples, evaluate(last, fast, workload, spec.estimate)});

  ArModel retrained(layout, spec.model, init_seed, digest);
  TrainOptions o = base_opts;
  o.seed = derive_seed(spec.seed, {13});
  const JoinSampler sampler(last, layout);
  const uint64_t retrain_tuples = retrained.train(sampler, o).tuples;
  report.strategies.push_back({"retrain", retrain_tuples, evaluate(last, retrained, workload, spec.estimate)});
  return report;
}

}  // namespace arcard
