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

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "arcard/dataset.hpp"
#include "arcard/estimator.hpp"
#include "arcard/model.hpp"

namespace arcard {

// max(estimate/truth, truth/estimate) with both sides clamped to >= 1.
double q_error(double estimate, double truth);

struct QuantileSummary {
  size_t count = 0;
  double p50 = 1.0;
  double p95 = 1.0;
  double p99 = 1.0;
  double max = 1.0;
};

// Linear interpolation between order statistics.
double quantile(std::vector<double> values, double q);
QuantileSummary summarize(const std::vector<double>& q_errors);

struct WorkloadQuery {
  QuerySpec query;
  Weight truth = 0;
  uint32_t graph = 0;  // index into the workload's join graphs
};

struct WorkloadSpec {
  size_t query_count = 100;
  // Sets of table indices; empty means every connected subtree.
  std::vector<std::vector<uint32_t>> join_graphs;
  uint32_t min_filters = 3;
  uint32_t max_filters = 6;
  uint64_t seed = 0;
  // Rejection draws allowed per query before giving up with EmptyJoinGraph.
  uint64_t max_attempts = 2'000'000;
};

// Queries go round-robin over the join graphs. Each takes its literals from
// one uniformly drawn tuple of its graph's inner join, so every query has a
// non-empty answer. Throws EmptyJoinGraph when a graph's inner join is empty.
std::vector<WorkloadQuery> generate_workload(const Dataset& dataset, const WorkloadSpec& spec);

struct QueryResult {
  Status status;
  Weight truth = 0;
  Estimate estimate;
  double q_error = 0.0;
  double latency_ms = 0.0;
};

struct QErrorReport {
  std::vector<QueryResult> results;
  QuantileSummary summary;  // over queries that succeeded
  size_t failures = 0;
  EstimateOptions options;
};

QErrorReport evaluate(const Dataset& dataset, const DensityBackend& backend,
                      const std::vector<WorkloadQuery>& workload, const EstimateOptions& options,
                      std::optional<Weight> full_join_size = std::nullopt);

// Hash of everything in a report except timings.
uint64_t report_digest(const QErrorReport& report);

// ---------------------------------------------------------------------------
// Synthetic instances

enum class SynthShape { kStar, kChain };

struct SynthParams {
  SynthShape shape = SynthShape::kStar;
  uint32_t tables = 3;
  uint64_t rows = 1000;  // per table
  // 0: child keys independent of parent attributes; 1: fully tied.
  double correlation = 0.8;
  double skew = 1.0;  // Zipf exponent for attribute and key choices
  double null_fraction = 0.02;
  double dangling_fraction = 0.02;
  uint32_t attribute_domain = 16;
  uint64_t seed = 0;
};

struct SynthInstance {
  SchemaDef schema;
  std::vector<std::vector<RawRow>> rows;  // per table

  Dataset to_dataset() const;
  // Writes <table>.csv files and schema.json into `dir`.
  void write(const std::filesystem::path& dir) const;
};

// Tables t0..t{n-1}, root t0. Each table has attributes; every child holds
// `pid` referencing its parent's `id`. With correlation c a child row picks a
// parent sharing its attribute bucket with probability c.
SynthInstance synth_dataset(const SynthParams& params);

// ---------------------------------------------------------------------------
// Append simulation

struct UpdateSpec {
  std::string partition_column;  // "root_table.column"
  uint32_t partitions = 5;
  uint64_t base_tuples = 200000;
  double fast_fraction = 0.01;  // of base_tuples, summed over all appends
  ModelConfig model;
  FactorizationSpec factorization;
  WorkloadSpec workload;
  EstimateOptions estimate;
  uint32_t worker_count = 1;
  uint64_t seed = 0;
};

struct StrategyResult {
  std::string name;
  uint64_t trained_tuples = 0;  // after the first snapshot
  QErrorReport report;
};

struct UpdateReport {
  std::vector<Weight> snapshot_sizes;  // |J| per snapshot
  std::vector<StrategyResult> strategies;  // stale, fast_update, retrain
};

// Range-partitions the root on `partition_column`, trains on the first
// snapshot and evaluates each strategy on the final one. Stale keeps the
// first snapshot's model and |J|; fast update takes a few steps per append;
// retrain trains a fresh model on the final snapshot.
UpdateReport simulate_updates(const Dataset& full, const UpdateSpec& spec);

// Root row sets of the cumulative snapshots, in partition order.
std::vector<std::vector<bool>> root_partitions(const Dataset& dataset, ColumnRef column,
                                               uint32_t partitions);

}  // namespace arcard
