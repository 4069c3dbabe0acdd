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

// JSON text formats: queries, workloads, reports and option objects.
//
// A query is one object:
//   {"tables": ["A", "B"],
//    "predicates": [["A.x", "<=", 5], ["B.s", "IN", ["u", "v"]]]}
// A predicate may also be {"column": .., "op": .., "value": ..}. Query and
// workload files hold one object per line; workload lines add "truth".
// Option objects are strict: unknown keys are ConfigError. Empty text means
// defaults.

#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "arcard/eval.hpp"

namespace arcard {

QuerySpec parse_query(std::string_view text);
std::string query_to_json(const QuerySpec& query);
std::vector<QuerySpec> parse_query_lines(std::string_view text);

std::string workload_to_jsonl(const std::vector<WorkloadQuery>& workload);
std::vector<WorkloadQuery> parse_workload_jsonl(std::string_view text);

std::string estimate_to_json(size_t index, const EstimateOutcome& outcome);
// One line per query, then a summary line.
std::string report_to_jsonl(const QErrorReport& report);
std::string summary_to_json(const QuantileSummary& summary);
std::string train_report_to_json(const TrainReport& report);
std::string update_report_to_json(const UpdateReport& report);
std::string counts_to_json(const Dataset& dataset);

EstimateOptions parse_estimate_options(std::string_view text);
TrainOptions parse_train_options(std::string_view text);
WorkloadSpec parse_workload_spec(const JoinSchema& schema, std::string_view text);
SynthParams parse_synth_params(std::string_view text);
UpdateSpec parse_update_spec(const JoinSchema& schema, std::string_view text);

}  // namespace arcard
