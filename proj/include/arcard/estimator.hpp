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

#include <cstdint>
#include <optional>
#include <vector>

#include "arcard/dataset.hpp"
#include "arcard/density.hpp"
#include "arcard/factorize.hpp"
#include "arcard/layout.hpp"

namespace arcard {

enum class ActionKind {
  kSkip,        // unconstrained: wildcard, or drawn when wildcards are unsupported
  kConstrain,   // restrict to a region and multiply in its mass
  kDrawFanout,  // draw a value and divide by it
};

struct ColumnAction {
  ActionKind kind = ActionKind::kSkip;
  TokenRegion region;  // constrain: the valid tokens
};

// Per logical column of the layout, what progressive sampling does there.
struct InferencePlan {
  std::vector<ColumnAction> actions;
  std::vector<SubcolumnProgram> programs;  // per logical column
  Weight full_join_size = 0;
};

// Predicates become regions; present tables constrain their indicator to 1;
// each omitted table's fanout key is drawn.
InferencePlan build_plan(const Dataset& dataset, const ModelLayout& layout, const QuerySpec& query);

struct EstimateOptions {
  uint64_t samples = 1000;
  // Enumerate every branch with nonzero probability instead of sampling.
  bool exhaustive = false;
  // Skip unconstrained columns with wildcards when the backend allows it.
  bool use_wildcards = true;
  uint64_t seed = 0;
  // Exhaustive enumeration aborts with TooLarge past this many live branches.
  uint64_t max_branches = 5'000'000;
};

struct Estimate {
  double cardinality = 1.0;  // clamped to [1, |J|]
  double raw = 0.0;          // selectivity * |J|, unclamped
  double selectivity = 0.0;
  uint64_t samples = 0;      // 0 when exhaustive
  uint64_t seed = 0;
  bool zero_mass = false;
};

Estimate estimate(const InferencePlan& plan, const DensityBackend& backend,
                  const EstimateOptions& options);

struct EstimateOutcome {
  Status status;
  Estimate estimate;
  double latency_ms = 0.0;
};

// Independent estimates in input order; failures are reported per query.
std::vector<EstimateOutcome> estimate_batch(const Dataset& dataset, const DensityBackend& backend,
                                            const std::vector<QuerySpec>& queries,
                                            const EstimateOptions& options,
                                            std::optional<Weight> full_join_size = std::nullopt);

}  // namespace arcard
