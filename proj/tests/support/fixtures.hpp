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
#include <vector>

#include "arcard/dataset.hpp"
#include "arcard/rng.hpp"

namespace arcard::testing {

// Three tables A(x) - B(x, y) - C(y): A = {1, 2}, B = {(1,a), (2,b), (2,c)},
// C = {c, c, d}. Root A.
SchemaDef three_table_schema();
Dataset three_table_dataset();
// "A JOIN B JOIN C WHERE A.x = 2" and "A WHERE A.x = 2".
QuerySpec three_table_q1();
QuerySpec three_table_q2();

struct RandomInstanceOptions {
  uint32_t min_tables = 2;
  uint32_t max_tables = 4;
  uint32_t max_rows = 50;
  double null_rate = 0.12;
};

// Random tree schema with a random declared root. Each table gets one or two
// content columns (integer or string); an edge uses a dedicated key column or
// shares one with another edge of the same table, so multi-column group keys
// and shared keys both occur. Keys may be NULL or dangling.
Dataset random_instance(uint64_t seed, const RandomInstanceOptions& options = {});

// Random valid query over a connected subtree; literals are drawn from column
// values or made up, operators cover the full set.
QuerySpec random_query(const Dataset& dataset, Rng& rng);
// Same, over connected subtree number `graph` (modulo their count).
QuerySpec random_query(const Dataset& dataset, Rng& rng, size_t graph);

}  // namespace arcard::testing
