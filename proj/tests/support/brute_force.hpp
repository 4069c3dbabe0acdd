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

// Reference answers computed from decoded values by enumeration. Nothing here
// uses join counts, key indexes or shared token spaces.

#pragma once

#include <cstdint>
#include <vector>

#include "arcard/dataset.hpp"
#include "arcard/layout.hpp"

namespace arcard::testing {

// Rows of the full outer join of a connected set of tables, each row listing
// a base-row index per table in `tables` order (-1 for NULL). A row is valid
// when its non-NULL tables form a connected set, every edge inside that set
// joins on equal non-NULL keys, and no boundary table holds a row that would
// join with it.
std::vector<std::vector<int32_t>> brute_full_outer_join(const Dataset& dataset,
                                                        const std::vector<uint32_t>& tables);

// Inner join of the query's tables with its filters, counted by enumeration.
uint64_t brute_cardinality(const Dataset& dataset, const QuerySpec& query);

// Tables of the subtree hanging from `table` under the declared root.
std::vector<uint32_t> subtree_tables(const JoinSchema& schema, uint32_t table);

// Full-join rows in layout order: content tokens, indicators, fanouts.
std::vector<std::vector<Token>> brute_layout_rows(const Dataset& dataset, const ModelLayout& layout);

// Chi-square upper tail probability with `dof` degrees of freedom.
double chi_square_sf(double statistic, double dof);

}  // namespace arcard::testing
