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

#include <memory>
#include <mutex>
#include <unordered_map>
#include <vector>

#include "arcard/dataset.hpp"
#include "arcard/density.hpp"
#include "arcard/layout.hpp"
#include "arcard/sampler.hpp"

namespace arcard {

inline constexpr uint64_t kDefaultMaterializeCap = 10'000'000;

// The full outer join, row by row, in the model layout.
struct MaterializedJoin {
  SampleBatch rows;
  size_t table_count = 0;
  std::vector<int32_t> table_rows;  // row-major; -1 is NULL

  size_t size() const { return rows.rows(); }
  std::span<const int32_t> source(size_t i) const {
    return {table_rows.data() + i * table_count, table_count};
  }
};

// Sequential hash full outer joins down the tree. Throws TooLarge when the
// result would exceed `cap` rows.
MaterializedJoin materialize(const Dataset& dataset, const ModelLayout& layout,
                             uint64_t cap = kDefaultMaterializeCap);

// Whether a decoded cell satisfies `op literals`; NULL never does.
bool predicate_holds(const std::optional<Value>& cell, CompareOp op,
                     std::span<const Literal> literals);

// Exact result size of the query's inner join with its filters, computed by
// re-joining only the query's tables.
Weight true_cardinality(const Dataset& dataset, const QuerySpec& query);

// Empirical conditionals of a materialized join, by exact counting over rows
// matching the prefix. Wildcards marginalize.
class EmpiricalBackend final : public DensityBackend {
 public:
  EmpiricalBackend(ModelLayout layout, const MaterializedJoin& join);

  const ModelLayout& layout() const override { return layout_; }
  bool supports_wildcards() const override { return true; }
  void conditional(uint32_t sub, const PrefixMatrix& prefix, Eigen::MatrixXd& out) const override;

  size_t row_count() const { return static_cast<size_t>(rows_.rows()); }

 private:
  using RowSet = std::shared_ptr<const std::vector<uint32_t>>;
  struct KeyHash {
    size_t operator()(const std::vector<int32_t>& key) const;
  };

  RowSet matching(const std::vector<int32_t>& key) const;

  ModelLayout layout_;
  PrefixMatrix rows_;
  mutable std::mutex mu_;
  mutable std::unordered_map<std::vector<int32_t>, RowSet, KeyHash> cache_;
};

}  // namespace arcard
