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

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "arcard/layout.hpp"

namespace arcard {

// One row per sample, one column per subcolumn of the layout. A negative
// entry is the wildcard (column skipped or not yet drawn).
using PrefixMatrix = Eigen::Matrix<int32_t, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

inline constexpr int32_t kWildcard = -1;

// Conditional distributions of the autoregressive factorization over the
// subcolumns of a layout.
class DensityBackend {
 public:
  virtual ~DensityBackend() = default;

  virtual const ModelLayout& layout() const = 0;
  // Whether a wildcard may stand for a column that was never drawn.
  virtual bool supports_wildcards() const = 0;

  // p(sub | prefix row) for every row of `prefix`; only columns before
  // `sub` are read. `out` becomes rows x domain(sub), each row summing to 1
  // (or all zero when the prefix has no support).
  virtual void conditional(uint32_t sub, const PrefixMatrix& prefix, Eigen::MatrixXd& out) const = 0;

  // Sum over subcolumns of log p(x_i | x_<i) for fully specified rows.
  virtual std::vector<double> log_likelihood(const PrefixMatrix& rows) const;
};

}  // namespace arcard
