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

#include "arcard/estimator.hpp"

#include <algorithm>
#include <chrono>

#include "arcard/rng.hpp"

namespace arcard {

InferencePlan build_plan(const Dataset& dataset, const ModelLayout& layout, const QuerySpec& query) {
  const JoinSchema& schema = dataset.schema();
  if (Status s = validate_query(schema, query); !s.ok()) fail(s.code, s.message);

  InferencePlan plan;
  plan.actions.resize(layout.logical_count());
  for (const auto& p : query.predicates) {
    const ColumnRef ref = *schema.resolve(p.column);
    const uint32_t idx = layout.content_column(ref);
    TokenRegion region = predicate_region(dataset.dictionary(ref), p.op, p.literals);
    ColumnAction& a = plan.actions[idx];
    if (a.kind == ActionKind::kConstrain) {
      a.region = a.region.intersect(region);
    } else {
      a.kind = ActionKind::kConstrain;
      a.region = std::move(region);
    }
  }
  for (uint32_t t : query_table_indices(schema, query)) {
    ColumnAction& a = plan.actions[layout.indicator_column(t)];
    a.kind = ActionKind::kConstrain;
    a.region = TokenRegion::Range(1, 1);
  }
  for (const auto& [table, key] : resolve_fanout_keys(schema, query)) {
    plan.actions[layout.fanout_column(key)].kind = ActionKind::kDrawFanout;
  }
  for (size_t i = 0; i < layout.logical_count(); ++i) {
    const LogicalColumn& col = layout.columns()[i];
    const ColumnAction& a = plan.actions[i];
    const TokenRegion region = a.kind == ActionKind::kConstrain
                                   ? a.region
                                   : TokenRegion::Range(0, col.domain - 1ull);
    plan.programs.push_back(translate_predicate(region, col.factorization));
  }
  plan.full_join_size = dataset.full_join_size();
  return plan;
}

namespace {

// Index of the digit within `digits` at which the running mass first
// exceeds u; falls back to the last digit with positive probability.
uint32_t draw_digit(const DigitSet& digits, const Eigen::MatrixXd& p, Eigen::Index row, double u) {
  double acc = 0.0;
  uint32_t last = digits.intervals.front().first;
  for (const auto& [lo, hi] : digits.intervals) {
    for (uint32_t d = lo; d <= hi; ++d) {
      const double q = p(row, d);
      if (q <= 0.0) continue;
      acc += q;
      last = d;
      if (u < acc) return d;
    }
  }
  return last;
}

double digit_mass(const DigitSet& digits, const Eigen::MatrixXd& p, Eigen::Index row) {
  double mass = 0.0;
  for (const auto& [lo, hi] : digits.intervals) {
    mass += p.row(row).segment(lo, static_cast<Eigen::Index>(hi) - lo + 1).sum();
  }
  return mass;
}

void gather(const PrefixMatrix& from, const std::vector<size_t>& rows, PrefixMatrix& to) {
  to.resize(static_cast<Eigen::Index>(rows.size()), from.cols());
  for (size_t k = 0; k < rows.size(); ++k) {
    to.row(static_cast<Eigen::Index>(k)) = from.row(static_cast<Eigen::Index>(rows[k]));
  }
}

double monte_carlo(const InferencePlan& plan, const DensityBackend& backend,
                   const EstimateOptions& options) {
  const ModelLayout& layout = backend.layout();
  const auto n = static_cast<Eigen::Index>(options.samples);
  const bool wild = options.use_wildcards && backend.supports_wildcards();
  PrefixMatrix prefix = PrefixMatrix::Constant(n, static_cast<Eigen::Index>(layout.sub_count()), kWildcard);
  std::vector<double> weight(options.samples, 1.0);
  std::vector<uint64_t> partial(options.samples);
  std::vector<char> covered(options.samples);
  std::vector<size_t> active;
  PrefixMatrix rows;
  Eigen::MatrixXd p;
  Rng rng(derive_seed(options.seed, {0x657374ull}));

  for (size_t i = 0; i < layout.logical_count(); ++i) {
    const LogicalColumn& col = layout.columns()[i];
    const ActionKind kind = plan.actions[i].kind;
    if (kind == ActionKind::kSkip && wild) continue;
    const SubcolumnProgram& program = plan.programs[i];
    std::fill(partial.begin(), partial.end(), 0);
    std::fill(covered.begin(), covered.end(), 0);
    for (uint32_t level = 0; level < col.sub_count; ++level) {
      active.clear();
      for (size_t s = 0; s < options.samples; ++s) {
        if (weight[s] > 0.0 && !(covered[s] && wild)) active.push_back(s);
      }
      if (active.empty()) break;
      const uint32_t sub = col.first_sub + level;
      gather(prefix, active, rows);
      backend.conditional(sub, rows, p);
      const uint32_t shift = col.factorization.shift(level);
      for (size_t k = 0; k < active.size(); ++k) {
        const size_t s = active[k];
        const auto row = static_cast<Eigen::Index>(k);
        const DigitSet digits = program.allowed(level, partial[s]);
        const double mass = digits.empty() ? 0.0 : digit_mass(digits, p, row);
        if (!(mass > 0.0)) {
          weight[s] = 0.0;
          continue;
        }
        if (kind == ActionKind::kConstrain && !covered[s]) weight[s] *= mass;
        const uint32_t d = draw_digit(digits, p, row, rng.uniform() * mass);
        prefix(static_cast<Eigen::Index>(s), sub) = static_cast<int32_t>(d);
        partial[s] += static_cast<uint64_t>(d) << shift;
        if (kind == ActionKind::kConstrain && program.covered(level, partial[s])) covered[s] = 1;
      }
    }
    if (kind == ActionKind::kDrawFanout) {
      for (size_t s = 0; s < options.samples; ++s) {
        if (weight[s] > 0.0) weight[s] /= static_cast<double>(col.fanout_values.at(partial[s]));
      }
    }
  }
  double sum = 0.0;
  for (double w : weight) sum += w;
  return options.samples == 0 ? 0.0 : sum / static_cast<double>(options.samples);
}

double exhaustive(const InferencePlan& plan, const DensityBackend& backend,
                  const EstimateOptions& options) {
  const ModelLayout& layout = backend.layout();
  const auto width = static_cast<Eigen::Index>(layout.sub_count());
  const bool wild = options.use_wildcards && backend.supports_wildcards();

  struct Branches {
    PrefixMatrix prefix;
    std::vector<double> weight;
    std::vector<uint64_t> partial;
    std::vector<char> covered;
  };
  Branches cur;
  cur.prefix = PrefixMatrix::Constant(1, width, kWildcard);
  cur.weight = {1.0};
  cur.partial = {0};
  cur.covered = {0};
  std::vector<size_t> active;
  PrefixMatrix rows;
  Eigen::MatrixXd p;

  for (size_t i = 0; i < layout.logical_count(); ++i) {
    const LogicalColumn& col = layout.columns()[i];
    const ActionKind kind = plan.actions[i].kind;
    if (kind == ActionKind::kSkip && wild) continue;
    const SubcolumnProgram& program = plan.programs[i];
    std::fill(cur.partial.begin(), cur.partial.end(), 0);
    std::fill(cur.covered.begin(), cur.covered.end(), 0);
    for (uint32_t level = 0; level < col.sub_count; ++level) {
      const size_t count = cur.weight.size();
      active.clear();
      for (size_t s = 0; s < count; ++s) {
        if (!(cur.covered[s] && wild)) active.push_back(s);
      }
      if (active.empty()) break;
      const uint32_t sub = col.first_sub + level;
      gather(cur.prefix, active, rows);
      backend.conditional(sub, rows, p);
      const uint32_t shift = col.factorization.shift(level);

      Branches next;
      std::vector<std::pair<size_t, int32_t>> origin;  // (source branch, digit or -1 to copy)
      std::vector<double> weights;
      size_t k = 0;
      for (size_t s = 0; s < count; ++s) {
        if (k < active.size() && active[k] == s) {
          const auto row = static_cast<Eigen::Index>(k++);
          const DigitSet digits = program.allowed(level, cur.partial[s]);
          const double mass = digits.empty() ? 0.0 : digit_mass(digits, p, row);
          if (!(mass > 0.0)) continue;
          const bool scale = !(kind == ActionKind::kConstrain && !cur.covered[s]);
          for (const auto& [lo, hi] : digits.intervals) {
            for (uint32_t d = lo; d <= hi; ++d) {
              const double q = p(row, d);
              if (q <= 0.0) continue;
              origin.emplace_back(s, static_cast<int32_t>(d));
              weights.push_back(cur.weight[s] * (scale ? q / mass : q));
            }
          }
        } else {
          origin.emplace_back(s, -1);
          weights.push_back(cur.weight[s]);
        }
        if (origin.size() > options.max_branches) {
          fail(ErrorCode::kTooLarge, "exhaustive evaluation exceeds the branch limit");
        }
      }
      next.prefix.resize(static_cast<Eigen::Index>(origin.size()), width);
      next.partial.resize(origin.size());
      next.covered.resize(origin.size());
      next.weight = std::move(weights);
      for (size_t b = 0; b < origin.size(); ++b) {
        const auto [s, d] = origin[b];
        next.prefix.row(static_cast<Eigen::Index>(b)) = cur.prefix.row(static_cast<Eigen::Index>(s));
        next.partial[b] = cur.partial[s];
        next.covered[b] = cur.covered[s];
        if (d < 0) continue;
        next.prefix(static_cast<Eigen::Index>(b), sub) = d;
        next.partial[b] += static_cast<uint64_t>(d) << shift;
        if (kind == ActionKind::kConstrain && program.covered(level, next.partial[b])) {
          next.covered[b] = 1;
        }
      }
      cur = std::move(next);
    }
    if (kind == ActionKind::kDrawFanout) {
      for (size_t s = 0; s < cur.weight.size(); ++s) {
        cur.weight[s] /= static_cast<double>(col.fanout_values.at(cur.partial[s]));
      }
    }
  }
  double sum = 0.0;
  for (double w : cur.weight) sum += w;
  return sum;
}

}  // namespace

Estimate estimate(const InferencePlan& plan, const DensityBackend& backend,
                  const EstimateOptions& options) {
  const ModelLayout& layout = backend.layout();
  if (plan.actions.size() != layout.logical_count() ||
      plan.programs.size() != layout.logical_count()) {
    fail(ErrorCode::kLayoutMismatch, "plan does not match backend layout");
  }
  Estimate e;
  e.seed = options.seed;
  if (options.exhaustive) {
    e.selectivity = exhaustive(plan, backend, options);
  } else {
    if (options.samples == 0) fail(ErrorCode::kInvalidArgument, "sample budget must be positive");
    e.samples = options.samples;
    e.selectivity = monte_carlo(plan, backend, options);
  }
  const double total = weight_to_double(plan.full_join_size);
  e.zero_mass = !(e.selectivity > 0.0);
  e.raw = e.selectivity * total;
  e.cardinality = std::max(1.0, std::min(e.raw, std::max(1.0, total)));
  return e;
}

std::vector<EstimateOutcome> estimate_batch(const Dataset& dataset, const DensityBackend& backend,
                                            const std::vector<QuerySpec>& queries,
                                            const EstimateOptions& options,
                                            std::optional<Weight> full_join_size) {
  std::vector<EstimateOutcome> out;
  out.reserve(queries.size());
  for (const auto& q : queries) {
    EstimateOutcome o;
    const auto start = std::chrono::steady_clock::now();
    try {
      InferencePlan plan = build_plan(dataset, backend.layout(), q);
      if (full_join_size) plan.full_join_size = *full_join_size;
      o.estimate = estimate(plan, backend, options);
    } catch (const Error& err) {
      o.status = Status{err.code(), err.what()};
    }
    o.latency_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    out.push_back(std::move(o));
  }
  return out;
}

}  // namespace arcard
