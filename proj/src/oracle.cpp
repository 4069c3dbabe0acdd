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

#include "arcard/oracle.hpp"

#include <unordered_set>

namespace arcard {

MaterializedJoin materialize(const Dataset& dataset, const ModelLayout& layout, uint64_t cap) {
  if (dataset.full_join_size() > cap) {
    fail(ErrorCode::kTooLarge, "full join has " + weight_to_string(dataset.full_join_size()) +
                                   " rows, cap is " + std::to_string(cap));
  }
  const JoinSchema& schema = dataset.schema();
  const size_t n = schema.table_count();
  const uint32_t root = schema.root();

  std::vector<int32_t> cur;
  for (size_t r = 0; r < dataset.store(root).row_count(); ++r) {
    const size_t at = cur.size();
    cur.resize(at + n, -1);
    cur[at + root] = static_cast<int32_t>(r);
  }

  for (uint32_t t : schema.bfs_order()) {
    auto pl = schema.parent_link(t);
    if (!pl) continue;
    const auto& link = schema.links()[*pl];
    const auto& pcol = dataset.store(link.parent).columns[link.parent_column];
    const auto& ccol = dataset.store(t).columns[link.child_column];

    std::unordered_map<Token, std::vector<int32_t>> partners;
    for (size_t r = 0; r < ccol.size(); ++r) {
      if (ccol[r] != kNullToken) partners[ccol[r]].push_back(static_cast<int32_t>(r));
    }
    std::unordered_set<Token> parent_tokens(pcol.begin(), pcol.end());

    std::vector<int32_t> next;
    const size_t rows = cur.size() / n;
    for (size_t i = 0; i < rows; ++i) {
      const int32_t* row = cur.data() + i * n;
      const int32_t pr = row[link.parent];
      const Token v = pr >= 0 ? pcol[pr] : kNullToken;
      auto it = v == kNullToken ? partners.end() : partners.find(v);
      if (it == partners.end()) {
        next.insert(next.end(), row, row + n);
        continue;
      }
      for (int32_t c : it->second) {
        const size_t at = next.size();
        next.insert(next.end(), row, row + n);
        next[at + t] = c;
      }
      if (next.size() / n > cap) fail(ErrorCode::kTooLarge, "materialization exceeds cap");
    }
    for (size_t r = 0; r < ccol.size(); ++r) {
      if (ccol[r] == kNullToken || !parent_tokens.count(ccol[r])) {
        const size_t at = next.size();
        next.resize(at + n, -1);
        next[at + t] = static_cast<int32_t>(r);
      }
    }
    cur = std::move(next);
  }

  // Fanouts counted straight from the key columns.
  std::map<ColumnRef, std::vector<uint64_t>> occurrences;
  for (const auto& col : layout.columns()) {
    if (col.kind != LogicalKind::kFanout) continue;
    std::vector<uint64_t> counts(dataset.dictionary(col.ref).domain(), 0);
    for (Token v : dataset.store(col.ref.table).columns[col.ref.column]) ++counts[v];
    occurrences[col.ref] = std::move(counts);
  }

  MaterializedJoin out;
  out.table_count = n;
  out.table_rows = std::move(cur);
  out.rows.width = layout.logical_count();
  const size_t rows = out.table_rows.size() / n;
  out.rows.tokens.assign(rows * out.rows.width, 0);
  for (size_t i = 0; i < rows; ++i) {
    const int32_t* src = out.table_rows.data() + i * n;
    Token* dst = out.rows.tokens.data() + i * out.rows.width;
    for (uint32_t c = 0; c < layout.logical_count(); ++c) {
      const LogicalColumn& col = layout.columns()[c];
      const int32_t r = src[col.ref.table];
      switch (col.kind) {
        case LogicalKind::kContent:
          dst[c] = r >= 0 ? dataset.store(col.ref.table).columns[col.ref.column][r] : kNullToken;
          break;
        case LogicalKind::kIndicator:
          dst[c] = r >= 0 ? 1 : 0;
          break;
        case LogicalKind::kFanout: {
          const Token key =
              r >= 0 ? dataset.store(col.ref.table).columns[col.ref.column][r] : kNullToken;
          const uint64_t f = key == kNullToken ? 1 : occurrences[col.ref][key];
          dst[c] = layout.fanout_token(c, f);
          break;
        }
      }
    }
  }
  return out;
}

bool predicate_holds(const std::optional<Value>& cell, CompareOp op,
                     std::span<const Literal> literals) {
  if (!cell) return false;
  for (const auto& lit : literals) {
    if (lit.index() != cell->index()) {
      fail(ErrorCode::kBadLiteralType, "literal type does not match column type");
    }
  }
  const Value& v = *cell;
  switch (op) {
    case CompareOp::kLt: return v < literals[0];
    case CompareOp::kGt: return v > literals[0];
    case CompareOp::kLe: return v <= literals[0];
    case CompareOp::kGe: return v >= literals[0];
    case CompareOp::kEq: return v == literals[0];
    case CompareOp::kIn:
      for (const auto& lit : literals) {
        if (v == lit) return true;
      }
      return false;
  }
  return false;
}

Weight true_cardinality(const Dataset& dataset, const QuerySpec& query) {
  const JoinSchema& schema = dataset.schema();
  if (Status s = validate_query(schema, query); !s.ok()) fail(s.code, s.message);
  const std::vector<uint32_t> tables = query_table_indices(schema, query);
  std::vector<bool> in_query(schema.table_count(), false);
  for (uint32_t t : tables) in_query[t] = true;

  std::vector<std::vector<bool>> pass(schema.table_count());
  for (uint32_t t : tables) pass[t].assign(dataset.store(t).row_count(), true);
  for (const auto& p : query.predicates) {
    const ColumnRef ref = *schema.resolve(p.column);
    const auto& col = dataset.store(ref.table).columns[ref.column];
    const Dictionary& dict = dataset.dictionary(ref);
    for (size_t r = 0; r < col.size(); ++r) {
      if (pass[ref.table][r] && !predicate_holds(dict.decode(col[r]), p.op, p.literals)) {
        pass[ref.table][r] = false;
      }
    }
  }

  // Per query table, matches of its subtree keyed by the token toward its parent.
  std::vector<std::vector<Weight>> toward_parent(schema.table_count());
  Weight answer = 0;
  const auto& order = schema.bfs_order();
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    const uint32_t t = *it;
    if (!in_query[t]) continue;
    const TableStore& store = dataset.store(t);
    std::vector<Weight> per_row(store.row_count(), 0);
    for (size_t r = 0; r < store.row_count(); ++r) {
      if (!pass[t][r]) continue;
      Weight w = 1;
      for (uint32_t l : schema.child_links(t)) {
        const auto& link = schema.links()[l];
        if (!in_query[link.child]) continue;
        const Token v = store.columns[link.parent_column][r];
        w = v == kNullToken ? 0 : checked_mul(w, toward_parent[link.child][v]);
        if (w == 0) break;
      }
      per_row[r] = w;
    }
    auto pl = schema.parent_link(t);
    if (pl && in_query[schema.links()[*pl].parent]) {
      const auto& link = schema.links()[*pl];
      auto& acc = toward_parent[t];
      acc.assign(dataset.dictionary({t, link.child_column}).domain(), 0);
      for (size_t r = 0; r < store.row_count(); ++r) {
        const Token v = store.columns[link.child_column][r];
        if (v != kNullToken) acc[v] = checked_add(acc[v], per_row[r]);
      }
    } else {
      for (Weight w : per_row) answer = checked_add(answer, w);
    }
  }
  return answer;
}

// ---------------------------------------------------------------------------

size_t EmpiricalBackend::KeyHash::operator()(const std::vector<int32_t>& key) const {
  uint64_t h = 1469598103934665603ull ^ key.size();
  for (int32_t v : key) {
    h ^= static_cast<uint32_t>(v);
    h *= 1099511628211ull;
  }
  return static_cast<size_t>(h);
}

EmpiricalBackend::EmpiricalBackend(ModelLayout layout, const MaterializedJoin& join)
    : layout_(std::move(layout)) {
  if (join.rows.width != layout_.logical_count()) {
    fail(ErrorCode::kLayoutMismatch, "materialized join does not match layout");
  }
  const size_t width = layout_.sub_count();
  rows_.resize(static_cast<Eigen::Index>(join.size()), static_cast<Eigen::Index>(width));
  for (size_t r = 0; r < join.size(); ++r) {
    layout_.factorize_row(join.rows.row(r), std::span<int32_t>(rows_.data() + r * width, width));
  }
}

EmpiricalBackend::RowSet EmpiricalBackend::matching(const std::vector<int32_t>& key) const {
  {
    std::lock_guard lock(mu_);
    auto it = cache_.find(key);
    if (it != cache_.end()) return it->second;
  }
  RowSet result;
  if (key.empty()) {
    auto all = std::make_shared<std::vector<uint32_t>>(rows_.rows());
    for (uint32_t r = 0; r < all->size(); ++r) (*all)[r] = r;
    result = std::move(all);
  } else {
    const std::vector<int32_t> parent_key(key.begin(), key.end() - 1);
    RowSet parent = matching(parent_key);
    const int32_t v = key.back();
    if (v < 0) {
      result = parent;
    } else {
      auto filtered = std::make_shared<std::vector<uint32_t>>();
      const auto col = static_cast<Eigen::Index>(key.size() - 1);
      for (uint32_t r : *parent) {
        if (rows_(r, col) == v) filtered->push_back(r);
      }
      result = std::move(filtered);
    }
  }
  std::lock_guard lock(mu_);
  if (cache_.size() > 4'000'000) cache_.clear();
  cache_.emplace(key, result);
  return result;
}

void EmpiricalBackend::conditional(uint32_t sub, const PrefixMatrix& prefix,
                                   Eigen::MatrixXd& out) const {
  if (sub >= layout_.sub_count() || static_cast<size_t>(prefix.cols()) != layout_.sub_count()) {
    fail(ErrorCode::kLayoutMismatch, "prefix does not match layout");
  }
  out.setZero(prefix.rows(), layout_.subcolumns()[sub].domain);
  std::vector<int32_t> key(sub);
  for (Eigen::Index b = 0; b < prefix.rows(); ++b) {
    for (uint32_t c = 0; c < sub; ++c) key[c] = prefix(b, c) < 0 ? kWildcard : prefix(b, c);
    const RowSet rows = matching(key);
    if (rows->empty()) continue;
    for (uint32_t r : *rows) out(b, rows_(r, sub)) += 1.0;
    out.row(b) /= static_cast<double>(rows->size());
  }
}

}  // namespace arcard
