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

#include "arcard/layout.hpp"

#include <algorithm>
#include <set>

#include "json.hpp"

namespace arcard {

using nlohmann::json;

ModelLayout ModelLayout::Build(const Dataset& dataset, FactorizationSpec spec) {
  const Dataset* one[] = {&dataset};
  return Build(dataset.schema(), one, spec);
}

ModelLayout ModelLayout::Build(const JoinSchema& schema, std::span<const Dataset* const> datasets,
                               FactorizationSpec spec) {
  if (datasets.empty()) fail(ErrorCode::kInvalidArgument, "layout needs at least one dataset");
  const Dataset& first = *datasets.front();
  for (const Dataset* ds : datasets) {
    if (ds->schema().table_count() != schema.table_count() ||
        ds->dictionary_digest() != first.dictionary_digest()) {
      fail(ErrorCode::kLayoutMismatch, "datasets do not share dictionaries");
    }
  }

  ModelLayout layout;
  layout.spec_ = spec;
  for (uint32_t t = 0; t < schema.table_count(); ++t) {
    const TableDef& def = schema.table(t);
    for (uint32_t c = 0; c < def.columns.size(); ++c) {
      LogicalColumn col;
      col.kind = LogicalKind::kContent;
      col.ref = {t, c};
      col.name = def.name + "." + def.columns[c].name;
      col.domain = first.dictionary({t, c}).domain();
      layout.columns_.push_back(std::move(col));
    }
  }
  for (uint32_t t = 0; t < schema.table_count(); ++t) {
    LogicalColumn col;
    col.kind = LogicalKind::kIndicator;
    col.ref = {t, 0};
    col.name = "__in_" + schema.table(t).name;
    col.domain = 2;
    layout.columns_.push_back(std::move(col));
  }
  for (uint32_t t = 0; t < schema.table_count(); ++t) {
    for (uint32_t c : schema.edge_columns(t)) {
      std::set<uint64_t> values{1};
      for (const Dataset* ds : datasets) {
        const KeyIndex& index = ds->indexes().at({t, c});
        for (Token v = 1; v < index.domain(); ++v) {
          const uint64_t f = index.fanout(v);
          if (f > 0) values.insert(f);
        }
      }
      LogicalColumn col;
      col.kind = LogicalKind::kFanout;
      col.ref = {t, c};
      col.name = "__fanout_" + schema.qualified_name({t, c});
      col.fanout_values.assign(values.begin(), values.end());
      col.domain = static_cast<uint32_t>(col.fanout_values.size());
      layout.columns_.push_back(std::move(col));
    }
  }
  layout.finish();
  return layout;
}

void ModelLayout::finish() {
  subcolumns_.clear();
  content_index_.clear();
  fanout_index_.clear();
  indicator_index_.clear();
  for (uint32_t i = 0; i < columns_.size(); ++i) {
    LogicalColumn& col = columns_[i];
    col.factorization = ColumnFactorization::Make(col.domain, spec_.bits);
    col.first_sub = static_cast<uint32_t>(subcolumns_.size());
    col.sub_count = col.factorization.digits;
    for (uint32_t level = 0; level < col.sub_count; ++level) {
      subcolumns_.push_back({i, level, col.factorization.sub_domains[level]});
    }
    switch (col.kind) {
      case LogicalKind::kContent:
        content_index_[col.ref] = i;
        break;
      case LogicalKind::kIndicator:
        if (indicator_index_.size() <= col.ref.table) indicator_index_.resize(col.ref.table + 1);
        indicator_index_[col.ref.table] = i;
        break;
      case LogicalKind::kFanout:
        fanout_index_[col.ref] = i;
        break;
    }
  }
}

uint32_t ModelLayout::content_column(ColumnRef ref) const {
  auto it = content_index_.find(ref);
  if (it == content_index_.end()) fail(ErrorCode::kLayoutMismatch, "no such content column");
  return it->second;
}

uint32_t ModelLayout::indicator_column(uint32_t table) const {
  if (table >= indicator_index_.size()) fail(ErrorCode::kLayoutMismatch, "no such indicator");
  return indicator_index_[table];
}

uint32_t ModelLayout::fanout_column(ColumnRef key) const {
  auto it = fanout_index_.find(key);
  if (it == fanout_index_.end()) fail(ErrorCode::kLayoutMismatch, "no fanout column for key");
  return it->second;
}

Token ModelLayout::fanout_token(uint32_t logical, uint64_t value) const {
  const auto& values = columns_.at(logical).fanout_values;
  auto it = std::lower_bound(values.begin(), values.end(), value);
  if (it == values.end() || *it != value) {
    fail(ErrorCode::kLayoutMismatch, "fanout value " + std::to_string(value) + " unseen by " +
                                         columns_[logical].name);
  }
  return static_cast<Token>(it - values.begin());
}

void ModelLayout::factorize_row(std::span<const Token> logical, std::span<int32_t> out) const {
  if (logical.size() != columns_.size() || out.size() != subcolumns_.size()) {
    fail(ErrorCode::kLayoutMismatch, "row width does not match layout");
  }
  for (size_t i = 0; i < columns_.size(); ++i) {
    const LogicalColumn& col = columns_[i];
    if (logical[i] >= col.domain) {
      fail(ErrorCode::kTokenOutOfRange, "token outside domain of " + col.name);
    }
    if (col.sub_count == 1) {
      out[col.first_sub] = static_cast<int32_t>(logical[i]);
      continue;
    }
    const uint32_t mask = (1u << col.factorization.bits) - 1;
    for (uint32_t level = 0; level < col.sub_count; ++level) {
      out[col.first_sub + level] =
          static_cast<int32_t>((logical[i] >> col.factorization.shift(level)) & mask);
    }
  }
}

std::vector<Token> ModelLayout::defactorize_row(std::span<const int32_t> subs) const {
  if (subs.size() != subcolumns_.size()) fail(ErrorCode::kLayoutMismatch, "row width mismatch");
  std::vector<Token> out(columns_.size());
  std::vector<uint32_t> digits;
  for (size_t i = 0; i < columns_.size(); ++i) {
    const LogicalColumn& col = columns_[i];
    digits.clear();
    for (uint32_t level = 0; level < col.sub_count; ++level) {
      const int32_t d = subs[col.first_sub + level];
      if (d < 0) fail(ErrorCode::kSubtokenOutOfRange, "wildcard in a concrete row");
      digits.push_back(static_cast<uint32_t>(d));
    }
    out[i] = defactorize(digits, col.factorization);
  }
  return out;
}

namespace {

std::string_view kind_name(LogicalKind k) {
  switch (k) {
    case LogicalKind::kContent: return "content";
    case LogicalKind::kIndicator: return "indicator";
    case LogicalKind::kFanout: return "fanout";
  }
  return "?";
}

}  // namespace

std::string ModelLayout::to_json() const {
  json doc;
  doc["bits"] = spec_.bits;
  doc["columns"] = json::array();
  for (const auto& col : columns_) {
    json c;
    c["kind"] = kind_name(col.kind);
    c["table"] = col.ref.table;
    c["column"] = col.ref.column;
    c["name"] = col.name;
    c["domain"] = col.domain;
    if (col.kind == LogicalKind::kFanout) c["fanout_values"] = col.fanout_values;
    doc["columns"].push_back(std::move(c));
  }
  return doc.dump();
}

ModelLayout ModelLayout::FromJson(std::string_view text) {
  ModelLayout layout;
  try {
    const json doc = json::parse(text);
    layout.spec_.bits = doc.at("bits").get<uint32_t>();
    for (const auto& c : doc.at("columns")) {
      LogicalColumn col;
      const std::string kind = c.at("kind").get<std::string>();
      if (kind == "content") {
        col.kind = LogicalKind::kContent;
      } else if (kind == "indicator") {
        col.kind = LogicalKind::kIndicator;
      } else if (kind == "fanout") {
        col.kind = LogicalKind::kFanout;
        col.fanout_values = c.at("fanout_values").get<std::vector<uint64_t>>();
      } else {
        fail(ErrorCode::kCorruptCheckpoint, "unknown column kind '" + kind + "'");
      }
      col.ref = {c.at("table").get<uint32_t>(), c.at("column").get<uint32_t>()};
      col.name = c.at("name").get<std::string>();
      col.domain = c.at("domain").get<uint32_t>();
      if (col.domain == 0 ||
          (col.kind == LogicalKind::kFanout && col.fanout_values.size() != col.domain)) {
        fail(ErrorCode::kCorruptCheckpoint, "inconsistent column " + col.name);
      }
      layout.columns_.push_back(std::move(col));
    }
  } catch (const json::exception& e) {
    fail(ErrorCode::kCorruptCheckpoint, std::string("bad layout: ") + e.what());
  }
  layout.finish();
  return layout;
}

bool ModelLayout::operator==(const ModelLayout& other) const {
  if (spec_.bits != other.spec_.bits || columns_.size() != other.columns_.size()) return false;
  for (size_t i = 0; i < columns_.size(); ++i) {
    const auto& a = columns_[i];
    const auto& b = other.columns_[i];
    if (a.kind != b.kind || a.ref != b.ref || a.name != b.name || a.domain != b.domain ||
        a.fanout_values != b.fanout_values) {
      return false;
    }
  }
  return true;
}

}  // namespace arcard
