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

#include "arcard/dataset.hpp"

#include "arcard/binary_io.hpp"

namespace arcard {

namespace {

constexpr std::string_view kSnapshotMagic = "ARCSNAP1";
constexpr uint32_t kSnapshotVersion = 1;

}  // namespace

Dataset Dataset::Ingest(JoinSchema schema, const std::filesystem::path& data_dir) {
  std::vector<TableStore> stores;
  stores.reserve(schema.table_count());
  for (uint32_t t = 0; t < schema.table_count(); ++t) {
    const TableDef& def = schema.table(t);
    std::filesystem::path file = def.file.empty() ? def.name + ".csv" : def.file;
    if (file.is_relative()) file = data_dir / file;
    stores.push_back(load_table(file, def));
  }
  return FromStores(std::move(schema), std::move(stores));
}

Dataset Dataset::FromStores(JoinSchema schema, std::vector<TableStore> stores) {
  if (stores.size() != schema.table_count()) {
    fail(ErrorCode::kSchemaMismatch, "store count does not match schema");
  }
  for (uint32_t t = 0; t < stores.size(); ++t) {
    if (stores[t].columns.size() != schema.table(t).columns.size() ||
        stores[t].dictionaries.size() != schema.table(t).columns.size()) {
      fail(ErrorCode::kSchemaMismatch, "store for '" + schema.table(t).name + "' has wrong width");
    }
  }
  unify_join_dictionaries(schema, stores);
  Dataset ds;
  ds.schema_ = std::move(schema);
  ds.stores_ = std::move(stores);
  ds.indexes_ = KeyIndexSet::Build(ds.schema_, ds.stores_);
  ds.counts_ = JoinCounts::Compute(ds.schema_, ds.stores_, ds.indexes_);
  return ds;
}

uint64_t Dataset::dictionary_digest() const {
  uint64_t h = fnv1a64("arcard-dicts");
  for (const auto& store : stores_) {
    h = fnv1a64(store.name, h);
    for (const auto& dict : store.dictionaries) {
      BinaryWriter w;
      w.u8(dict.type() == ValueType::kInteger ? 0 : 1);
      w.u64(dict.value_count());
      for (int64_t v : dict.int_values()) w.i64(v);
      for (const auto& s : dict.string_values()) w.str(s);
      h = fnv1a64(w.data(), h);
    }
  }
  return h;
}

Dataset Dataset::RestrictRoot(const std::vector<bool>& keep_root_rows) const {
  const uint32_t root = schema_.root();
  if (keep_root_rows.size() != stores_[root].row_count()) {
    fail(ErrorCode::kInvalidArgument, "root row mask has wrong length");
  }
  std::vector<std::vector<bool>> keep(stores_.size());
  keep[root] = keep_root_rows;
  for (uint32_t t : schema_.bfs_order()) {
    auto p = schema_.parent_link(t);
    if (!p) continue;
    const auto& link = schema_.links()[*p];
    const TableStore& parent = stores_[link.parent];
    const uint32_t domain = parent.dictionaries[link.parent_column].domain();
    std::vector<uint8_t> present(domain, 0);  // 1: some parent row, 2: some kept parent row
    const auto& pcol = parent.columns[link.parent_column];
    for (size_t r = 0; r < pcol.size(); ++r) {
      if (pcol[r] == kNullToken) continue;
      present[pcol[r]] = std::max<uint8_t>(present[pcol[r]], keep[link.parent][r] ? 2 : 1);
    }
    const auto& ccol = stores_[t].columns[link.child_column];
    keep[t].resize(ccol.size());
    for (size_t r = 0; r < ccol.size(); ++r) {
      const Token v = ccol[r];
      keep[t][r] = v == kNullToken || v >= domain || present[v] != 1;
    }
  }

  std::vector<TableStore> stores;
  for (uint32_t t = 0; t < stores_.size(); ++t) {
    const TableStore& src = stores_[t];
    TableStore dst;
    dst.name = src.name;
    dst.dictionaries = src.dictionaries;
    dst.columns.resize(src.columns.size());
    for (size_t c = 0; c < src.columns.size(); ++c) {
      for (size_t r = 0; r < src.row_count(); ++r) {
        if (keep[t][r]) dst.columns[c].push_back(src.columns[c][r]);
      }
    }
    stores.push_back(std::move(dst));
  }
  return FromStores(schema_, std::move(stores));
}

// ---------------------------------------------------------------------------
// Snapshots

class SnapshotCodec {
 public:
  static std::string encode_index(const KeyIndex& index) {
    BinaryWriter w;
    w.u32(index.column_);
    w.array<uint64_t>(index.offsets_);
    w.array<uint32_t>(index.rows_);
    return w.take();
  }
  static KeyIndex decode_index(BinaryReader& r) {
    KeyIndex index;
    index.column_ = r.u32();
    index.offsets_ = r.array<uint64_t>();
    index.rows_ = r.array<uint32_t>();
    if (index.offsets_.empty() || index.offsets_.back() != index.rows_.size()) {
      fail(ErrorCode::kCorruptCheckpoint, "inconsistent key index");
    }
    return index;
  }
};

void Dataset::SaveSnapshot(const std::filesystem::path& path) const {
  std::vector<std::pair<std::string, std::string>> sections;
  sections.emplace_back("SCHM", schema_to_config(schema_.def()));

  BinaryWriter dict;
  BinaryWriter cols;
  BinaryWriter kidx;
  BinaryWriter jct;
  for (uint32_t t = 0; t < stores_.size(); ++t) {
    const TableStore& store = stores_[t];
    for (const auto& d : store.dictionaries) {
      dict.u8(d.type() == ValueType::kInteger ? 0 : 1);
      dict.u64(d.value_count());
      for (int64_t v : d.int_values()) dict.i64(v);
      for (const auto& s : d.string_values()) dict.str(s);
    }
    cols.u64(store.row_count());
    for (const auto& c : store.columns) cols.raw(c.data(), c.size() * sizeof(Token));

    const auto& by_column = indexes_.by_table[t];
    kidx.u32(static_cast<uint32_t>(by_column.size()));
    for (const auto& [_, index] : by_column) kidx.str(SnapshotCodec::encode_index(index));

    const JoinCountTable& table = counts_.table(t);
    jct.u64(table.weights.size());
    for (Weight w : table.weights) {
      jct.u64(static_cast<uint64_t>(w));
      jct.u64(static_cast<uint64_t>(w >> 64));
    }
    jct.u64(static_cast<uint64_t>(table.bridge_weight));
    jct.u64(static_cast<uint64_t>(table.bridge_weight >> 64));
  }
  sections.emplace_back("DICT", dict.take());
  sections.emplace_back("COLS", cols.take());
  sections.emplace_back("KIDX", kidx.take());
  sections.emplace_back("JCT ", jct.take());
  write_container(path, kSnapshotMagic, kSnapshotVersion, sections);
}

Dataset Dataset::LoadSnapshot(const std::filesystem::path& path) {
  constexpr ErrorCode kCorrupt = ErrorCode::kCorruptCheckpoint;
  Container c = read_container(path, kSnapshotMagic, kSnapshotVersion, kCorrupt);
  JoinSchema schema = JoinSchema::Build(parse_schema_config(c.section("SCHM", kCorrupt)));

  BinaryReader dict(c.section("DICT", kCorrupt), kCorrupt);
  BinaryReader cols(c.section("COLS", kCorrupt), kCorrupt);
  BinaryReader kidx(c.section("KIDX", kCorrupt), kCorrupt);
  BinaryReader jct(c.section("JCT ", kCorrupt), kCorrupt);

  Dataset ds;
  std::vector<std::vector<Weight>> weights;
  std::vector<Weight> bridges;
  ds.indexes_.by_table.resize(schema.table_count());
  for (uint32_t t = 0; t < schema.table_count(); ++t) {
    const TableDef& def = schema.table(t);
    TableStore store;
    store.name = def.name;
    for (size_t col = 0; col < def.columns.size(); ++col) {
      const ValueType type = dict.u8() == 0 ? ValueType::kInteger : ValueType::kString;
      if (type != def.columns[col].value_type) fail(kCorrupt, "dictionary type mismatch");
      const uint64_t n = dict.u64();
      std::vector<Value> values;
      for (uint64_t i = 0; i < n; ++i) {
        if (type == ValueType::kInteger) {
          values.emplace_back(dict.i64());
        } else {
          values.emplace_back(dict.str());
        }
      }
      store.dictionaries.push_back(Dictionary::FromValues(type, std::move(values)));
    }
    const uint64_t rows = cols.u64();
    if (rows > cols.remaining()) fail(kCorrupt, "truncated columns");
    for (size_t col = 0; col < def.columns.size(); ++col) {
      std::vector<Token> tokens(rows);
      cols.raw(tokens.data(), rows * sizeof(Token));
      const uint32_t domain = store.dictionaries[col].domain();
      for (Token tok : tokens) {
        if (tok >= domain) fail(kCorrupt, "token outside dictionary");
      }
      store.columns.push_back(std::move(tokens));
    }
    ds.stores_.push_back(std::move(store));

    const uint32_t nindex = kidx.u32();
    for (uint32_t i = 0; i < nindex; ++i) {
      const std::string blob = kidx.str();
      BinaryReader r(blob, kCorrupt);
      KeyIndex index = SnapshotCodec::decode_index(r);
      ds.indexes_.by_table[t].emplace(index.column(), std::move(index));
    }

    const uint64_t ngroups = jct.u64();
    if (ngroups > jct.remaining() / 16) fail(kCorrupt, "truncated join counts");
    std::vector<Weight> w(ngroups);
    for (auto& x : w) {
      const uint64_t lo = jct.u64();
      const uint64_t hi = jct.u64();
      x = (static_cast<Weight>(hi) << 64) | lo;
    }
    weights.push_back(std::move(w));
    const uint64_t lo = jct.u64();
    const uint64_t hi = jct.u64();
    bridges.push_back((static_cast<Weight>(hi) << 64) | lo);
  }
  dict.expect_done();
  cols.expect_done();
  kidx.expect_done();
  jct.expect_done();
  for (uint32_t t = 0; t < schema.table_count(); ++t) {
    for (uint32_t col : schema.edge_columns(t)) {
      if (!ds.indexes_.find({t, col})) fail(kCorrupt, "missing key index");
    }
  }
  ds.counts_ = JoinCounts::FromParts(schema, ds.stores_, std::move(weights), std::move(bridges));
  ds.schema_ = std::move(schema);
  return ds;
}

}  // namespace arcard
