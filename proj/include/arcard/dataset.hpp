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

#include <filesystem>
#include <vector>

#include "arcard/join_counts.hpp"
#include "arcard/schema.hpp"
#include "arcard/store.hpp"

namespace arcard {

// An ingested schema instance: encoded tables, key indexes and join counts.
// Immutable after construction.
class Dataset {
 public:
  Dataset() = default;

  // Loads every table's CSV (TableDef::file, relative to `data_dir`).
  static Dataset Ingest(JoinSchema schema, const std::filesystem::path& data_dir);
  static Dataset FromStores(JoinSchema schema, std::vector<TableStore> stores);

  const JoinSchema& schema() const { return schema_; }
  const std::vector<TableStore>& stores() const { return stores_; }
  const TableStore& store(uint32_t table) const { return stores_.at(table); }
  const Dictionary& dictionary(ColumnRef ref) const {
    return stores_.at(ref.table).dictionaries.at(ref.column);
  }
  const KeyIndexSet& indexes() const { return indexes_; }
  const JoinCounts& counts() const { return counts_; }
  Weight full_join_size() const { return counts_.full_join_size(); }

  // Digest of all dictionaries; models record it to detect foreign data.
  uint64_t dictionary_digest() const;

  // Snapshot of an append-only history: keeps the root rows flagged in
  // `keep_root_rows` and, walking down the tree, drops rows whose key toward
  // the root pointed only at dropped rows. Dictionaries are kept whole so
  // that token spaces stay stable across snapshots.
  Dataset RestrictRoot(const std::vector<bool>& keep_root_rows) const;

  void SaveSnapshot(const std::filesystem::path& path) const;
  static Dataset LoadSnapshot(const std::filesystem::path& path);

 private:
  JoinSchema schema_;
  std::vector<TableStore> stores_;
  KeyIndexSet indexes_;
  JoinCounts counts_;
};

}  // namespace arcard
