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

#include "arcard/store.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>

namespace arcard {

std::string value_to_string(const Value& v) {
  if (const auto* i = std::get_if<int64_t>(&v)) return std::to_string(*i);
  return std::get<std::string>(v);
}

// ---------------------------------------------------------------------------
// Dictionary

Dictionary Dictionary::FromValues(ValueType type, std::vector<Value> values) {
  Dictionary dict(type);
  if (type == ValueType::kInteger) {
    dict.ints_.reserve(values.size());
    for (auto& v : values) {
      const auto* i = std::get_if<int64_t>(&v);
      if (!i) fail(ErrorCode::kTypeParseError, "string value in integer dictionary");
      dict.ints_.push_back(*i);
    }
    std::sort(dict.ints_.begin(), dict.ints_.end());
    dict.ints_.erase(std::unique(dict.ints_.begin(), dict.ints_.end()), dict.ints_.end());
  } else {
    dict.strings_.reserve(values.size());
    for (auto& v : values) {
      auto* s = std::get_if<std::string>(&v);
      if (!s) fail(ErrorCode::kTypeParseError, "integer value in string dictionary");
      dict.strings_.push_back(std::move(*s));
    }
    std::sort(dict.strings_.begin(), dict.strings_.end());
    dict.strings_.erase(std::unique(dict.strings_.begin(), dict.strings_.end()),
                        dict.strings_.end());
  }
  return dict;
}

std::optional<Token> Dictionary::find(const Value& v) const {
  if (type_ == ValueType::kInteger) {
    const auto* i = std::get_if<int64_t>(&v);
    if (!i) return std::nullopt;
    auto it = std::lower_bound(ints_.begin(), ints_.end(), *i);
    if (it == ints_.end() || *it != *i) return std::nullopt;
    return static_cast<Token>(it - ints_.begin() + 1);
  }
  const auto* s = std::get_if<std::string>(&v);
  if (!s) return std::nullopt;
  auto it = std::lower_bound(strings_.begin(), strings_.end(), *s);
  if (it == strings_.end() || *it != *s) return std::nullopt;
  return static_cast<Token>(it - strings_.begin() + 1);
}

std::optional<Value> Dictionary::decode(Token t) const {
  if (t == kNullToken) return std::nullopt;
  if (t > value_count()) {
    fail(ErrorCode::kTokenOutOfRange, "token " + std::to_string(t) + " outside dictionary");
  }
  if (type_ == ValueType::kInteger) return Value{ints_[t - 1]};
  return Value{strings_[t - 1]};
}

uint32_t Dictionary::count_less(const Value& v) const {
  if (type_ == ValueType::kInteger) {
    return static_cast<uint32_t>(
        std::lower_bound(ints_.begin(), ints_.end(), std::get<int64_t>(v)) - ints_.begin());
  }
  return static_cast<uint32_t>(
      std::lower_bound(strings_.begin(), strings_.end(), std::get<std::string>(v)) -
      strings_.begin());
}

uint32_t Dictionary::count_less_equal(const Value& v) const {
  if (type_ == ValueType::kInteger) {
    return static_cast<uint32_t>(
        std::upper_bound(ints_.begin(), ints_.end(), std::get<int64_t>(v)) - ints_.begin());
  }
  return static_cast<uint32_t>(
      std::upper_bound(strings_.begin(), strings_.end(), std::get<std::string>(v)) -
      strings_.begin());
}

// ---------------------------------------------------------------------------
// CSV

namespace {

struct CsvField {
  std::string text;
  bool quoted = false;
};

// Splits `text` into records. Handles quoted fields spanning lines and
// doubled quotes; accepts LF and CRLF line ends.
class CsvParser {
 public:
  explicit CsvParser(std::string_view text) : text_(text) {}

  // False at end of input.
  bool next(std::vector<CsvField>& record) {
    record.clear();
    if (pos_ >= text_.size()) return false;
    CsvField field;
    bool in_quotes = false;
    bool field_started = false;
    while (pos_ < text_.size()) {
      const char c = text_[pos_++];
      if (in_quotes) {
        if (c == '"') {
          if (pos_ < text_.size() && text_[pos_] == '"') {
            field.text.push_back('"');
            ++pos_;
          } else {
            in_quotes = false;
          }
        } else {
          field.text.push_back(c);
        }
        continue;
      }
      if (c == '"' && !field_started) {
        in_quotes = true;
        field.quoted = true;
        field_started = true;
      } else if (c == ',') {
        record.push_back(std::move(field));
        field = CsvField{};
        field_started = false;
      } else if (c == '\n' || c == '\r') {
        if (c == '\r' && pos_ < text_.size() && text_[pos_] == '\n') ++pos_;
        record.push_back(std::move(field));
        ++line_;
        return true;
      } else {
        field.text.push_back(c);
        field_started = true;
      }
    }
    if (in_quotes) fail(ErrorCode::kTypeParseError, "unterminated quoted field at end of file");
    record.push_back(std::move(field));
    ++line_;
    return true;
  }

  size_t line() const { return line_; }

 private:
  std::string_view text_;
  size_t pos_ = 0;
  size_t line_ = 0;
};

std::optional<Value> parse_cell(const CsvField& field, const ColumnDef& column,
                                const std::string& table, size_t line) {
  if (field.text.empty() && !field.quoted) return std::nullopt;
  if (column.value_type == ValueType::kString) return Value{field.text};
  int64_t parsed = 0;
  const char* begin = field.text.data();
  const char* end = begin + field.text.size();
  auto [ptr, ec] = std::from_chars(begin, end, parsed);
  if (ec != std::errc() || ptr != end) {
    fail(ErrorCode::kTypeParseError, table + "." + column.name + " line " + std::to_string(line) +
                                         ": '" + field.text + "' is not an integer");
  }
  return Value{parsed};
}

}  // namespace

TableStore make_table(const TableDef& table, const std::vector<RawRow>& rows) {
  const size_t ncols = table.columns.size();
  TableStore store;
  store.name = table.name;
  store.columns.assign(ncols, std::vector<Token>(rows.size(), kNullToken));
  store.dictionaries.reserve(ncols);
  for (size_t c = 0; c < ncols; ++c) {
    std::vector<Value> values;
    values.reserve(rows.size());
    for (const auto& row : rows) {
      if (row.size() != ncols) {
        fail(ErrorCode::kMissingColumn, "row width does not match table '" + table.name + "'");
      }
      if (row[c]) values.push_back(*row[c]);
    }
    store.dictionaries.push_back(Dictionary::FromValues(table.columns[c].value_type, std::move(values)));
    const Dictionary& dict = store.dictionaries.back();
    for (size_t r = 0; r < rows.size(); ++r) {
      if (rows[r][c]) store.columns[c][r] = *dict.find(*rows[r][c]);
    }
  }
  return store;
}

TableStore parse_table_csv(std::string_view text, const TableDef& table) {
  CsvParser parser(text);
  std::vector<CsvField> record;
  if (!parser.next(record)) {
    fail(ErrorCode::kMissingColumn, "CSV for '" + table.name + "' has no header row");
  }
  // Header position of each declared column.
  std::vector<size_t> position(table.columns.size());
  for (size_t c = 0; c < table.columns.size(); ++c) {
    auto it = std::find_if(record.begin(), record.end(),
                           [&](const CsvField& f) { return f.text == table.columns[c].name; });
    if (it == record.end()) {
      fail(ErrorCode::kMissingColumn,
           "CSV for '" + table.name + "' lacks column '" + table.columns[c].name + "'");
    }
    position[c] = static_cast<size_t>(it - record.begin());
  }
  const size_t width = record.size();
  std::vector<RawRow> rows;
  while (parser.next(record)) {
    if (record.size() == 1 && record[0].text.empty() && !record[0].quoted) continue;  // blank line
    if (record.size() != width) {
      fail(ErrorCode::kTypeParseError, table.name + " line " + std::to_string(parser.line()) +
                                           ": expected " + std::to_string(width) + " fields, got " +
                                           std::to_string(record.size()));
    }
    RawRow row(table.columns.size());
    for (size_t c = 0; c < table.columns.size(); ++c) {
      row[c] = parse_cell(record[position[c]], table.columns[c], table.name, parser.line());
    }
    rows.push_back(std::move(row));
  }
  return make_table(table, rows);
}

TableStore load_table(const std::filesystem::path& path, const TableDef& table) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::kIoError, "cannot open " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  if (in.bad()) fail(ErrorCode::kIoError, "read failed on " + path.string());
  return parse_table_csv(buffer.str(), table);
}

void unify_join_dictionaries(const JoinSchema& schema, std::vector<TableStore>& stores) {
  if (stores.size() != schema.table_count()) {
    fail(ErrorCode::kSchemaMismatch, "store count does not match schema");
  }
  // Union-find over joined columns.
  std::map<ColumnRef, ColumnRef> parent;
  auto find = [&](ColumnRef x) {
    parent.try_emplace(x, x);
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (const auto& link : schema.links()) {
    ColumnRef a{link.parent, link.parent_column};
    ColumnRef b{link.child, link.child_column};
    auto ra = find(a);
    auto rb = find(b);
    if (ra != rb) parent[rb] = ra;
  }
  std::map<ColumnRef, std::vector<ColumnRef>> classes;
  for (const auto& [col, _] : parent) classes[find(col)].push_back(col);

  for (const auto& [_, members] : classes) {
    const ValueType type = schema.column(members.front()).value_type;
    std::vector<Value> values;
    for (const auto& m : members) {
      const Dictionary& d = stores[m.table].dictionaries.at(m.column);
      if (type == ValueType::kInteger) {
        for (auto v : d.int_values()) values.emplace_back(v);
      } else {
        for (const auto& v : d.string_values()) values.emplace_back(v);
      }
    }
    Dictionary merged = Dictionary::FromValues(type, std::move(values));
    for (const auto& m : members) {
      TableStore& store = stores[m.table];
      const Dictionary& old = store.dictionaries[m.column];
      std::vector<Token> remap(old.domain(), kNullToken);
      for (Token t = 1; t < old.domain(); ++t) remap[t] = *merged.find(*old.decode(t));
      for (Token& t : store.columns[m.column]) t = remap[t];
      store.dictionaries[m.column] = merged;
    }
  }
}

// ---------------------------------------------------------------------------
// KeyIndex

KeyIndex KeyIndex::Build(const TableStore& store, uint32_t column) {
  KeyIndex index;
  index.column_ = column;
  const auto& tokens = store.columns.at(column);
  const uint32_t domain = store.dictionaries.at(column).domain();
  index.offsets_.assign(static_cast<size_t>(domain) + 1, 0);
  for (Token t : tokens) {
    if (t != kNullToken) ++index.offsets_[t + 1];
  }
  std::partial_sum(index.offsets_.begin(), index.offsets_.end(), index.offsets_.begin());
  index.rows_.resize(index.offsets_.back());
  // Fill each list from its end; offsets_[t + 1] walks back to list start t.
  for (uint32_t r = static_cast<uint32_t>(tokens.size()); r-- > 0;) {
    if (tokens[r] != kNullToken) index.rows_[--index.offsets_[tokens[r] + 1]] = r;
  }
  std::rotate(index.offsets_.begin(), index.offsets_.begin() + 1, index.offsets_.end());
  index.offsets_.back() = index.rows_.size();
  return index;
}

std::span<const uint32_t> KeyIndex::postings(Token t) const {
  if (t == kNullToken || t + 1 >= offsets_.size()) return {};
  return {rows_.data() + offsets_[t], static_cast<size_t>(offsets_[t + 1] - offsets_[t])};
}

uint64_t KeyIndex::fanout(Token t) const {
  if (t == kNullToken) return 1;
  return postings(t).size();
}

}  // namespace arcard
