// Copyright 2026 The cfx Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <algorithm>
#include <cstddef>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "cfx/error.hpp"
#include "cfx/schema.hpp"

namespace cfx {

// String cells as read from a CSV file.
struct RawTable {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;
  // Data rows present in the file and rows removed by cleaning.
  std::size_t rows_read = 0;
  std::size_t rows_dropped = 0;

  std::size_t ColumnIndex(const std::string& name) const {
    auto it = std::find(columns.begin(), columns.end(), name);
    if (it == columns.end()) throw DataError("missing required column '" + name + "'");
    return static_cast<std::size_t>(it - columns.begin());
  }
};

namespace detail {

inline std::string_view TrimAscii(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

}  // namespace detail

// RFC-4180 parsing: quoted fields may contain separators, doubled quotes and
// line breaks. Unquoted fields are trimmed of surrounding blanks. Blank lines
// are ignored.
inline std::vector<std::vector<std::string>> ParseCsv(std::string_view text) {
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> record;
  std::string field;
  bool in_quotes = false;
  bool was_quoted = false;
  auto end_field = [&] {
    record.push_back(was_quoted ? field : std::string(detail::TrimAscii(field)));
    field.clear();
    was_quoted = false;
  };
  auto end_record = [&] {
    end_field();
    if (!(record.size() == 1 && record[0].empty())) records.push_back(std::move(record));
    record.clear();
  };
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        field.push_back(c);
      }
      continue;
    }
    switch (c) {
      case '"':
        if (field.empty()) {
          in_quotes = true;
          was_quoted = true;
        } else {
          field.push_back(c);
        }
        break;
      case ',':
        end_field();
        break;
      case '\r':
        break;
      case '\n':
        end_record();
        break;
      default:
        field.push_back(c);
    }
  }
  if (in_quotes) throw DataError("CSV ends inside a quoted field");
  if (!field.empty() || !record.empty()) end_record();
  return records;
}

inline RawTable ReadCsv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read data file '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  auto records = ParseCsv(buffer.str());
  if (records.empty()) throw DataError("data file '" + path + "' has no header row");
  RawTable table;
  table.columns = std::move(records.front());
  for (std::size_t i = 1; i < records.size(); ++i) {
    if (records[i].size() != table.columns.size()) {
      throw DataError("row " + std::to_string(i) + " has " + std::to_string(records[i].size()) +
                      " fields, header has " + std::to_string(table.columns.size()));
    }
    table.rows.push_back(std::move(records[i]));
  }
  table.rows_read = table.rows.size();
  return table;
}

// Projects the table onto the schema columns (features in schema order, then
// the target) and drops every row with a missing cell in any of them.
inline RawTable CleanTable(const RawTable& raw, const DatasetSchema& schema) {
  std::vector<std::size_t> source;
  RawTable out;
  for (const auto& f : schema.features) {
    source.push_back(raw.ColumnIndex(f.name));
    out.columns.push_back(f.name);
  }
  source.push_back(raw.ColumnIndex(schema.target_name));
  out.columns.push_back(schema.target_name);

  auto is_missing = [&](const std::string& cell) {
    return std::find(schema.missing_values.begin(), schema.missing_values.end(), cell) !=
               schema.missing_values.end() ||
           cell.empty();
  };
  out.rows_read = raw.rows.size();
  for (const auto& row : raw.rows) {
    std::vector<std::string> projected;
    projected.reserve(source.size());
    bool keep = true;
    for (std::size_t c : source) {
      if (is_missing(row[c])) {
        keep = false;
        break;
      }
      projected.push_back(row[c]);
    }
    if (keep) {
      out.rows.push_back(std::move(projected));
    } else {
      ++out.rows_dropped;
    }
  }
  return out;
}

inline RawTable LoadAndClean(const std::string& path, const DatasetSchema& schema) {
  return CleanTable(ReadCsv(path), schema);
}

}  // namespace cfx
