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

// Invertible mapping between raw tabular instances and model vectors:
// continuous features are min-max scaled to [0, 1], categorical features are
// one-hot encoded, binary features map to {0, 1}. Layout follows schema order.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "cfx/error.hpp"
#include "cfx/matrix.hpp"
#include "cfx/schema.hpp"
#include "cfx/table.hpp"
#include "json.hpp"

namespace cfx {

// Continuous features hold a double, categorical and binary ones a string.
using Value = std::variant<double, std::string>;
using Instance = std::map<std::string, Value>;

struct FeatureEncoding {
  std::string name;
  FeatureKind kind = FeatureKind::kContinuous;
  bool immutable = false;
  std::size_t offset = 0;
  std::size_t width = 1;
  // Continuous only, raw units.
  double min = 0.0;
  double max = 1.0;
  // Categorical: one-hot order. Binary: {value encoded as 0, value encoded as 1}.
  std::vector<std::string> vocabulary;
  // Categorical with ordinal ranks: rank of each vocabulary entry.
  std::vector<int> ranks;

  bool has_ranks() const { return !ranks.empty(); }

  std::optional<std::size_t> VocabIndex(const std::string& value) const {
    auto it = std::find(vocabulary.begin(), vocabulary.end(), value);
    if (it == vocabulary.end()) return std::nullopt;
    return static_cast<std::size_t>(it - vocabulary.begin());
  }

  // Rank of a vocabulary entry scaled to [0, 1].
  double NormalizedRank(std::size_t vocab_index) const {
    if (ranks.size() <= 1) return 0.0;
    return static_cast<double>(ranks[vocab_index]) / static_cast<double>(ranks.size() - 1);
  }

  double Normalize(double raw) const { return (std::clamp(raw, min, max) - min) / (max - min); }
  double Denormalize(double v) const { return min + v * (max - min); }
};

class EncodingState {
 public:
  EncodingState() = default;
  explicit EncodingState(std::vector<FeatureEncoding> features) : features_(std::move(features)) {
    width_ = 0;
    for (auto& f : features_) {
      f.offset = width_;
      width_ += f.width;
    }
  }

  const std::vector<FeatureEncoding>& features() const { return features_; }
  std::size_t width() const { return width_; }

  std::optional<std::size_t> FindFeature(const std::string& name) const {
    for (std::size_t i = 0; i < features_.size(); ++i) {
      if (features_[i].name == name) return i;
    }
    return std::nullopt;
  }

  const FeatureEncoding& Feature(const std::string& name) const {
    auto idx = FindFeature(name);
    if (!idx) throw SchemaError("encoding has no feature '" + name + "'");
    return features_[*idx];
  }

 private:
  std::vector<FeatureEncoding> features_;
  std::size_t width_ = 0;
};

struct EncodedDataset {
  Matrix matrix;
  std::vector<int> labels;
  EncodingState encoding;

  std::size_t size() const { return labels.size(); }
};

inline std::optional<double> ParseNumber(std::string_view s) {
  double v = 0.0;
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

// Vocabularies are in first-appearance order over the (cleaned) table.
inline EncodingState FitEncoding(const RawTable& table, const DatasetSchema& schema) {
  std::vector<FeatureEncoding> encodings;
  for (const auto& spec : schema.features) {
    const std::size_t col = table.ColumnIndex(spec.name);
    FeatureEncoding enc;
    enc.name = spec.name;
    enc.kind = spec.kind;
    enc.immutable = spec.immutable;
    if (table.rows.empty()) throw DataError("cannot fit an encoding on an empty table");
    if (spec.kind == FeatureKind::kContinuous) {
      enc.min = INFINITY;
      enc.max = -INFINITY;
      for (std::size_t r = 0; r < table.rows.size(); ++r) {
        auto v = ParseNumber(table.rows[r][col]);
        if (!v) {
          throw DataError("column '" + spec.name + "' row " + std::to_string(r) +
                          ": not a number: '" + table.rows[r][col] + "'");
        }
        enc.min = std::min(enc.min, *v);
        enc.max = std::max(enc.max, *v);
      }
      if (!(enc.max > enc.min)) {
        throw DataError("continuous feature '" + spec.name + "' is constant");
      }
      enc.width = 1;
    } else {
      for (const auto& row : table.rows) {
        if (std::find(enc.vocabulary.begin(), enc.vocabulary.end(), row[col]) == enc.vocabulary.end()) {
          enc.vocabulary.push_back(row[col]);
        }
      }
      if (spec.kind == FeatureKind::kBinary) {
        if (enc.vocabulary.size() != 2) {
          throw DataError("binary feature '" + spec.name + "' has " +
                          std::to_string(enc.vocabulary.size()) + " distinct values");
        }
        enc.width = 1;
      } else {
        enc.width = enc.vocabulary.size();
        if (spec.ordinal_ranks) {
          const auto& order = *spec.ordinal_ranks;
          std::vector<std::string> a = order;
          std::vector<std::string> b = enc.vocabulary;
          std::sort(a.begin(), a.end());
          std::sort(b.begin(), b.end());
          if (a != b) {
            throw SchemaError("ordinal_ranks of '" + spec.name +
                              "' are not a permutation of the observed categories");
          }
          for (const auto& v : enc.vocabulary) {
            enc.ranks.push_back(static_cast<int>(std::find(order.begin(), order.end(), v) - order.begin()));
          }
        }
      }
    }
    encodings.push_back(std::move(enc));
  }
  return EncodingState(std::move(encodings));
}

namespace detail {

inline void EncodeValue(const FeatureEncoding& f, const Value& value, std::span<double> out,
                        std::vector<FieldError>& errors) {
  if (f.kind == FeatureKind::kContinuous) {
    const double* v = std::get_if<double>(&value);
    if (v == nullptr || !std::isfinite(*v)) {
      errors.push_back({f.name, "expected a finite number"});
      return;
    }
    out[f.offset] = f.Normalize(*v);
    return;
  }
  const std::string* s = std::get_if<std::string>(&value);
  if (s == nullptr) {
    errors.push_back({f.name, "expected a string category"});
    return;
  }
  auto idx = f.VocabIndex(*s);
  if (!idx) {
    errors.push_back({f.name, "unknown category '" + *s + "'"});
    return;
  }
  if (f.kind == FeatureKind::kBinary) {
    out[f.offset] = static_cast<double>(*idx);
  } else {
    for (std::size_t k = 0; k < f.width; ++k) out[f.offset + k] = k == *idx ? 1.0 : 0.0;
  }
}

}  // namespace detail

// Out-of-range continuous values are clamped to the fitted [min, max].
inline std::vector<double> Encode(const Instance& instance, const EncodingState& state) {
  std::vector<double> out(state.width(), 0.0);
  std::vector<FieldError> errors;
  for (const auto& f : state.features()) {
    auto it = instance.find(f.name);
    if (it == instance.end()) {
      errors.push_back({f.name, "missing"});
      continue;
    }
    detail::EncodeValue(f, it->second, out, errors);
  }
  for (const auto& [name, value] : instance) {
    if (!state.FindFeature(name)) errors.push_back({name, "not a schema feature"});
  }
  if (!errors.empty()) throw ValidationError(std::move(errors));
  return out;
}

// Row cells are in schema feature order (as produced by CleanTable).
inline Instance InstanceFromRow(std::span<const std::string> cells, const EncodingState& state) {
  if (cells.size() < state.features().size()) throw ShapeError("row has too few cells");
  Instance inst;
  for (std::size_t i = 0; i < state.features().size(); ++i) {
    const auto& f = state.features()[i];
    if (f.kind == FeatureKind::kContinuous) {
      auto v = ParseNumber(cells[i]);
      if (!v) throw DataError("column '" + f.name + "': not a number: '" + cells[i] + "'");
      inst[f.name] = *v;
    } else {
      inst[f.name] = cells[i];
    }
  }
  return inst;
}

inline EncodedDataset EncodeTable(const RawTable& table, const DatasetSchema& schema,
                                  const EncodingState& state) {
  EncodedDataset ds;
  ds.encoding = state;
  ds.matrix = Matrix(table.rows.size(), state.width());
  ds.labels.resize(table.rows.size());
  const std::size_t target_col = table.ColumnIndex(schema.target_name);
  std::vector<std::size_t> cols;
  for (const auto& f : state.features()) cols.push_back(table.ColumnIndex(f.name));
  std::vector<std::string> cells(cols.size());
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    for (std::size_t i = 0; i < cols.size(); ++i) cells[i] = table.rows[r][cols[i]];
    const auto v = Encode(InstanceFromRow(cells, state), state);
    std::copy(v.begin(), v.end(), ds.matrix.row(r).begin());
    ds.labels[r] = table.rows[r][target_col] == schema.positive_class ? 1 : 0;
  }
  return ds;
}

// Continuous columns are de-normalized, one-hot groups decoded by argmax
// (first maximum wins), binary columns thresholded at 0.5.
inline Instance Decode(std::span<const double> v, const EncodingState& state) {
  if (v.size() != state.width()) {
    throw ShapeError("decode: vector width " + std::to_string(v.size()) + " != encoded width " +
                     std::to_string(state.width()));
  }
  Instance inst;
  for (const auto& f : state.features()) {
    switch (f.kind) {
      case FeatureKind::kContinuous:
        inst[f.name] = f.Denormalize(v[f.offset]);
        break;
      case FeatureKind::kBinary:
        inst[f.name] = f.vocabulary[v[f.offset] >= 0.5 ? 1 : 0];
        break;
      case FeatureKind::kCategorical: {
        const auto group = v.subspan(f.offset, f.width);
        const auto best = std::max_element(group.begin(), group.end()) - group.begin();
        inst[f.name] = f.vocabulary[static_cast<std::size_t>(best)];
        break;
      }
    }
  }
  return inst;
}

inline nlohmann::json ValueToJson(const Value& v) {
  if (const double* d = std::get_if<double>(&v)) return *d;
  return std::get<std::string>(v);
}

inline std::string ValueToString(const Value& v) {
  if (const double* d = std::get_if<double>(&v)) {
    return nlohmann::json(*d).dump();
  }
  return std::get<std::string>(v);
}

inline nlohmann::json InstanceToJson(const Instance& inst) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [name, value] : inst) j[name] = ValueToJson(value);
  return j;
}

// Builds and validates an instance; all problems are reported together.
inline Instance InstanceFromJson(const nlohmann::json& j, const EncodingState& state) {
  std::vector<FieldError> errors;
  Instance inst;
  if (!j.is_object()) throw ValidationError(std::vector<FieldError>{{"instance", "expected a JSON object"}});
  for (const auto& f : state.features()) {
    if (!j.contains(f.name)) {
      errors.push_back({f.name, "missing"});
      continue;
    }
    const auto& v = j.at(f.name);
    if (f.kind == FeatureKind::kContinuous) {
      std::optional<double> d;
      if (v.is_number()) d = v.get<double>();
      if (v.is_string()) d = ParseNumber(v.get<std::string>());
      if (!d || !std::isfinite(*d)) {
        errors.push_back({f.name, "expected a finite number"});
        continue;
      }
      inst[f.name] = *d;
      continue;
    }
    std::string s;
    if (v.is_string()) {
      s = v.get<std::string>();
    } else if (v.is_number_integer()) {
      s = std::to_string(v.get<long long>());
    } else {
      errors.push_back({f.name, "expected a category string"});
      continue;
    }
    if (!f.VocabIndex(s)) {
      errors.push_back({f.name, "unknown category '" + s + "'"});
      continue;
    }
    inst[f.name] = s;
  }
  for (const auto& [key, _] : j.items()) {
    if (!state.FindFeature(key)) errors.push_back({key, "not a schema feature"});
  }
  if (!errors.empty()) throw ValidationError(std::move(errors));
  return inst;
}

struct DatasetSplit {
  EncodedDataset train;
  EncodedDataset validation;
  EncodedDataset test;
  std::vector<std::size_t> train_rows;
  std::vector<std::size_t> validation_rows;
  std::vector<std::size_t> test_rows;
};

inline EncodedDataset SubsetRows(const EncodedDataset& ds, std::span<const std::size_t> rows) {
  EncodedDataset out;
  out.encoding = ds.encoding;
  out.matrix = SelectRows(ds.matrix, rows);
  out.labels.reserve(rows.size());
  for (std::size_t r : rows) out.labels.push_back(ds.labels[r]);
  return out;
}

// Shuffled 80/10/10 partition: floor(0.8 n) train, floor(0.1 n) validation,
// remainder test. Deterministic for a given seed.
inline DatasetSplit Split(const EncodedDataset& ds, std::uint64_t seed) {
  const std::size_t n = ds.size();
  if (n < 10) throw DataError("need at least 10 rows to split, got " + std::to_string(n));
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  const std::size_t n_train = n * 8 / 10;
  const std::size_t n_val = n / 10;
  DatasetSplit split;
  split.train_rows.assign(order.begin(), order.begin() + n_train);
  split.validation_rows.assign(order.begin() + n_train, order.begin() + n_train + n_val);
  split.test_rows.assign(order.begin() + n_train + n_val, order.end());
  split.train = SubsetRows(ds, split.train_rows);
  split.validation = SubsetRows(ds, split.validation_rows);
  split.test = SubsetRows(ds, split.test_rows);
  return split;
}

inline nlohmann::json EncodingToJson(const EncodingState& state) {
  nlohmann::json features = nlohmann::json::array();
  for (const auto& f : state.features()) {
    nlohmann::json fj = {{"name", f.name}, {"kind", ToString(f.kind)}, {"immutable", f.immutable}};
    if (f.kind == FeatureKind::kContinuous) {
      fj["min"] = f.min;
      fj["max"] = f.max;
    } else {
      fj["vocabulary"] = f.vocabulary;
    }
    if (f.has_ranks()) fj["ranks"] = f.ranks;
    features.push_back(std::move(fj));
  }
  return {{"features", features}, {"width", state.width()}};
}

inline EncodingState EncodingFromJson(const nlohmann::json& j) {
  std::vector<FeatureEncoding> features;
  try {
    for (const auto& fj : j.at("features")) {
      FeatureEncoding f;
      f.name = fj.at("name").get<std::string>();
      f.kind = ParseFeatureKind(fj.at("kind").get<std::string>());
      f.immutable = fj.at("immutable").get<bool>();
      if (f.kind == FeatureKind::kContinuous) {
        f.min = fj.at("min").get<double>();
        f.max = fj.at("max").get<double>();
        if (!(f.max > f.min)) throw SchemaError("encoding of '" + f.name + "' has max <= min");
        f.width = 1;
      } else {
        f.vocabulary = fj.at("vocabulary").get<std::vector<std::string>>();
        if (f.vocabulary.empty()) throw SchemaError("encoding of '" + f.name + "' has no vocabulary");
        f.width = f.kind == FeatureKind::kBinary ? 1 : f.vocabulary.size();
      }
      if (fj.contains("ranks")) f.ranks = fj.at("ranks").get<std::vector<int>>();
      features.push_back(std::move(f));
    }
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("malformed encoding: ") + e.what());
  }
  EncodingState state(std::move(features));
  if (j.contains("width") && j.at("width").get<std::size_t>() != state.width()) {
    throw SchemaError("encoding width does not match its features");
  }
  return state;
}

}  // namespace cfx
