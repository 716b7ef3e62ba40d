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

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <span>
#include <string>

#include "cfx/encoding.hpp"
#include "cfx/error.hpp"
#include "cfx/feasibility.hpp"
#include "cfx/schema.hpp"
#include "json.hpp"

namespace cfx {

enum class ProximityUnits { kNormalized, kRaw };

namespace detail {
inline void RequireResults(std::span<const CFResult> results, const char* metric) {
  if (results.empty()) throw Error(std::string(metric) + " needs at least one result");
}
}  // namespace detail

inline double ValidityPct(std::span<const CFResult> results) {
  detail::RequireResults(results, "validity");
  std::size_t ok = 0;
  for (const auto& r : results) ok += r.valid() ? 1 : 0;
  return 100.0 * static_cast<double>(ok) / static_cast<double>(results.size());
}

// Re-checks the constraint on the decoded instances of every result.
inline double FeasibilityPct(std::span<const CFResult> results, const DatasetSchema& schema,
                             const ConstraintSpec& spec) {
  detail::RequireResults(results, "feasibility");
  std::size_t ok = 0;
  for (const auto& r : results) ok += CheckConstraint(schema, r.input, r.cf, spec) ? 1 : 0;
  return 100.0 * static_cast<double>(ok) / static_cast<double>(results.size());
}

// Share of results satisfying every constraint of one kind; 100 when the
// schema has none of that kind.
inline double FeasibilityPct(std::span<const CFResult> results, const DatasetSchema& schema,
                             ConstraintKind kind) {
  detail::RequireResults(results, "feasibility");
  std::size_t ok = 0;
  for (const auto& r : results) {
    bool all = true;
    for (const auto& c : schema.constraints) {
      if (c.kind() == kind && !CheckConstraint(schema, r.input, r.cf, c)) {
        all = false;
        break;
      }
    }
    ok += all ? 1 : 0;
  }
  return 100.0 * static_cast<double>(ok) / static_cast<double>(results.size());
}

inline double ContinuousProximity(std::span<const CFResult> results, const EncodingState& state,
                                  ProximityUnits units = ProximityUnits::kNormalized) {
  detail::RequireResults(results, "continuous proximity");
  double total = 0.0;
  for (const auto& r : results) {
    for (const auto& f : state.features()) {
      if (f.kind != FeatureKind::kContinuous) continue;
      double d = std::abs(r.cf_vector.at(f.offset) - r.input_vector.at(f.offset));
      if (units == ProximityUnits::kRaw) d *= f.max - f.min;
      total += d;
    }
  }
  return -total / static_cast<double>(results.size());
}

inline double CategoricalProximity(std::span<const CFResult> results, const EncodingState& state) {
  detail::RequireResults(results, "categorical proximity");
  double total = 0.0;
  for (const auto& r : results) total += ComparePair(state, r.input_vector, r.cf_vector).cat_changes;
  return -total / static_cast<double>(results.size());
}

inline double SparsityMetric(std::span<const CFResult> results, const EncodingState& state) {
  detail::RequireResults(results, "sparsity");
  double total = 0.0;
  for (const auto& r : results) total += ComparePair(state, r.input_vector, r.cf_vector).sparsity;
  return total / static_cast<double>(results.size());
}

struct MetricsReport {
  double validity_pct = 0.0;
  double feasibility_unary_pct = 0.0;
  double feasibility_binary_pct = 0.0;
  double continuous_proximity = 0.0;
  double categorical_proximity = 0.0;
  double sparsity_mean = 0.0;
  std::size_t n = 0;
  std::string config_digest;

  bool operator==(const MetricsReport&) const = default;
};

inline MetricsReport ComputeReport(std::span<const CFResult> results, const DatasetSchema& schema,
                                   const EncodingState& state, std::string config_digest = {}) {
  MetricsReport m;
  m.validity_pct = ValidityPct(results);
  m.feasibility_unary_pct = FeasibilityPct(results, schema, ConstraintKind::kUnary);
  m.feasibility_binary_pct = FeasibilityPct(results, schema, ConstraintKind::kBinary);
  m.continuous_proximity = ContinuousProximity(results, state);
  m.categorical_proximity = CategoricalProximity(results, state);
  m.sparsity_mean = SparsityMetric(results, state);
  m.n = results.size();
  m.config_digest = std::move(config_digest);
  return m;
}

inline nlohmann::json ReportToJson(const MetricsReport& m) {
  return {{"validity_pct", m.validity_pct},
          {"feasibility_unary_pct", m.feasibility_unary_pct},
          {"feasibility_binary_pct", m.feasibility_binary_pct},
          {"continuous_proximity", m.continuous_proximity},
          {"categorical_proximity", m.categorical_proximity},
          {"sparsity_mean", m.sparsity_mean},
          {"n", m.n},
          {"config_digest", m.config_digest}};
}

inline MetricsReport ReportFromJson(const nlohmann::json& j) {
  try {
    MetricsReport m;
    m.validity_pct = j.at("validity_pct").get<double>();
    m.feasibility_unary_pct = j.at("feasibility_unary_pct").get<double>();
    m.feasibility_binary_pct = j.at("feasibility_binary_pct").get<double>();
    m.continuous_proximity = j.at("continuous_proximity").get<double>();
    m.categorical_proximity = j.at("categorical_proximity").get<double>();
    m.sparsity_mean = j.at("sparsity_mean").get<double>();
    m.n = j.at("n").get<std::size_t>();
    m.config_digest = j.at("config_digest").get<std::string>();
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("malformed report: ") + e.what());
  }
}

inline constexpr const char* kReportCsvHeader = "validity,feas_unary,feas_binary,cont_prox,cat_prox,sparsity,n";

inline std::string ReportCsv(const MetricsReport& m) {
  char line[256];
  std::snprintf(line, sizeof line, "%.4f,%.4f,%.4f,%.6f,%.6f,%.6f,%zu", m.validity_pct,
                m.feasibility_unary_pct, m.feasibility_binary_pct, m.continuous_proximity,
                m.categorical_proximity, m.sparsity_mean, m.n);
  return std::string(kReportCsvHeader) + "\n" + line + "\n";
}

namespace detail {
inline void WriteFile(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  out << content;
  if (!out.flush()) throw Error("failed writing '" + path.string() + "'");
}
}  // namespace detail

// Writes <base>.json and <base>.csv; a .json/.csv extension on `path` is dropped.
inline void EmitReport(const MetricsReport& m, std::filesystem::path path) {
  if (path.extension() == ".json" || path.extension() == ".csv") path.replace_extension();
  const auto dir = path.parent_path();
  if (!dir.empty()) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw Error("cannot create '" + dir.string() + "': " + ec.message());
  }
  auto json_path = path;
  json_path += ".json";
  auto csv_path = path;
  csv_path += ".csv";
  detail::WriteFile(json_path, ReportToJson(m).dump(2) + "\n");
  detail::WriteFile(csv_path, ReportCsv(m));
}

}  // namespace cfx
