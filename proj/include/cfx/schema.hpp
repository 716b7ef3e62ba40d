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

#include <cmath>
#include <cstddef>
#include <fstream>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "cfx/error.hpp"
#include "json.hpp"

namespace cfx {

enum class FeatureKind { kContinuous, kCategorical, kBinary };

inline const char* ToString(FeatureKind kind) {
  switch (kind) {
    case FeatureKind::kContinuous: return "continuous";
    case FeatureKind::kCategorical: return "categorical";
    case FeatureKind::kBinary: return "binary";
  }
  return "?";
}

inline FeatureKind ParseFeatureKind(const std::string& s) {
  if (s == "continuous") return FeatureKind::kContinuous;
  if (s == "categorical") return FeatureKind::kCategorical;
  if (s == "binary") return FeatureKind::kBinary;
  throw SchemaError("unknown feature kind '" + s + "'");
}

struct FeatureSpec {
  std::string name;
  FeatureKind kind = FeatureKind::kContinuous;
  bool immutable = false;
  // Lowest to highest. Required for categorical constraint causes.
  std::optional<std::vector<std::string>> ordinal_ranks;
};

enum class UnaryDirection { kNonDecrease, kNonIncrease };
enum class BinaryMode { kHinge, kLiteral };
enum class ConstraintKind { kUnary, kBinary };

inline std::string ToString(ConstraintKind k) { return k == ConstraintKind::kUnary ? "unary" : "binary"; }

inline ConstraintKind ParseConstraintKind(const std::string& s) {
  if (s == "unary") return ConstraintKind::kUnary;
  if (s == "binary") return ConstraintKind::kBinary;
  throw Error("constraint type must be 'unary' or 'binary', got '" + s + "'");
}

// x_cf >= x (or <= for kNonIncrease) on a single continuous feature.
struct UnaryConstraint {
  std::string feature;
  UnaryDirection direction = UnaryDirection::kNonDecrease;
};

// Increasing the cause (e.g. education rank) requires a strict increase of the
// effect (e.g. age); an unchanged cause requires a non-decreasing effect; a
// decreasing cause is never feasible. c1/c2 shape the training penalty only.
struct BinaryConstraint {
  std::string cause_feature;
  std::string effect_feature;
  double c1 = 0.0;
  double c2 = 0.1;
  BinaryMode mode = BinaryMode::kHinge;
};

struct ConstraintSpec {
  std::variant<UnaryConstraint, BinaryConstraint> rule;

  bool is_unary() const { return std::holds_alternative<UnaryConstraint>(rule); }
  bool is_binary() const { return std::holds_alternative<BinaryConstraint>(rule); }
  ConstraintKind kind() const { return is_unary() ? ConstraintKind::kUnary : ConstraintKind::kBinary; }
  const UnaryConstraint& unary() const { return std::get<UnaryConstraint>(rule); }
  const BinaryConstraint& binary() const { return std::get<BinaryConstraint>(rule); }
  std::string label() const {
    if (is_unary()) return "unary(" + unary().feature + ")";
    return "binary(" + binary().cause_feature + "->" + binary().effect_feature + ")";
  }
};

struct DatasetSchema {
  std::vector<FeatureSpec> features;
  std::string target_name;
  std::string positive_class;
  std::vector<ConstraintSpec> constraints;
  std::vector<std::string> missing_values = {"", "?", "NA"};

  std::optional<std::size_t> FindFeature(const std::string& name) const {
    for (std::size_t i = 0; i < features.size(); ++i) {
      if (features[i].name == name) return i;
    }
    return std::nullopt;
  }

  const FeatureSpec& Feature(const std::string& name) const {
    auto idx = FindFeature(name);
    if (!idx) throw SchemaError("no feature named '" + name + "'");
    return features[*idx];
  }

  std::size_t CountKind(FeatureKind kind) const {
    std::size_t n = 0;
    for (const auto& f : features) n += f.kind == kind ? 1 : 0;
    return n;
  }
};

// Checks every schema invariant; throws SchemaError describing the first
// violation.
inline void ValidateSchema(const DatasetSchema& schema) {
  if (schema.features.empty()) throw SchemaError("schema has no features");
  if (schema.target_name.empty()) throw SchemaError("schema target name is empty");
  std::set<std::string> names;
  for (const auto& f : schema.features) {
    if (f.name.empty()) throw SchemaError("feature with empty name");
    if (!names.insert(f.name).second) throw SchemaError("duplicate feature name '" + f.name + "'");
    if (f.ordinal_ranks) {
      if (f.kind != FeatureKind::kCategorical) {
        throw SchemaError("feature '" + f.name + "': ordinal_ranks only apply to categorical features");
      }
      std::set<std::string> ranks(f.ordinal_ranks->begin(), f.ordinal_ranks->end());
      if (ranks.size() != f.ordinal_ranks->size() || ranks.empty()) {
        throw SchemaError("feature '" + f.name + "': ordinal_ranks must be non-empty and distinct");
      }
    }
  }
  if (names.count(schema.target_name) != 0) {
    throw SchemaError("target '" + schema.target_name + "' is also listed as a feature");
  }
  auto require_continuous = [&](const std::string& name, const char* role) {
    auto idx = schema.FindFeature(name);
    if (!idx) throw SchemaError(std::string(role) + " references unknown feature '" + name + "'");
    if (schema.features[*idx].kind != FeatureKind::kContinuous) {
      throw SchemaError(std::string(role) + " feature '" + name + "' must be continuous");
    }
  };
  for (const auto& c : schema.constraints) {
    if (c.is_unary()) {
      require_continuous(c.unary().feature, "unary constraint");
      continue;
    }
    const auto& b = c.binary();
    require_continuous(b.effect_feature, "binary constraint effect");
    auto cause = schema.FindFeature(b.cause_feature);
    if (!cause) {
      throw SchemaError("binary constraint cause references unknown feature '" + b.cause_feature + "'");
    }
    const auto& cf = schema.features[*cause];
    if (cf.kind == FeatureKind::kCategorical && !cf.ordinal_ranks) {
      throw SchemaError("binary constraint cause '" + cf.name + "' is categorical but has no ordinal_ranks");
    }
    if (cf.kind == FeatureKind::kBinary) {
      throw SchemaError("binary constraint cause '" + cf.name + "' must be continuous or ranked categorical");
    }
    if (b.cause_feature == b.effect_feature) {
      throw SchemaError("binary constraint cause and effect must differ");
    }
    if (!std::isfinite(b.c1) || !std::isfinite(b.c2)) {
      throw SchemaError("binary constraint parameters must be finite");
    }
  }
}

namespace detail {

template <typename T>
T Required(const nlohmann::json& j, const char* key, const std::string& where) {
  if (!j.is_object() || !j.contains(key)) {
    throw SchemaError(where + ": missing required key '" + key + "'");
  }
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(where + ": bad value for '" + key + "': " + e.what());
  }
}

}  // namespace detail

inline ConstraintSpec ConstraintFromJson(const nlohmann::json& j) {
  const std::string type = detail::Required<std::string>(j, "type", "constraint");
  if (type == "unary") {
    UnaryConstraint u;
    u.feature = detail::Required<std::string>(j, "feature", "unary constraint");
    const std::string dir = j.value("direction", std::string("non_decrease"));
    if (dir == "non_decrease") {
      u.direction = UnaryDirection::kNonDecrease;
    } else if (dir == "non_increase") {
      u.direction = UnaryDirection::kNonIncrease;
    } else {
      throw SchemaError("unknown unary direction '" + dir + "'");
    }
    return {u};
  }
  if (type == "binary") {
    BinaryConstraint b;
    b.cause_feature = detail::Required<std::string>(j, "cause_feature", "binary constraint");
    b.effect_feature = detail::Required<std::string>(j, "effect_feature", "binary constraint");
    b.c1 = j.value("c1", 0.0);
    b.c2 = j.value("c2", 0.1);
    const std::string mode = j.value("mode", std::string("hinge"));
    if (mode == "hinge") {
      b.mode = BinaryMode::kHinge;
    } else if (mode == "literal") {
      b.mode = BinaryMode::kLiteral;
    } else {
      throw SchemaError("unknown binary constraint mode '" + mode + "'");
    }
    return {b};
  }
  throw SchemaError("unknown constraint type '" + type + "'");
}

inline nlohmann::json ConstraintToJson(const ConstraintSpec& c) {
  if (c.is_unary()) {
    return {{"type", "unary"},
            {"feature", c.unary().feature},
            {"direction", c.unary().direction == UnaryDirection::kNonDecrease ? "non_decrease"
                                                                              : "non_increase"}};
  }
  const auto& b = c.binary();
  return {{"type", "binary"},
          {"cause_feature", b.cause_feature},
          {"effect_feature", b.effect_feature},
          {"c1", b.c1},
          {"c2", b.c2},
          {"mode", b.mode == BinaryMode::kHinge ? "hinge" : "literal"}};
}

inline DatasetSchema SchemaFromJson(const nlohmann::json& j) {
  if (!j.is_object()) throw SchemaError("schema root must be an object");
  DatasetSchema schema;
  const auto features = detail::Required<nlohmann::json>(j, "features", "schema");
  if (!features.is_array()) throw SchemaError("schema: 'features' must be an array");
  for (const auto& fj : features) {
    FeatureSpec f;
    f.name = detail::Required<std::string>(fj, "name", "feature");
    f.kind = ParseFeatureKind(detail::Required<std::string>(fj, "kind", "feature '" + f.name + "'"));
    f.immutable = fj.value("immutable", false);
    if (fj.contains("ordinal_ranks") && !fj.at("ordinal_ranks").is_null()) {
      f.ordinal_ranks = detail::Required<std::vector<std::string>>(fj, "ordinal_ranks", "feature '" + f.name + "'");
    }
    schema.features.push_back(std::move(f));
  }
  const auto target = detail::Required<nlohmann::json>(j, "target", "schema");
  schema.target_name = detail::Required<std::string>(target, "name", "target");
  schema.positive_class = detail::Required<std::string>(target, "positive", "target");
  if (j.contains("constraints")) {
    if (!j.at("constraints").is_array()) throw SchemaError("schema: 'constraints' must be an array");
    for (const auto& cj : j.at("constraints")) schema.constraints.push_back(ConstraintFromJson(cj));
  }
  if (j.contains("missing_values")) {
    schema.missing_values = detail::Required<std::vector<std::string>>(j, "missing_values", "schema");
  }
  ValidateSchema(schema);
  return schema;
}

inline nlohmann::json SchemaToJson(const DatasetSchema& schema) {
  nlohmann::json features = nlohmann::json::array();
  for (const auto& f : schema.features) {
    nlohmann::json fj = {{"name", f.name}, {"kind", ToString(f.kind)}, {"immutable", f.immutable}};
    if (f.ordinal_ranks) fj["ordinal_ranks"] = *f.ordinal_ranks;
    features.push_back(std::move(fj));
  }
  nlohmann::json constraints = nlohmann::json::array();
  for (const auto& c : schema.constraints) constraints.push_back(ConstraintToJson(c));
  return {{"features", features},
          {"target", {{"name", schema.target_name}, {"positive", schema.positive_class}}},
          {"constraints", constraints},
          {"missing_values", schema.missing_values}};
}

inline DatasetSchema LoadSchema(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError("cannot open schema file '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw SchemaError("schema '" + path + "' is not valid JSON: " + e.what());
  }
  return SchemaFromJson(j);
}

}  // namespace cfx
