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

// Constraint checks on decoded instances and per-pair change statistics.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "cfx/encoding.hpp"
#include "cfx/error.hpp"
#include "cfx/schema.hpp"

namespace cfx {

// Continuous features count as changed above this normalized difference.
inline constexpr double kChangeThreshold = 1e-3;

// Relative slack below which two raw values count as equal in constraint checks.
inline constexpr double kFeasibilityTolerance = 1e-9;

namespace detail {

inline const Value& Lookup(const Instance& inst, const std::string& name) {
  const auto it = inst.find(name);
  if (it == inst.end()) throw DataError("instance has no value for '" + name + "'");
  return it->second;
}

inline double Numeric(const Instance& inst, const std::string& name) {
  const Value& v = Lookup(inst, name);
  if (const double* d = std::get_if<double>(&v)) return *d;
  throw DataError("feature '" + name + "' is not numeric");
}

// Ordinal position of a feature's value: the raw number for continuous
// features, the ordinal rank for ranked categorical features.
inline double OrdinalValue(const DatasetSchema& schema, const Instance& inst, const std::string& name) {
  const FeatureSpec& f = schema.Feature(name);
  if (f.kind == FeatureKind::kContinuous) return Numeric(inst, name);
  if (!f.ordinal_ranks) throw SchemaError("feature '" + name + "' has no ordinal ranks");
  const Value& v = Lookup(inst, name);
  const std::string* s = std::get_if<std::string>(&v);
  if (!s) throw DataError("feature '" + name + "' is not categorical");
  const auto& ranks = *f.ordinal_ranks;
  const auto it = std::find(ranks.begin(), ranks.end(), *s);
  if (it == ranks.end()) throw DataError("'" + *s + "' is not ranked for feature '" + name + "'");
  return static_cast<double>(it - ranks.begin());
}

// Sign of b - a, with differences at floating-point noise level counted as 0.
inline int CompareWithTolerance(double a, double b) {
  const double slack = kFeasibilityTolerance * std::max({1.0, std::abs(a), std::abs(b)});
  if (b > a + slack) return 1;
  if (b < a - slack) return -1;
  return 0;
}

}  // namespace detail

inline bool CheckConstraint(const DatasetSchema& schema, const Instance& input, const Instance& cf,
                            const ConstraintSpec& spec) {
  if (spec.is_unary()) {
    const auto& u = spec.unary();
    const int d = detail::CompareWithTolerance(detail::Numeric(input, u.feature), detail::Numeric(cf, u.feature));
    return u.direction == UnaryDirection::kNonDecrease ? d >= 0 : d <= 0;
  }
  const auto& b = spec.binary();
  const int cause = detail::CompareWithTolerance(detail::OrdinalValue(schema, input, b.cause_feature),
                                                 detail::OrdinalValue(schema, cf, b.cause_feature));
  const int effect = detail::CompareWithTolerance(detail::Numeric(input, b.effect_feature),
                                                  detail::Numeric(cf, b.effect_feature));
  if (cause > 0) return effect > 0;
  if (cause == 0) return effect >= 0;
  return false;
}

struct ConstraintFlag {
  std::string label;
  ConstraintKind kind = ConstraintKind::kUnary;
  bool feasible = false;
};

struct PairComparison {
  double cont_l1 = 0.0;
  int cat_changes = 0;
  int sparsity = 0;
  std::vector<std::string> changed_features;
};

// Compares two encoded vectors feature by feature (normalized units).
inline PairComparison ComparePair(const EncodingState& state, std::span<const double> x,
                                  std::span<const double> cf) {
  if (x.size() != state.width() || cf.size() != state.width()) {
    throw ShapeError("comparison expects width " + std::to_string(state.width()));
  }
  PairComparison out;
  for (const auto& f : state.features()) {
    bool changed = false;
    switch (f.kind) {
      case FeatureKind::kContinuous: {
        const double d = std::abs(cf[f.offset] - x[f.offset]);
        out.cont_l1 += d;
        changed = d > kChangeThreshold;
        break;
      }
      case FeatureKind::kBinary:
        changed = (x[f.offset] >= 0.5) != (cf[f.offset] >= 0.5);
        break;
      case FeatureKind::kCategorical: {
        const auto a = x.subspan(f.offset, f.width);
        const auto b = cf.subspan(f.offset, f.width);
        changed = std::max_element(a.begin(), a.end()) - a.begin() !=
                  std::max_element(b.begin(), b.end()) - b.begin();
        if (changed) ++out.cat_changes;
        break;
      }
    }
    if (changed) {
      ++out.sparsity;
      out.changed_features.push_back(f.name);
    }
  }
  return out;
}

struct CFResult {
  Instance input;
  std::vector<double> input_vector;
  Instance cf;
  std::vector<double> cf_vector;
  int input_class = 0;
  int cf_class = 0;
  int desired_class = 1;
  std::vector<ConstraintFlag> feasible;
  int sparsity_count = 0;
  double cont_l1 = 0.0;
  int cat_changes = 0;
  std::vector<std::string> changed_features;

  bool valid() const { return cf_class == desired_class; }

  // True when every constraint of the given kind holds (vacuously if none).
  bool FeasibleFor(ConstraintKind kind) const {
    return std::all_of(feasible.begin(), feasible.end(),
                       [&](const ConstraintFlag& f) { return f.kind != kind || f.feasible; });
  }
};

inline CFResult MakeResult(const DatasetSchema& schema, const EncodingState& state,
                           std::vector<double> input_vector, std::vector<double> cf_vector,
                           int input_class, int cf_class, int desired_class) {
  CFResult r;
  r.input = Decode(input_vector, state);
  r.cf = Decode(cf_vector, state);
  r.input_vector = std::move(input_vector);
  r.cf_vector = std::move(cf_vector);
  r.input_class = input_class;
  r.cf_class = cf_class;
  r.desired_class = desired_class;
  for (const auto& c : schema.constraints) {
    r.feasible.push_back({c.label(), c.kind(),
                          CheckConstraint(schema, r.input, r.cf, c)});
  }
  auto cmp = ComparePair(state, r.input_vector, r.cf_vector);
  r.sparsity_count = cmp.sparsity;
  r.cont_l1 = cmp.cont_l1;
  r.cat_changes = cmp.cat_changes;
  r.changed_features = std::move(cmp.changed_features);
  return r;
}

}  // namespace cfx
