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

// Brute-force metric definitions over raw instances, written without the
// library's comparison helpers.

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "cfx/feasibility.hpp"
#include "cfx/schema.hpp"

namespace cfx::oracle {

struct Metrics {
  double validity = 0.0;
  double feas_unary = 0.0;
  double feas_binary = 0.0;
  double cont_prox = 0.0;
  double cat_prox = 0.0;
  double sparsity = 0.0;
};

inline int RankOf(const FeatureSpec& f, const std::string& v) {
  const auto& r = *f.ordinal_ranks;
  for (std::size_t i = 0; i < r.size(); ++i) {
    if (r[i] == v) return static_cast<int>(i);
  }
  return -1;
}

// Values within 1e-9 relative of each other are the same value.
inline double Snap(double from, double to) {
  return std::abs(to - from) <= 1e-9 * std::max({1.0, std::abs(from), std::abs(to)}) ? from : to;
}

inline bool Holds(const DatasetSchema& schema, const Instance& x, const Instance& cf,
                  const ConstraintSpec& c) {
  if (c.is_unary()) {
    const double a = std::get<double>(x.at(c.unary().feature));
    const double b = Snap(a, std::get<double>(cf.at(c.unary().feature)));
    return c.unary().direction == UnaryDirection::kNonDecrease ? b >= a : b <= a;
  }
  const auto& spec = c.binary();
  const FeatureSpec& cause = schema.Feature(spec.cause_feature);
  double r0, r1;
  if (cause.kind == FeatureKind::kContinuous) {
    r0 = std::get<double>(x.at(cause.name));
    r1 = std::get<double>(cf.at(cause.name));
  } else {
    r0 = RankOf(cause, std::get<std::string>(x.at(cause.name)));
    r1 = RankOf(cause, std::get<std::string>(cf.at(cause.name)));
  }
  const double e0 = std::get<double>(x.at(spec.effect_feature));
  const double e1 = Snap(e0, std::get<double>(cf.at(spec.effect_feature)));
  r1 = Snap(r0, r1);
  if (r1 > r0) return e1 > e0;
  if (r1 < r0) return false;
  return e1 >= e0;
}

inline Metrics Compute(const std::vector<CFResult>& results, const DatasetSchema& schema,
                       const EncodingState& state) {
  Metrics m;
  const double n = static_cast<double>(results.size());
  for (const auto& r : results) {
    if (r.cf_class == r.desired_class) m.validity += 100.0 / n;
    bool unary_ok = true, binary_ok = true;
    for (const auto& c : schema.constraints) {
      const bool ok = Holds(schema, r.input, r.cf, c);
      (c.is_unary() ? unary_ok : binary_ok) = (c.is_unary() ? unary_ok : binary_ok) && ok;
    }
    if (unary_ok) m.feas_unary += 100.0 / n;
    if (binary_ok) m.feas_binary += 100.0 / n;
    int changed = 0, cat = 0;
    double l1 = 0.0;
    for (const auto& f : schema.features) {
      if (f.kind == FeatureKind::kContinuous) {
        const auto& e = state.Feature(f.name);
        const double a = (std::get<double>(r.input.at(f.name)) - e.min) / (e.max - e.min);
        const double b = (std::get<double>(r.cf.at(f.name)) - e.min) / (e.max - e.min);
        l1 += std::abs(a - b);
        if (std::abs(a - b) > 1e-3) ++changed;
      } else if (std::get<std::string>(r.input.at(f.name)) != std::get<std::string>(r.cf.at(f.name))) {
        ++changed;
        if (f.kind == FeatureKind::kCategorical) ++cat;
      }
    }
    m.cont_prox -= l1 / n;
    m.cat_prox -= cat / n;
    m.sparsity += changed / n;
  }
  return m;
}

}  // namespace cfx::oracle
