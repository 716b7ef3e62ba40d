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

#include <random>
#include <string>
#include <vector>

#include "cfx/encoding.hpp"
#include "cfx/feasibility.hpp"
#include "cfx/schema.hpp"
#include "cfx/table.hpp"

namespace cfx::testdata {

inline const std::string kDataDir = CFX_DATA_DIR;

struct Adult {
  DatasetSchema schema;
  RawTable table;
  EncodingState state;
};

inline const Adult& LoadAdult() {
  static const Adult adult = [] {
    Adult a;
    a.schema = LoadSchema(kDataDir + "/adult.schema.json");
    a.table = LoadAndClean(kDataDir + "/adult.csv", a.schema);
    a.state = FitEncoding(a.table, a.schema);
    return a;
  }();
  return adult;
}

inline Instance TableVInput() {
  return {{"age", 38.0},           {"hours_per_week", 40.0}, {"workclass", "private"},
          {"education", "hs_grad"}, {"marital_status", "single"}, {"occupation", "professional"},
          {"race", "white"},        {"gender", "male"}};
}

inline Instance TableVCounterfactual() {
  return {{"age", 43.55},            {"hours_per_week", 40.36}, {"workclass", "private"},
          {"education", "doctorate"}, {"marital_status", "married"}, {"occupation", "white_collar"},
          {"race", "white"},          {"gender", "male"}};
}

// Uniform random schema-valid instance.
inline Instance RandomInstance(const EncodingState& state, std::mt19937_64& rng) {
  Instance inst;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (const auto& f : state.features()) {
    if (f.kind == FeatureKind::kContinuous) {
      inst[f.name] = f.min + u(rng) * (f.max - f.min);
    } else {
      std::uniform_int_distribution<std::size_t> pick(0, f.vocabulary.size() - 1);
      inst[f.name] = f.vocabulary[pick(rng)];
    }
  }
  return inst;
}

// Copy of `x` with each feature independently kept (p = 0.4) or redrawn;
// continuous redraws are local perturbations, sometimes exactly zero.
inline Instance Perturb(const Instance& x, const EncodingState& state, std::mt19937_64& rng) {
  Instance cf = x;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (const auto& f : state.features()) {
    if (u(rng) < 0.4) continue;
    if (f.kind == FeatureKind::kContinuous) {
      const double span = f.max - f.min;
      const double v = std::get<double>(x.at(f.name)) + (u(rng) - 0.4) * 0.3 * span;
      cf[f.name] = std::clamp(v, f.min, f.max);
    } else {
      std::uniform_int_distribution<std::size_t> pick(0, f.vocabulary.size() - 1);
      cf[f.name] = f.vocabulary[pick(rng)];
    }
  }
  return cf;
}

// Random batch of results built from instance pairs with random classes.
inline std::vector<CFResult> RandomResults(const DatasetSchema& schema, const EncodingState& state,
                                           std::size_t n, std::mt19937_64& rng) {
  std::vector<CFResult> out;
  std::bernoulli_distribution coin(0.5);
  for (std::size_t i = 0; i < n; ++i) {
    const Instance x = RandomInstance(state, rng);
    const Instance cf = Perturb(x, state, rng);
    const int input_class = coin(rng) ? 1 : 0;
    const int cf_class = coin(rng) ? 1 : 0;
    CFResult r = MakeResult(schema, state, Encode(x, state), Encode(cf, state), input_class, cf_class,
                            1 - input_class);
    r.input = x;
    r.cf = cf;
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace cfx::testdata
