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

#include <string>
#include <vector>

#include "cfx/error.hpp"
#include "cfx/nn.hpp"
#include "json.hpp"

namespace cfx {

// {"name", "shape": [out, in], "weight": [...row-major...], "bias": [...]}
inline nlohmann::json LayerToJson(const nn::LinearLayer& layer) {
  return {{"name", layer.name()},
          {"shape", {layer.out_dim(), layer.in_dim()}},
          {"weight", layer.weight().data()},
          {"bias", layer.bias()}};
}

inline nn::LinearLayer LayerFromJson(const nlohmann::json& j, std::size_t expect_in,
                                     std::size_t expect_out) {
  try {
    const auto shape = j.at("shape").get<std::vector<std::size_t>>();
    const std::string name = j.at("name").get<std::string>();
    if (shape.size() != 2 || shape[0] != expect_out || shape[1] != expect_in) {
      throw BundleError("layer '" + name + "' has shape incompatible with the architecture (expected " +
                        std::to_string(expect_out) + "x" + std::to_string(expect_in) + ")");
    }
    nn::LinearLayer layer(name, expect_in, expect_out);
    auto weight = j.at("weight").get<std::vector<double>>();
    auto bias = j.at("bias").get<std::vector<double>>();
    if (weight.size() != expect_in * expect_out || bias.size() != expect_out) {
      throw BundleError("layer '" + name + "' has the wrong number of weights");
    }
    layer.weight() = Matrix(expect_out, expect_in, std::move(weight));
    layer.bias() = std::move(bias);
    return layer;
  } catch (const nlohmann::json::exception& e) {
    throw BundleError(std::string("malformed layer: ") + e.what());
  }
}

}  // namespace cfx
