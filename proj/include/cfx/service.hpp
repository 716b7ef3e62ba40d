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

// Transport-independent handlers for the JSON API. Each request owns its
// generator; the bundle is never modified.

#include <cstdint>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <utility>

#include "cfx/pipeline.hpp"
#include "json.hpp"

namespace cfx {

struct ApiResponse {
  int status = 200;
  nlohmann::json body;
};

inline ApiResponse ApiError(int status, const std::string& message) { return {status, {{"error", message}}}; }

class Service {
 public:
  // `table` feeds the manifold endpoint; without it that endpoint answers 503.
  explicit Service(Bundle bundle, std::optional<RawTable> table = std::nullopt, int tsne_iterations = 1000)
      : bundle_(std::move(bundle)), table_(std::move(table)), tsne_iterations_(tsne_iterations) {}

  const Bundle& bundle() const { return bundle_; }

  ApiResponse Schema() const {
    nlohmann::json j = SchemaToJson(bundle_.schema);
    j["encoding"] = EncodingToJson(bundle_.encoding);
    j["active_constraint"] = ToString(bundle_.config.vae.constraint);
    return {200, j};
  }

  ApiResponse Predict(const std::string& body) const {
    return Guard([&] {
      const auto req = ParseBody(body);
      const auto inst = InstanceFromJson(Field(req, "instance"), bundle_.encoding);
      return ApiResponse{200, PredictionToJson(PredictInstance(bundle_, inst))};
    });
  }

  ApiResponse Counterfactuals(const std::string& body) const {
    return Guard([&] {
      const auto req = ParseBody(body);
      const auto inst = InstanceFromJson(Field(req, "instance"), bundle_.encoding);
      std::optional<int> desired;
      if (req.contains("desired_class") && !req.at("desired_class").is_null()) {
        desired = Integer<int>(req, "desired_class");
      }
      const int k = req.contains("k") ? Integer<int>(req, "k") : 1;
      const auto seed = req.contains("seed") ? Integer<std::uint64_t>(req, "seed") : 0;
      const auto results = GeneratePipeline(bundle_, inst, desired, k, seed);
      nlohmann::json out = nlohmann::json::array();
      for (const auto& r : results) out.push_back(CfResultToJson(r));
      return ApiResponse{200, {{"results", out}}};
    });
  }

  // n and seed arrive as raw query strings; absent means the default.
  ApiResponse Manifold(const std::optional<std::string>& n_text, const std::optional<std::string>& seed_text) {
    return Guard([&] {
      if (!table_) return ApiError(503, "manifold needs the training data; start the service with --data");
      const auto n = n_text ? ParseCount(*n_text, "n") : 500;
      const auto seed = seed_text ? ParseCount(*seed_text, "seed") : 0;
      if (n > kTsneMaxPoints) {
        return ApiError(400, "n = " + std::to_string(n) + " exceeds the embedding cap of " +
                                 std::to_string(kTsneMaxPoints));
      }
      std::lock_guard lock(cache_mutex_);
      auto it = cache_.find({n, seed});
      if (it == cache_.end()) {
        const auto points = EmbedPipeline(bundle_, *table_, n, seed, tsne_iterations_);
        it = cache_.emplace(std::make_pair(n, seed), ManifoldToJson(points)).first;
      }
      return ApiResponse{200, it->second};
    });
  }

 private:
  struct BadRequest : Error {
    using Error::Error;
  };

  template <typename F>
  static ApiResponse Guard(F&& f) {
    try {
      return f();
    } catch (const ValidationError& e) {
      nlohmann::json fields = nlohmann::json::array();
      for (const auto& fe : e.errors()) fields.push_back({{"field", fe.field}, {"message", fe.message}});
      return {400, {{"error", e.what()}, {"fields", fields}}};
    } catch (const BadRequest& e) {
      return ApiError(400, e.what());
    } catch (const NumericError& e) {
      return ApiError(500, e.what());
    } catch (const Error& e) {
      return ApiError(400, e.what());
    } catch (const std::exception& e) {
      return ApiError(500, e.what());
    }
  }

  static nlohmann::json ParseBody(const std::string& body) {
    nlohmann::json j = nlohmann::json::parse(body, nullptr, false);
    if (j.is_discarded()) throw BadRequest("request body is not valid JSON");
    if (!j.is_object()) throw BadRequest("request body must be a JSON object");
    return j;
  }

  static const nlohmann::json& Field(const nlohmann::json& j, const char* key) {
    if (!j.contains(key)) throw BadRequest(std::string("missing '") + key + "'");
    return j.at(key);
  }

  template <typename T>
  static T Integer(const nlohmann::json& j, const char* key) {
    const auto& v = j.at(key);
    if (!v.is_number_integer()) throw BadRequest(std::string("'") + key + "' must be an integer");
    if constexpr (std::is_unsigned_v<T>) {
      if (v.is_number_unsigned() || v.get<std::int64_t>() >= 0) return v.get<T>();
      throw BadRequest(std::string("'") + key + "' must be non-negative");
    }
    return v.get<T>();
  }

  static std::size_t ParseCount(const std::string& text, const char* name) {
    std::uint64_t v = 0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (text.empty() || ec != std::errc() || ptr != text.data() + text.size()) {
      throw BadRequest(std::string("'") + name + "' must be a non-negative integer");
    }
    return static_cast<std::size_t>(v);
  }

  const Bundle bundle_;
  const std::optional<RawTable> table_;
  const int tsne_iterations_;
  std::mutex cache_mutex_;
  std::map<std::pair<std::size_t, std::uint64_t>, nlohmann::json> cache_;
};

}  // namespace cfx
