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

// Binds Service handlers to an httplib server.

#include <optional>
#include <string>

#include "cfx/service.hpp"
#include "httplib.h"

namespace cfx {

inline void Reply(httplib::Response& res, const ApiResponse& r) {
  res.status = r.status;
  res.set_content(r.body.dump(), "application/json; charset=utf-8");
}

inline void MountApi(httplib::Server& server, Service& service) {
  // SO_REUSEADDR only: without SO_REUSEPORT a port already in use fails to bind.
  server.set_socket_options([](socket_t sock) {
    int yes = 1;
    setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, reinterpret_cast<const char*>(&yes), sizeof yes);
  });
  server.Get("/api/schema", [&](const httplib::Request&, httplib::Response& res) { Reply(res, service.Schema()); });
  server.Post("/api/predict", [&](const httplib::Request& req, httplib::Response& res) {
    Reply(res, service.Predict(req.body));
  });
  server.Post("/api/counterfactuals", [&](const httplib::Request& req, httplib::Response& res) {
    Reply(res, service.Counterfactuals(req.body));
  });
  server.Get("/api/manifold", [&](const httplib::Request& req, httplib::Response& res) {
    auto param = [&](const char* key) -> std::optional<std::string> {
      if (!req.has_param(key)) return std::nullopt;
      return req.get_param_value(key);
    };
    Reply(res, service.Manifold(param("n"), param("seed")));
  });
  server.set_error_handler([](const httplib::Request&, httplib::Response& res) {
    if (res.body.empty()) Reply(res, ApiError(res.status, "no route for this request"));
  });
  server.set_exception_handler([](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
    std::string message = "internal error";
    try {
      std::rethrow_exception(ep);
    } catch (const std::exception& e) {
      message = e.what();
    } catch (...) {
    }
    Reply(res, ApiError(500, message));
  });
}

}  // namespace cfx
