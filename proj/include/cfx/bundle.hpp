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

// Training configuration and the single-file JSON model bundle.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "cfx/classifier.hpp"
#include "cfx/digest.hpp"
#include "cfx/encoding.hpp"
#include "cfx/error.hpp"
#include "cfx/mask.hpp"
#include "cfx/metrics.hpp"
#include "cfx/schema.hpp"
#include "cfx/vae.hpp"
#include "json.hpp"

namespace cfx {

inline constexpr int kBundleFormatVersion = 1;

inline std::string ToString(nn::OptimizerKind k) { return k == nn::OptimizerKind::kAdam ? "adam" : "sgd"; }

inline nn::OptimizerKind ParseOptimizerKind(const std::string& s) {
  if (s == "adam") return nn::OptimizerKind::kAdam;
  if (s == "sgd") return nn::OptimizerKind::kSgd;
  throw Error("optimizer must be 'adam' or 'sgd', got '" + s + "'");
}

struct TrainConfig {
  std::uint64_t seed = 0;
  ClassifierConfig classifier;
  CfTrainConfig vae;

  // One seed drives the split and both training stages.
  void SetSeed(std::uint64_t s) {
    seed = s;
    classifier.seed = s;
    vae.seed = s;
  }

  void Validate() const {
    if (classifier.batch_size == 0 || vae.batch_size == 0) throw Error("batch size must be at least 1");
    if (classifier.epochs < 0 || vae.epochs < 0) throw Error("epochs must be non-negative");
    if (!(vae.learning_rate > 0.0) || !(classifier.learning_rate > 0.0)) {
      throw Error("learning rate must be positive");
    }
    if (vae.latent_dim == 0) throw Error("latent dimension must be at least 1");
    if (!(vae.dropout >= 0.0 && vae.dropout < 1.0)) throw Error("dropout must lie in [0, 1)");
    vae.weights.Validate();
  }
};

inline nlohmann::json TrainConfigToJson(const TrainConfig& c, const DatasetSchema& schema) {
  const auto& w = c.vae.weights;
  nlohmann::json constraints = nlohmann::json::array();
  for (const auto& s : ActiveConstraints(schema, c.vae.constraint)) constraints.push_back(ConstraintToJson(s));
  return {{"seed", c.seed},
          {"classifier",
           {{"hidden", c.classifier.hidden},
            {"epochs", c.classifier.epochs},
            {"batch_size", c.classifier.batch_size},
            {"learning_rate", c.classifier.learning_rate},
            {"optimizer", "adam"}}},
          {"vae",
           {{"constraint", ToString(c.vae.constraint)},
            {"learning_rate", c.vae.learning_rate},
            {"batch_size", c.vae.batch_size},
            {"epochs", c.vae.epochs},
            {"optimizer", ToString(c.vae.optimizer)},
            {"dropout", c.vae.dropout},
            {"latent_dim", c.vae.latent_dim},
            {"sparsity", ToString(c.vae.sparsity)},
            {"extra_noise", c.vae.extra_noise},
            {"straight_through", c.vae.straight_through},
            {"weights",
             {{"validity", w.validity},
              {"proximity", w.proximity},
              {"feasibility", w.feasibility},
              {"sparsity", w.sparsity},
              {"kl", w.kl},
              {"hinge_margin", w.hinge_margin}}}}},
          {"constraints", constraints}};
}

inline TrainConfig TrainConfigFromJson(const nlohmann::json& j) {
  try {
    TrainConfig c;
    c.SetSeed(j.at("seed").get<std::uint64_t>());
    const auto& cj = j.at("classifier");
    c.classifier.hidden = cj.at("hidden").get<std::size_t>();
    c.classifier.epochs = cj.at("epochs").get<int>();
    c.classifier.batch_size = cj.at("batch_size").get<std::size_t>();
    c.classifier.learning_rate = cj.at("learning_rate").get<double>();
    const auto& vj = j.at("vae");
    c.vae.constraint = ParseConstraintKind(vj.at("constraint").get<std::string>());
    c.vae.learning_rate = vj.at("learning_rate").get<double>();
    c.vae.batch_size = vj.at("batch_size").get<std::size_t>();
    c.vae.epochs = vj.at("epochs").get<int>();
    c.vae.optimizer = ParseOptimizerKind(vj.at("optimizer").get<std::string>());
    c.vae.dropout = vj.at("dropout").get<double>();
    c.vae.latent_dim = vj.at("latent_dim").get<std::size_t>();
    c.vae.sparsity = ParseSparsityMode(vj.at("sparsity").get<std::string>());
    c.vae.extra_noise = vj.at("extra_noise").get<double>();
    c.vae.straight_through = vj.at("straight_through").get<bool>();
    const auto& wj = vj.at("weights");
    auto& w = c.vae.weights;
    w.validity = wj.at("validity").get<double>();
    w.proximity = wj.at("proximity").get<double>();
    w.feasibility = wj.at("feasibility").get<double>();
    w.sparsity = wj.at("sparsity").get<double>();
    w.kl = wj.at("kl").get<double>();
    w.hinge_margin = wj.at("hinge_margin").get<double>();
    c.Validate();
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw BundleError(std::string("malformed training config: ") + e.what());
  }
}

inline std::string ConfigDigest(const TrainConfig& c, const DatasetSchema& schema) {
  return Sha256Hex(TrainConfigToJson(c, schema).dump());
}

inline std::string SchemaDigest(const DatasetSchema& schema) { return Sha256Hex(SchemaToJson(schema).dump()); }

struct Bundle {
  DatasetSchema schema;
  EncodingState encoding;
  Classifier classifier;
  VaeModel vae;
  TrainConfig config;
  std::vector<ClassifierEpoch> classifier_log;
  std::vector<EpochLog> vae_log;
  std::optional<MetricsReport> metrics;  // validation split, computed at training time
};

inline nlohmann::json BundleToJson(const Bundle& b) {
  nlohmann::json clf_log = nlohmann::json::array();
  for (const auto& e : b.classifier_log) {
    clf_log.push_back({{"epoch", e.epoch}, {"train_loss", e.train_loss}, {"validation_accuracy", e.validation_accuracy}});
  }
  nlohmann::json vae_log = nlohmann::json::array();
  for (const auto& e : b.vae_log) {
    const auto& c = e.components;
    vae_log.push_back({{"epoch", e.epoch},
                       {"validity", c.validity},
                       {"proximity", c.proximity},
                       {"feasibility", c.feasibility},
                       {"sparsity", c.sparsity},
                       {"kl", c.kl},
                       {"total", e.total}});
  }
  return {{"format_version", kBundleFormatVersion},
          {"schema", SchemaToJson(b.schema)},
          {"schema_sha256", SchemaDigest(b.schema)},
          {"encoding", EncodingToJson(b.encoding)},
          {"classifier", b.classifier.ToJson()},
          {"vae", b.vae.ToJson()},
          {"config", TrainConfigToJson(b.config, b.schema)},
          {"training_log", {{"classifier", clf_log}, {"vae", vae_log}}},
          {"metrics", b.metrics ? ReportToJson(*b.metrics) : nlohmann::json()}};
}

inline Bundle BundleFromJson(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("format_version")) throw BundleError("not a model bundle");
  if (!j.at("format_version").is_number_integer() || j.at("format_version").get<int>() != kBundleFormatVersion) {
    throw BundleError("unsupported bundle format_version " + j.at("format_version").dump() + " (expected " +
                      std::to_string(kBundleFormatVersion) + ")");
  }
  try {
    Bundle b;
    b.schema = SchemaFromJson(j.at("schema"));
    if (j.at("schema_sha256").get<std::string>() != SchemaDigest(b.schema)) {
      throw BundleError("schema digest does not match the embedded schema");
    }
    b.encoding = EncodingFromJson(j.at("encoding"));
    if (b.encoding.features().size() != b.schema.features.size()) {
      throw BundleError("encoding does not match the schema");
    }
    for (std::size_t i = 0; i < b.schema.features.size(); ++i) {
      if (b.encoding.features()[i].name != b.schema.features[i].name) {
        throw BundleError("encoding does not match the schema");
      }
    }
    b.classifier = Classifier::FromJson(j.at("classifier"), b.encoding.width());
    b.vae = VaeModel::FromJson(j.at("vae"));
    const auto mask = MutableMask::FromEncoding(b.encoding);
    if (b.vae.feature_dim() != mask.mutable_width()) {
      throw BundleError("VAE width " + std::to_string(b.vae.feature_dim()) + " does not match " +
                        std::to_string(mask.mutable_width()) + " mutable columns");
    }
    b.config = TrainConfigFromJson(j.at("config"));
    for (const auto& e : j.at("training_log").at("classifier")) {
      b.classifier_log.push_back({e.at("epoch").get<int>(), e.at("train_loss").get<double>(),
                                  e.at("validation_accuracy").get<double>()});
    }
    for (const auto& e : j.at("training_log").at("vae")) {
      LossComponents c;
      c.validity = e.at("validity").get<double>();
      c.proximity = e.at("proximity").get<double>();
      c.feasibility = e.at("feasibility").get<double>();
      c.sparsity = e.at("sparsity").get<double>();
      c.kl = e.at("kl").get<double>();
      b.vae_log.push_back({e.at("epoch").get<int>(), c, e.at("total").get<double>()});
    }
    if (!j.at("metrics").is_null()) b.metrics = ReportFromJson(j.at("metrics"));
    return b;
  } catch (const nlohmann::json::exception& e) {
    throw BundleError(std::string("malformed bundle: ") + e.what());
  } catch (const SchemaError& e) {
    throw BundleError(std::string("bundle schema: ") + e.what());
  } catch (const ShapeError& e) {
    throw BundleError(std::string("bundle weights: ") + e.what());
  }
}

inline std::string SerializeBundle(const Bundle& b) { return BundleToJson(b).dump(1) + "\n"; }

inline void SaveBundle(const Bundle& b, const std::filesystem::path& path) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
    if (ec) throw Error("cannot create '" + path.parent_path().string() + "': " + ec.message());
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write bundle '" + path.string() + "'");
  out << SerializeBundle(b);
  if (!out.flush()) throw Error("failed writing bundle '" + path.string() + "'");
}

inline Bundle LoadBundle(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw BundleError("cannot open bundle '" + path.string() + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw BundleError("bundle '" + path.string() + "' is not valid JSON: " + e.what());
  }
  return BundleFromJson(j);
}

}  // namespace cfx
