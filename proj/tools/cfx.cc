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

// cfx command-line entry point.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "cfx/http.hpp"
#include "cfx/pipeline.hpp"
#include "cfx/service.hpp"

namespace {

constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

// An --instance argument is either a path to a JSON file or inline JSON.
nlohmann::json ReadInstanceArg(const std::string& arg) {
  std::string text = arg;
  if (std::error_code ec; std::filesystem::is_regular_file(arg, ec)) {
    std::ifstream in(arg, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    text = ss.str();
  }
  auto j = nlohmann::json::parse(text, nullptr, false);
  if (j.is_discarded()) throw cfx::Error("--instance is neither a readable file nor valid JSON");
  if (j.is_object() && j.contains("instance")) return j.at("instance");
  return j;
}

void WriteOutput(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw cfx::Error("cannot write '" + path + "'");
  out << text;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Feasibility-aware counterfactual explanations"};
  app.require_subcommand(1);

  std::string data, schema_path, constraint = "unary", out, model, report, instance, split = "test", host = "127.0.0.1";
  std::uint64_t seed = 0;
  int epochs = -1, k = 1, port = 8080, iterations = 1000, classifier_epochs = -1;
  std::optional<int> desired;
  double lr = 0.0;
  std::size_t batch = 0, n = 500;

  auto* train = app.add_subcommand("train", "Train the classifier and the counterfactual VAE");
  train->add_option("--data", data, "CSV file")->required();
  train->add_option("--schema", schema_path, "Schema JSON")->required();
  train->add_option("--constraint", constraint, "Constraint family")->check(CLI::IsMember({"unary", "binary"}));
  train->add_option("--out", out, "Bundle path")->required();
  train->add_option("--seed", seed, "Seed for split and training");
  train->add_option("--epochs", epochs, "VAE epochs (default 25, 50 for binary)")->check(CLI::NonNegativeNumber);
  train->add_option("--classifier-epochs", classifier_epochs, "Classifier epochs")->check(CLI::NonNegativeNumber);
  train->add_option("--lr", lr, "VAE learning rate")->check(CLI::PositiveNumber);
  train->add_option("--batch", batch, "VAE batch size")->check(CLI::PositiveNumber);
  train->add_option("--report", report, "Also write the validation report here");

  auto* evaluate = app.add_subcommand("evaluate", "Compute the metrics report on a held-out split");
  evaluate->add_option("--model", model, "Bundle path")->required();
  evaluate->add_option("--data", data, "CSV file")->required();
  evaluate->add_option("--split", split, "test or val")->check(CLI::IsMember({"test", "val"}));
  evaluate->add_option("--seed", seed, "Generation seed");
  evaluate->add_option("--report", report, "Report base path (.json and .csv are written)");

  auto* generate = app.add_subcommand("generate", "Counterfactuals for one instance");
  generate->add_option("--model", model, "Bundle path")->required();
  generate->add_option("--instance", instance, "Instance JSON or a file holding it")->required();
  generate->add_option("--k", k, "Number of counterfactuals")->check(CLI::Range(1, cfx::kMaxCounterfactuals));
  generate->add_option("--desired", desired, "Desired class")->check(CLI::Range(0, 1));
  generate->add_option("--seed", seed, "Sampling seed");
  generate->add_option("--out", out, "Output file (stdout by default)");

  auto* predict = app.add_subcommand("predict", "Classifier decision for one instance");
  predict->add_option("--model", model, "Bundle path")->required();
  predict->add_option("--instance", instance, "Instance JSON or a file holding it")->required();

  auto* embed = app.add_subcommand("embed", "Export 2D manifolds as TSV");
  embed->add_option("--model", model, "Bundle path")->required();
  embed->add_option("--data", data, "CSV file")->required();
  embed->add_option("--n", n, "Points per map");
  embed->add_option("--seed", seed, "Sampling and embedding seed");
  embed->add_option("--iterations", iterations, "t-SNE iterations")->check(CLI::Range(250, 100000));
  embed->add_option("--out", out, "TSV path")->required();

  auto* serve = app.add_subcommand("serve", "Serve the JSON API");
  serve->add_option("--model", model, "Bundle path")->required();
  serve->add_option("--data", data, "CSV file for the manifold endpoint");
  serve->add_option("--port", port, "Port")->check(CLI::Range(0, 65535));
  serve->add_option("--host", host, "Bind address");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*train) {
      const auto schema = cfx::LoadSchema(schema_path);
      const auto table = cfx::LoadAndClean(data, schema);
      cfx::TrainConfig config;
      config.SetSeed(seed);
      config.vae.constraint = cfx::ParseConstraintKind(constraint);
      config.vae.epochs = epochs >= 0 ? epochs : (config.vae.constraint == cfx::ConstraintKind::kBinary ? 50 : 25);
      if (classifier_epochs >= 0) config.classifier.epochs = classifier_epochs;
      if (lr > 0.0) config.vae.learning_rate = lr;
      if (batch > 0) config.vae.batch_size = batch;
      if (config.vae.epochs == 0) std::cerr << "warning: --epochs 0 leaves the VAE untrained\n";
      const auto bundle = cfx::TrainPipeline(schema, table, config, &std::cerr);
      cfx::SaveBundle(bundle, out);
      if (!report.empty()) cfx::EmitReport(*bundle.metrics, report);
      std::cerr << "wrote " << out << "\n";
    } else if (*evaluate) {
      const auto bundle = cfx::LoadBundle(model);
      const auto table = cfx::LoadAndClean(data, bundle.schema);
      const auto m = cfx::EvaluatePipeline(bundle, table, cfx::ParseEvalSplit(split), seed);
      if (!report.empty()) cfx::EmitReport(m, report);
      std::cout << cfx::ReportToJson(m).dump(2) << "\n";
    } else if (*generate) {
      const auto bundle = cfx::LoadBundle(model);
      const auto inst = cfx::InstanceFromJson(ReadInstanceArg(instance), bundle.encoding);
      nlohmann::json results = nlohmann::json::array();
      for (const auto& r : cfx::GeneratePipeline(bundle, inst, desired, k, seed)) {
        results.push_back(cfx::CfResultToJson(r));
      }
      WriteOutput(out, nlohmann::json{{"results", results}}.dump(2) + "\n");
    } else if (*predict) {
      const auto bundle = cfx::LoadBundle(model);
      const auto inst = cfx::InstanceFromJson(ReadInstanceArg(instance), bundle.encoding);
      std::cout << cfx::PredictionToJson(cfx::PredictInstance(bundle, inst)).dump() << "\n";
    } else if (*embed) {
      const auto bundle = cfx::LoadBundle(model);
      const auto table = cfx::LoadAndClean(data, bundle.schema);
      cfx::ExportManifold(cfx::EmbedPipeline(bundle, table, n, seed, iterations), out);
      std::cerr << "wrote " << 3 * n << " points to " << out << "\n";
    } else if (*serve) {
      auto bundle = cfx::LoadBundle(model);
      std::optional<cfx::RawTable> table;
      if (!data.empty()) table = cfx::LoadAndClean(data, bundle.schema);
      cfx::Service service(std::move(bundle), std::move(table));
      httplib::Server server;
      cfx::MountApi(server, service);
      if (!server.bind_to_port(host, port)) throw cfx::Error("cannot bind " + host + ":" + std::to_string(port));
      std::cerr << "listening on http://" << host << ":" << port << "\n";
      if (!server.listen_after_bind()) throw cfx::Error("server stopped unexpectedly");
    }
  } catch (const cfx::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    for (const auto& f : e.errors()) std::cerr << "  " << f.field << ": " << f.message << "\n";
    return kExitRuntime;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return 0;
}
