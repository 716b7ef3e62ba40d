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

// End-to-end runs over a bundle: train, evaluate, generate, predict, embed.
// Also the JSON views shared by the CLI and the HTTP service.

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <optional>
#include <ostream>
#include <random>
#include <string>
#include <vector>

#include "cfx/bundle.hpp"
#include "cfx/manifold.hpp"
#include "cfx/metrics.hpp"
#include "cfx/table.hpp"
#include "cfx/tsne.hpp"

namespace cfx {

inline constexpr int kMaxCounterfactuals = 50;
inline constexpr double kEmbedJitter = 1e-6;

// Generator for row `index` of a seeded run; independent of evaluation order.
inline std::mt19937_64 RowRng(std::uint64_t seed, std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
  return std::mt19937_64(seq);
}

// One counterfactual per row, desired class opposite to the prediction.
inline std::vector<CFResult> CounterfactualsForRows(const Bundle& b, const EncodedDataset& ds,
                                                    std::uint64_t seed) {
  if (ds.size() == 0) throw DataError("evaluation split is empty");
  std::vector<CFResult> out;
  out.reserve(ds.size());
  for (std::size_t i = 0; i < ds.size(); ++i) {
    auto rng = RowRng(seed, i);
    auto r = GenerateCounterfactuals(b.vae, b.classifier, b.schema, b.encoding, ds.matrix.row(i),
                                     std::nullopt, 1, rng, b.config.vae.extra_noise);
    out.push_back(std::move(r.front()));
  }
  return out;
}

inline Bundle TrainPipeline(const DatasetSchema& schema, const RawTable& table, const TrainConfig& config,
                            std::ostream* log = nullptr) {
  config.Validate();
  Bundle b;
  b.schema = schema;
  b.config = config;
  b.encoding = FitEncoding(table, schema);
  const auto split = Split(EncodeTable(table, schema, b.encoding), config.seed);
  if (log) {
    *log << "split: " << split.train.size() << " train, " << split.validation.size() << " validation, "
         << split.test.size() << " test\n";
  }
  b.classifier = TrainClassifier(split.train, split.validation, config.classifier, &b.classifier_log);
  if (log) {
    for (const auto& e : b.classifier_log) {
      *log << "classifier epoch " << e.epoch << " loss " << e.train_loss << " val_acc " << e.validation_accuracy
           << "\n";
    }
  }
  b.vae = TrainCfModel(b.classifier, split.train, schema, config.vae, &b.vae_log);
  if (log) {
    for (const auto& e : b.vae_log) {
      const auto& c = e.components;
      *log << "vae epoch " << e.epoch << " validity " << c.validity << " proximity " << c.proximity
           << " feasibility " << c.feasibility << " sparsity " << c.sparsity << " kl " << c.kl << " total "
           << e.total << "\n";
    }
  }
  const auto results = CounterfactualsForRows(b, split.validation, config.seed);
  b.metrics = ComputeReport(results, schema, b.encoding, ConfigDigest(config, schema));
  return b;
}

enum class EvalSplit { kTest, kValidation };

inline EvalSplit ParseEvalSplit(const std::string& s) {
  if (s == "test") return EvalSplit::kTest;
  if (s == "val" || s == "validation") return EvalSplit::kValidation;
  throw Error("split must be 'test' or 'val', got '" + s + "'");
}

// Re-derives the training-time partition from the bundle's encoding and seed.
inline EncodedDataset SplitRows(const Bundle& b, const RawTable& table, EvalSplit which) {
  auto split = Split(EncodeTable(table, b.schema, b.encoding), b.config.seed);
  return which == EvalSplit::kTest ? std::move(split.test) : std::move(split.validation);
}

inline MetricsReport EvaluateRows(const Bundle& b, const EncodedDataset& rows, std::uint64_t seed) {
  const auto results = CounterfactualsForRows(b, rows, seed);
  return ComputeReport(results, b.schema, b.encoding, ConfigDigest(b.config, b.schema));
}

inline MetricsReport EvaluatePipeline(const Bundle& b, const RawTable& table, EvalSplit which,
                                      std::uint64_t seed) {
  return EvaluateRows(b, SplitRows(b, table, which), seed);
}

inline std::vector<CFResult> GeneratePipeline(const Bundle& b, const Instance& instance,
                                              std::optional<int> desired, int k, std::uint64_t seed) {
  if (k < 1 || k > kMaxCounterfactuals) {
    throw Error("k must be between 1 and " + std::to_string(kMaxCounterfactuals) + ", got " + std::to_string(k));
  }
  if (desired && *desired != 0 && *desired != 1) throw Error("desired class must be 0 or 1");
  const auto x = Encode(instance, b.encoding);
  std::mt19937_64 rng(seed);
  return GenerateCounterfactuals(b.vae, b.classifier, b.schema, b.encoding, x, desired, k, rng,
                                 b.config.vae.extra_noise);
}

inline Prediction PredictInstance(const Bundle& b, const Instance& instance) {
  return b.classifier.Predict(Encode(instance, b.encoding));
}

// Three independent t-SNE maps over n points each: encoder means of training
// rows, prior samples, and the counterfactuals of those training rows.
inline std::vector<ManifoldPoint> EmbedPipeline(const Bundle& b, const RawTable& table, std::size_t n,
                                                std::uint64_t seed, int iterations = 1000) {
  if (n > kTsneMaxPoints) {
    throw Error("n = " + std::to_string(n) + " exceeds the embedding cap of " + std::to_string(kTsneMaxPoints));
  }
  if (n < 10) throw Error("n must be at least 10 to embed");
  auto split = Split(EncodeTable(table, b.schema, b.encoding), b.config.seed);
  if (n > split.train.size()) throw Error("n exceeds the " + std::to_string(split.train.size()) + " training rows");
  std::mt19937_64 rng(seed);
  std::vector<std::size_t> rows(split.train.size());
  std::iota(rows.begin(), rows.end(), 0);
  std::shuffle(rows.begin(), rows.end(), rng);
  rows.resize(n);
  const auto sample = SubsetRows(split.train, rows);

  const auto kind = b.config.vae.constraint;
  const auto specs = ActiveConstraints(b.schema, kind);
  const MutableMask mask = MutableMask::FromEncoding(b.encoding);
  std::vector<int> cond = b.classifier.PredictBatch(sample.matrix);
  for (int& c : cond) c = 1 - c;
  const Matrix train_mu = b.vae.Encode(MutablePart(sample.matrix, mask), cond).mu;

  const auto results = CounterfactualsForRows(b, sample, seed);
  Matrix predicted(n, b.encoding.width());
  std::vector<int> cf_feasible(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::copy(results[i].cf_vector.begin(), results[i].cf_vector.end(), predicted.row(i).begin());
    cf_feasible[i] = results[i].FeasibleFor(kind) ? 1 : 0;
  }
  const auto latent = SampleAndLabel(b.vae, b.classifier, b.schema, split.train, specs, n, rng);

  TsneConfig tc;
  tc.iterations = iterations;
  tc.perplexity = std::min(tc.perplexity, 0.99 * static_cast<double>(n - 1) / 3.0);
  std::vector<ManifoldPoint> points;
  points.reserve(3 * n);
  auto add = [&](Matrix x, PointSource source, const std::vector<int>& labels, std::uint64_t offset) {
    tc.seed = seed + offset;
    // Duplicate rows (common among counterfactuals) would make the perplexity
    // target unreachable; a tiny seeded jitter separates them.
    std::mt19937_64 jitter_rng(tc.seed);
    std::normal_distribution<double> jitter(0.0, kEmbedJitter);
    for (double& v : x.data()) v += jitter(jitter_rng);
    const auto e = TsneEmbed(x, tc).embedding;
    for (std::size_t i = 0; i < n; ++i) points.push_back({e(i, 0), e(i, 1), source, labels[i]});
  };
  // A training point carries the label of its own counterfactual.
  add(train_mu, PointSource::kTrain, cf_feasible, 0);
  add(latent.latent, PointSource::kLatent, latent.labels, 1);
  add(predicted, PointSource::kPredicted, cf_feasible, 2);
  return points;
}

inline nlohmann::json PredictionToJson(const Prediction& p) {
  return {{"class", p.label}, {"scores", {p.scores[0], p.scores[1]}}};
}

inline nlohmann::json CfResultToJson(const CFResult& r) {
  nlohmann::json changes = nlohmann::json::array();
  for (const auto& name : r.changed_features) {
    changes.push_back({{"feature", name}, {"before", ValueToJson(r.input.at(name))}, {"after", ValueToJson(r.cf.at(name))}});
  }
  nlohmann::json flags = nlohmann::json::array();
  for (const auto& f : r.feasible) {
    flags.push_back({{"constraint", f.label}, {"type", ToString(f.kind)}, {"feasible", f.feasible}});
  }
  return {{"input", InstanceToJson(r.input)},
          {"cf", InstanceToJson(r.cf)},
          {"input_class", r.input_class},
          {"cf_class", r.cf_class},
          {"desired_class", r.desired_class},
          {"valid", r.valid()},
          {"feasible",
           {{"unary", r.FeasibleFor(ConstraintKind::kUnary)}, {"binary", r.FeasibleFor(ConstraintKind::kBinary)}}},
          {"constraints", flags},
          {"sparsity", r.sparsity_count},
          {"changed_features", r.changed_features},
          {"changes", changes}};
}

inline nlohmann::json ManifoldToJson(std::span<const ManifoldPoint> points) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& p : points) {
    out.push_back({{"x", p.x}, {"y", p.y}, {"source", ToString(p.source)}, {"feasible", p.feasible}});
  }
  return out;
}

}  // namespace cfx
