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

// The black-box model: two linear layers with a ReLU in between, producing
// two class logits. Trained once with softmax cross-entropy, then frozen.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "cfx/digest.hpp"
#include "cfx/encoding.hpp"
#include "cfx/error.hpp"
#include "cfx/layer_io.hpp"
#include "cfx/matrix.hpp"
#include "cfx/nn.hpp"

namespace cfx {

struct ClassifierConfig {
  std::size_t hidden = 64;
  int epochs = 30;
  std::size_t batch_size = 512;
  double learning_rate = 1e-3;
  std::uint64_t seed = 0;
};

struct Prediction {
  int label = 0;
  std::array<double, 2> scores{0.0, 0.0};
};

// Equal logits resolve to class 0.
inline int ArgmaxClass(double logit0, double logit1) { return logit1 > logit0 ? 1 : 0; }

class Classifier {
 public:
  struct Cache {
    nn::LinearLayer::Cache hidden;
    Matrix pre_activation;
    nn::LinearLayer::Cache output;
  };

  Classifier() = default;
  Classifier(std::size_t input_dim, std::size_t hidden_dim, std::mt19937_64& rng)
      : hidden_(nn::LinearLayer::Glorot("classifier.hidden", input_dim, hidden_dim, rng)),
        output_(nn::LinearLayer::Glorot("classifier.output", hidden_dim, 2, rng)) {}
  Classifier(nn::LinearLayer hidden, nn::LinearLayer output, bool frozen)
      : hidden_(std::move(hidden)), output_(std::move(output)), frozen_(frozen) {}

  std::size_t input_dim() const { return hidden_.in_dim(); }
  std::size_t hidden_dim() const { return hidden_.out_dim(); }
  bool frozen() const { return frozen_; }
  void Freeze() { frozen_ = true; }

  const nn::LinearLayer& hidden_layer() const { return hidden_; }
  const nn::LinearLayer& output_layer() const { return output_; }
  nn::LinearLayer& mutable_hidden_layer() { return hidden_; }
  nn::LinearLayer& mutable_output_layer() { return output_; }

  // Batch logits (n x 2).
  Matrix Logits(const Matrix& x, Cache* cache = nullptr) const {
    if (x.cols() != input_dim()) {
      throw ShapeError("classifier expects width " + std::to_string(input_dim()) + ", got " +
                       std::to_string(x.cols()));
    }
    Matrix pre = hidden_.Forward(x, cache ? &cache->hidden : nullptr);
    const Matrix h = nn::Activate(nn::Activation::kRelu, pre);
    Matrix out = output_.Forward(h, cache ? &cache->output : nullptr);
    if (cache) cache->pre_activation = std::move(pre);
    return out;
  }

  Prediction Predict(std::span<const double> x) const {
    RequireFrozen("predict");
    const Matrix logits = Logits(Matrix::RowVector(x));
    return {ArgmaxClass(logits(0, 0), logits(0, 1)), {logits(0, 0), logits(0, 1)}};
  }

  std::vector<int> PredictBatch(const Matrix& x) const {
    const Matrix logits = Logits(x);
    std::vector<int> out(x.rows());
    for (std::size_t r = 0; r < x.rows(); ++r) out[r] = ArgmaxClass(logits(r, 0), logits(r, 1));
    return out;
  }

  // Logits whose gradient may be taken w.r.t. the input (not the weights).
  Matrix ScoresForLoss(const Matrix& x, Cache* cache) const {
    RequireFrozen("scores_for_loss");
    return Logits(x, cache);
  }

  Matrix InputGradient(const Cache& cache, const Matrix& grad_logits) const {
    RequireFrozen("input gradient");
    const Matrix gh = output_.BackwardInput(cache.output, grad_logits);
    const Matrix gpre = nn::ActivationBackward(nn::Activation::kRelu, gh, cache.pre_activation);
    return hidden_.BackwardInput(cache.hidden, gpre);
  }

  // Training-only: accumulates parameter gradients.
  void Backward(const Cache& cache, const Matrix& grad_logits) {
    RequireTrainable();
    const Matrix gh = output_.Backward(cache.output, grad_logits);
    hidden_.Backward(cache.hidden,
                     nn::ActivationBackward(nn::Activation::kRelu, gh, cache.pre_activation));
  }

  std::vector<nn::Parameter> Parameters() {
    RequireTrainable();
    std::vector<nn::Parameter> params;
    hidden_.AppendParameters(params);
    output_.AppendParameters(params);
    return params;
  }

  // SHA-256 over all weights; identical iff parameters are bit-identical.
  std::string ParameterDigest() const {
    std::vector<double> values;
    hidden_.AppendValues(values);
    output_.AppendValues(values);
    return Sha256Hex(values);
  }

  nlohmann::json ToJson() const {
    return {{"hidden", LayerToJson(hidden_)}, {"output", LayerToJson(output_)}, {"frozen", frozen_}};
  }

  static Classifier FromJson(const nlohmann::json& j, std::size_t input_dim) {
    try {
      const std::size_t hidden = j.at("hidden").at("shape").at(0).get<std::size_t>();
      return Classifier(LayerFromJson(j.at("hidden"), input_dim, hidden),
                        LayerFromJson(j.at("output"), hidden, 2), j.at("frozen").get<bool>());
    } catch (const nlohmann::json::exception& e) {
      throw BundleError(std::string("malformed classifier: ") + e.what());
    }
  }

 private:
  void RequireFrozen(const char* what) const {
    if (!frozen_) throw Error(std::string(what) + " requires a frozen classifier");
  }
  void RequireTrainable() const {
    if (frozen_) throw Error("classifier is frozen; its parameters cannot change");
  }

  nn::LinearLayer hidden_;
  nn::LinearLayer output_;
  bool frozen_ = false;
};

inline double Accuracy(const Classifier& model, const EncodedDataset& ds) {
  if (ds.size() == 0) return 0.0;
  const auto pred = model.PredictBatch(ds.matrix);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) correct += pred[i] == ds.labels[i] ? 1 : 0;
  return static_cast<double>(correct) / static_cast<double>(ds.size());
}

// Mean softmax cross-entropy and its gradient w.r.t. the logits.
inline double SoftmaxCrossEntropy(const Matrix& logits, std::span<const int> labels, Matrix* grad) {
  const double n = static_cast<double>(logits.rows());
  double loss = 0.0;
  if (grad) *grad = Matrix(logits.rows(), 2);
  for (std::size_t r = 0; r < logits.rows(); ++r) {
    const double m = std::max(logits(r, 0), logits(r, 1));
    const double e0 = std::exp(logits(r, 0) - m);
    const double e1 = std::exp(logits(r, 1) - m);
    const double z = e0 + e1;
    const int y = labels[r];
    loss += -(logits(r, y) - m - std::log(z));
    if (grad) {
      (*grad)(r, 0) = (e0 / z - (y == 0 ? 1.0 : 0.0)) / n;
      (*grad)(r, 1) = (e1 / z - (y == 1 ? 1.0 : 0.0)) / n;
    }
  }
  return loss / n;
}

struct ClassifierEpoch {
  int epoch = 0;
  double train_loss = 0.0;
  double validation_accuracy = 0.0;
};

// Adam on softmax cross-entropy; the parameters of the epoch with the best
// validation accuracy are kept and the returned model is frozen.
inline Classifier TrainClassifier(const EncodedDataset& train, const EncodedDataset& validation,
                                  const ClassifierConfig& config,
                                  std::vector<ClassifierEpoch>* log = nullptr) {
  if (train.size() == 0) throw DataError("classifier training set is empty");
  const auto positives = std::accumulate(train.labels.begin(), train.labels.end(), std::size_t{0});
  if (positives == 0 || positives == train.size()) {
    throw DataError("classifier training data contains a single class");
  }
  if (config.batch_size == 0) throw Error("batch size must be at least 1");
  std::mt19937_64 rng(config.seed);
  Classifier model(train.matrix.cols(), config.hidden, rng);
  auto params = model.Parameters();
  nn::Optimizer opt({nn::OptimizerKind::kAdam, config.learning_rate});

  Classifier best = model;
  double best_acc = -1.0;
  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), 0);
  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double loss_sum = 0.0;
    std::size_t batches = 0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t end = std::min(order.size(), start + config.batch_size);
      std::span<const std::size_t> idx(order.data() + start, end - start);
      const Matrix x = SelectRows(train.matrix, idx);
      std::vector<int> y;
      y.reserve(idx.size());
      for (std::size_t i : idx) y.push_back(train.labels[i]);
      Classifier::Cache cache;
      const Matrix logits = model.Logits(x, &cache);
      Matrix grad;
      loss_sum += SoftmaxCrossEntropy(logits, y, &grad);
      ++batches;
      nn::ZeroGrads(params);
      model.Backward(cache, grad);
      opt.Step(params);
    }
    nn::CheckFinite(params, "classifier epoch " + std::to_string(epoch));
    const double acc = Accuracy(model, validation.size() > 0 ? validation : train);
    if (log) log->push_back({epoch, loss_sum / static_cast<double>(batches), acc});
    if (acc > best_acc) {
      best_acc = acc;
      best = model;
    }
  }
  best.Freeze();
  return best;
}

}  // namespace cfx
