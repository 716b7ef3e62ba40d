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

// Conditional VAE that maps the mutable part of an instance plus the desired
// class to a counterfactual candidate.
//
//   encoder: (F'+1) -> 20 -> 16 -> 14 -> 12 -> {mu, logvar} (10 each)
//   decoder: (10+1) -> 12 -> 14 -> 16 -> 18 -> F' (sigmoid)

#include <array>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "cfx/classifier.hpp"
#include "cfx/encoding.hpp"
#include "cfx/error.hpp"
#include "cfx/feasibility.hpp"
#include "cfx/layer_io.hpp"
#include "cfx/loss.hpp"
#include "cfx/mask.hpp"
#include "cfx/matrix.hpp"
#include "cfx/nn.hpp"
#include "cfx/schema.hpp"

namespace cfx {

inline constexpr std::array<std::size_t, 4> kEncoderHidden{20, 16, 14, 12};
inline constexpr std::array<std::size_t, 4> kDecoderHidden{12, 14, 16, 18};
inline constexpr std::size_t kLatentDim = 10;

struct LatentParams {
  Matrix mu;
  Matrix logvar;
};

namespace detail {
inline Matrix WithCondition(const Matrix& x, std::span<const int> cond) {
  if (cond.size() != x.rows()) throw ShapeError("one condition per row required");
  Matrix c(x.rows(), 1);
  for (std::size_t r = 0; r < x.rows(); ++r) c(r, 0) = cond[r];
  return HConcat(x, c);
}
}  // namespace detail

class VaeModel {
 public:
  struct EncoderCache {
    std::array<nn::LinearLayer::Cache, 4> layers;
    std::array<Matrix, 4> pre;
    std::array<Matrix, 4> mask;
    nn::LinearLayer::Cache mu;
    nn::LinearLayer::Cache logvar;
  };
  struct DecoderCache {
    std::array<nn::LinearLayer::Cache, 5> layers;
    std::array<Matrix, 4> pre;
    std::array<Matrix, 4> mask;
    Matrix out_pre;
  };

  VaeModel() = default;
  VaeModel(std::size_t feature_dim, std::mt19937_64& rng, double dropout = 0.3,
           std::size_t latent_dim = kLatentDim)
      : feature_dim_(feature_dim), latent_dim_(latent_dim), dropout_(dropout) {
    if (feature_dim == 0) throw ShapeError("VAE needs at least one mutable column");
    std::size_t in = feature_dim + 1;
    for (std::size_t i = 0; i < 4; ++i) {
      encoder_[i] = nn::LinearLayer::Glorot("encoder." + std::to_string(i), in, kEncoderHidden[i], rng);
      in = kEncoderHidden[i];
    }
    mu_ = nn::LinearLayer::Glorot("encoder.mu", in, latent_dim, rng);
    logvar_ = nn::LinearLayer::Glorot("encoder.logvar", in, latent_dim, rng);
    in = latent_dim + 1;
    for (std::size_t i = 0; i < 4; ++i) {
      decoder_[i] = nn::LinearLayer::Glorot("decoder." + std::to_string(i), in, kDecoderHidden[i], rng);
      in = kDecoderHidden[i];
    }
    decoder_[4] = nn::LinearLayer::Glorot("decoder.out", in, feature_dim, rng);
  }

  std::size_t feature_dim() const { return feature_dim_; }
  std::size_t latent_dim() const { return latent_dim_; }
  double dropout() const { return dropout_; }

  nn::LinearLayer& mu_head() { return mu_; }
  nn::LinearLayer& logvar_head() { return logvar_; }

  // Training mode applies dropout drawn from `rng`; evaluation mode is
  // deterministic and ignores it.
  LatentParams Encode(const Matrix& x_mut, std::span<const int> cond, bool training = false,
                      std::mt19937_64* rng = nullptr, EncoderCache* cache = nullptr) const {
    if (x_mut.cols() != feature_dim_) {
      throw ShapeError("encoder expects width " + std::to_string(feature_dim_) + ", got " +
                       std::to_string(x_mut.cols()));
    }
    Matrix h = detail::WithCondition(x_mut, cond);
    for (std::size_t i = 0; i < 4; ++i) h = Hidden(encoder_[i], h, i, training, rng, cache);
    LatentParams out{mu_.Forward(h, cache ? &cache->mu : nullptr),
                     logvar_.Forward(h, cache ? &cache->logvar : nullptr)};
    return out;
  }

  Matrix Decode(const Matrix& z, std::span<const int> cond, bool training = false,
                std::mt19937_64* rng = nullptr, DecoderCache* cache = nullptr) const {
    if (z.cols() != latent_dim_) {
      throw ShapeError("decoder expects latent width " + std::to_string(latent_dim_) + ", got " +
                       std::to_string(z.cols()));
    }
    Matrix h = detail::WithCondition(z, cond);
    for (std::size_t i = 0; i < 4; ++i) h = Hidden(decoder_[i], h, i, training, rng, cache);
    Matrix pre = decoder_[4].Forward(h, cache ? &cache->layers[4] : nullptr);
    Matrix out = nn::Activate(nn::Activation::kSigmoid, pre);
    if (cache) cache->out_pre = std::move(pre);
    return out;
  }

  // Accumulates decoder gradients; returns d/dz.
  Matrix DecoderBackward(const DecoderCache& cache, const Matrix& grad_out) {
    Matrix g = decoder_[4].Backward(cache.layers[4],
                                    nn::ActivationBackward(nn::Activation::kSigmoid, grad_out, cache.out_pre));
    for (std::size_t i = 4; i-- > 0;) {
      g = nn::DropoutBackward(g, cache.mask[i]);
      g = decoder_[i].Backward(cache.layers[i], nn::ActivationBackward(nn::Activation::kRelu, g, cache.pre[i]));
    }
    return SliceCols(g, 0, latent_dim_);
  }

  void EncoderBackward(const EncoderCache& cache, const Matrix& grad_mu, const Matrix& grad_logvar) {
    Matrix g = mu_.Backward(cache.mu, grad_mu);
    const Matrix gl = logvar_.Backward(cache.logvar, grad_logvar);
    for (std::size_t i = 0; i < g.size(); ++i) g.data()[i] += gl.data()[i];
    for (std::size_t i = 4; i-- > 0;) {
      g = nn::DropoutBackward(g, cache.mask[i]);
      g = encoder_[i].Backward(cache.layers[i], nn::ActivationBackward(nn::Activation::kRelu, g, cache.pre[i]));
    }
  }

  std::vector<nn::Parameter> EncoderParameters() {
    std::vector<nn::Parameter> p;
    for (auto& l : encoder_) l.AppendParameters(p);
    mu_.AppendParameters(p);
    logvar_.AppendParameters(p);
    return p;
  }

  std::vector<nn::Parameter> DecoderParameters() {
    std::vector<nn::Parameter> p;
    for (auto& l : decoder_) l.AppendParameters(p);
    return p;
  }

  std::vector<nn::Parameter> Parameters() {
    auto p = EncoderParameters();
    auto d = DecoderParameters();
    p.insert(p.end(), d.begin(), d.end());
    return p;
  }

  std::string ParameterDigest() const {
    std::vector<double> v;
    for (const auto& l : encoder_) l.AppendValues(v);
    mu_.AppendValues(v);
    logvar_.AppendValues(v);
    for (const auto& l : decoder_) l.AppendValues(v);
    return Sha256Hex(v);
  }

  nlohmann::json ToJson() const {
    nlohmann::json enc = nlohmann::json::array(), dec = nlohmann::json::array();
    for (const auto& l : encoder_) enc.push_back(LayerToJson(l));
    for (const auto& l : decoder_) dec.push_back(LayerToJson(l));
    return {{"feature_dim", feature_dim_}, {"latent_dim", latent_dim_}, {"dropout", dropout_},
            {"encoder", enc}, {"mu", LayerToJson(mu_)}, {"logvar", LayerToJson(logvar_)},
            {"decoder", dec}};
  }

  static VaeModel FromJson(const nlohmann::json& j) {
    try {
      VaeModel m;
      m.feature_dim_ = j.at("feature_dim").get<std::size_t>();
      m.latent_dim_ = j.at("latent_dim").get<std::size_t>();
      m.dropout_ = j.at("dropout").get<double>();
      const auto& enc = j.at("encoder");
      const auto& dec = j.at("decoder");
      if (enc.size() != 4 || dec.size() != 5) throw BundleError("VAE has the wrong number of layers");
      std::size_t in = m.feature_dim_ + 1;
      for (std::size_t i = 0; i < 4; ++i) {
        m.encoder_[i] = LayerFromJson(enc[i], in, kEncoderHidden[i]);
        in = kEncoderHidden[i];
      }
      m.mu_ = LayerFromJson(j.at("mu"), in, m.latent_dim_);
      m.logvar_ = LayerFromJson(j.at("logvar"), in, m.latent_dim_);
      in = m.latent_dim_ + 1;
      for (std::size_t i = 0; i < 4; ++i) {
        m.decoder_[i] = LayerFromJson(dec[i], in, kDecoderHidden[i]);
        in = kDecoderHidden[i];
      }
      m.decoder_[4] = LayerFromJson(dec[4], in, m.feature_dim_);
      return m;
    } catch (const nlohmann::json::exception& e) {
      throw BundleError(std::string("malformed VAE: ") + e.what());
    }
  }

 private:
  template <typename Cache>
  Matrix Hidden(const nn::LinearLayer& layer, const Matrix& x, std::size_t i, bool training,
                std::mt19937_64* rng, Cache* cache) const {
    if (training && !rng && dropout_ > 0.0) throw Error("training mode needs a random generator");
    Matrix pre = layer.Forward(x, cache ? &cache->layers[i] : nullptr);
    Matrix h = nn::Activate(nn::Activation::kRelu, pre);
    std::mt19937_64 unused(0);
    Matrix mask;
    h = nn::Dropout(h, dropout_, training, rng ? *rng : unused, cache ? &mask : nullptr);
    if (cache) {
      cache->pre[i] = std::move(pre);
      cache->mask[i] = std::move(mask);
    }
    return h;
  }

  std::size_t feature_dim_ = 0;
  std::size_t latent_dim_ = kLatentDim;
  double dropout_ = 0.3;
  std::array<nn::LinearLayer, 4> encoder_;
  nn::LinearLayer mu_;
  nn::LinearLayer logvar_;
  std::array<nn::LinearLayer, 5> decoder_;
};

// z = mu + exp(logvar / 2) * eps with eps ~ N(0, I). `eps_out` receives eps.
inline Matrix SampleLatent(const Matrix& mu, const Matrix& logvar, std::mt19937_64& rng,
                           Matrix* eps_out = nullptr) {
  CheckSameShape(mu, logvar, "SampleLatent");
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix eps(mu.rows(), mu.cols());
  for (double& v : eps.data()) v = normal(rng);
  Matrix z(mu.rows(), mu.cols());
  for (std::size_t i = 0; i < z.size(); ++i) {
    z.data()[i] = mu.data()[i] + std::exp(0.5 * logvar.data()[i]) * eps.data()[i];
  }
  if (eps_out) *eps_out = std::move(eps);
  return z;
}

// Adds independent N(0, scale^2) noise to z (no effect when scale is 0).
inline void PerturbLatent(Matrix& z, double scale, std::mt19937_64& rng) {
  if (scale == 0.0) return;
  std::normal_distribution<double> normal(0.0, scale);
  for (double& v : z.data()) v += normal(rng);
}

inline std::vector<double> MutablePart(std::span<const double> x_full, const MutableMask& mask) {
  if (x_full.size() != mask.width()) throw ShapeError("vector width does not match the mask");
  std::vector<double> out;
  out.reserve(mask.mutable_width());
  for (std::size_t c : mask.mutable_columns()) out.push_back(x_full[c]);
  return out;
}

inline Matrix MutablePart(const Matrix& x_full, const MutableMask& mask) {
  if (x_full.cols() != mask.width()) throw ShapeError("matrix width does not match the mask");
  return SelectCols(x_full, mask.mutable_columns());
}

// Immutable columns come from `x_full`; mutable ones from `x_cf_mut`, then each
// one-hot group is set to its argmax, binaries thresholded at 0.5 and
// continuous values clamped to [0, 1].
inline std::vector<double> AssembleCounterfactual(std::span<const double> x_full,
                                                  std::span<const double> x_cf_mut,
                                                  const MutableMask& mask, const EncodingState& state) {
  if (x_full.size() != mask.width() || x_full.size() != state.width() ||
      x_cf_mut.size() != mask.mutable_width()) {
    throw ShapeError("assemble: widths inconsistent with the mask");
  }
  std::vector<double> out(x_full.begin(), x_full.end());
  const auto& cols = mask.mutable_columns();
  for (std::size_t i = 0; i < cols.size(); ++i) out[cols[i]] = x_cf_mut[i];
  for (const auto& f : state.features()) {
    if (f.immutable) continue;
    switch (f.kind) {
      case FeatureKind::kContinuous:
        out[f.offset] = std::clamp(out[f.offset], 0.0, 1.0);
        break;
      case FeatureKind::kBinary:
        out[f.offset] = out[f.offset] >= 0.5 ? 1.0 : 0.0;
        break;
      case FeatureKind::kCategorical: {
        const auto begin = out.begin() + static_cast<std::ptrdiff_t>(f.offset);
        const auto end = begin + static_cast<std::ptrdiff_t>(f.width);
        const auto best = std::max_element(begin, end);
        for (auto it = begin; it != end; ++it) *it = it == best ? 1.0 : 0.0;
        break;
      }
    }
  }
  return out;
}

// The frozen classifier, mask and loss settings shared by every batch.
struct CfObjective {
  const Classifier* classifier = nullptr;
  MutableMask mask;
  std::vector<ConstraintTerm> constraints;
  LossWeights weights;
  SparsityMode sparsity = SparsityMode::kL1;
  const EncodingState* state = nullptr;
  // Score the projected counterfactual and pass its input gradient straight
  // through to the relaxed decoder output.
  bool straight_through = false;

  CfObjective(const Classifier& clf, const EncodingState& state, std::span<const ConstraintSpec> specs,
              LossWeights w, SparsityMode s)
      : classifier(&clf), mask(MutableMask::FromEncoding(state)), weights(w), sparsity(s), state(&state) {
    if (!clf.frozen()) throw Error("counterfactual training needs a frozen classifier");
    if (clf.input_dim() != state.width()) throw ShapeError("classifier width does not match the encoding");
    weights.Validate();
    for (const auto& spec : specs) constraints.emplace_back(spec, state, mask);
  }
};

struct BatchLoss {
  LossComponents components;  // per-row means
  double total = 0.0;
};

// Forward pass of the counterfactual objective on one batch with fixed noise
// `eps`. With `backprop`, parameter gradients of `total` are accumulated into
// `model`. `kinks`, when given, records every ReLU/hinge/abs argument sign.
inline BatchLoss CfBatchLoss(VaeModel& model, const CfObjective& obj, const Matrix& x_full,
                             std::span<const int> desired, const Matrix& eps, bool training,
                             std::mt19937_64& dropout_rng, bool backprop,
                             nn::KinkSignature* kinks = nullptr, const Matrix* extra_noise = nullptr) {
  const std::size_t n = x_full.rows();
  const Matrix x_mut = MutablePart(x_full, obj.mask);
  VaeModel::EncoderCache ec;
  VaeModel::DecoderCache dc;
  const LatentParams lat = model.Encode(x_mut, desired, training, &dropout_rng, &ec);
  Matrix z = lat.mu;
  for (std::size_t i = 0; i < z.size(); ++i) {
    z.data()[i] += std::exp(0.5 * lat.logvar.data()[i]) * eps.data()[i];
    if (extra_noise) z.data()[i] += extra_noise->data()[i];
  }
  const Matrix out = model.Decode(z, desired, training, &dropout_rng, &dc);

  Matrix x_cf = x_full;
  const auto& cols = obj.mask.mutable_columns();
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t i = 0; i < cols.size(); ++i) x_cf(r, cols[i]) = out(r, i);
    if (obj.straight_through) {
      const auto projected = AssembleCounterfactual(x_full.row(r), out.row(r), obj.mask, *obj.state);
      std::copy(projected.begin(), projected.end(), x_cf.row(r).begin());
    }
  }
  Classifier::Cache cc;
  const Matrix logits = obj.classifier->ScoresForLoss(x_cf, &cc);

  const double inv_n = 1.0 / static_cast<double>(n);
  const auto& w = obj.weights;
  LossComponents sum;
  Matrix grad_logits(n, 2);
  Matrix grad_out(n, out.cols());
  Matrix grad_mu(n, model.latent_dim());
  Matrix grad_lv(n, model.latent_dim());
  for (std::size_t r = 0; r < n; ++r) {
    const auto xr = x_mut.row(r);
    const auto orow = out.row(r);
    const auto xf = x_full.row(r);
    auto go = grad_out.row(r);
    sum.validity += ValidityLoss(logits(r, 0), logits(r, 1), desired[r], w.hinge_margin);
    sum.proximity += ProximityLoss(xr, orow);
    sum.sparsity += SparsityPenalty(xr, orow, obj.sparsity);
    for (const auto& term : obj.constraints) {
      sum.feasibility += term.Evaluate(xf, xr, orow, w.feasibility * inv_n, backprop ? go : std::span<double>{});
      if (kinks) term.AddKinks(xf, xr, orow, *kinks);
    }
    sum.kl += KlLoss(lat.mu.row(r), lat.logvar.row(r));
    if (kinks) {
      kinks->Add(w.hinge_margin - (desired[r] == 1 ? 1.0 : -1.0) * (logits(r, 1) - logits(r, 0)));
      for (std::size_t i = 0; i < xr.size(); ++i) kinks->Add(orow[i] - xr[i]);
    }
    if (backprop) {
      const auto gv = ValidityGrad(logits(r, 0), logits(r, 1), desired[r], w.hinge_margin);
      grad_logits(r, 0) = w.validity * inv_n * gv[0];
      grad_logits(r, 1) = w.validity * inv_n * gv[1];
      ProximityGrad(xr, orow, w.proximity * inv_n, go);
      SparsityGrad(xr, orow, obj.sparsity, w.sparsity * inv_n, go);
      KlGrad(lat.mu.row(r), lat.logvar.row(r), w.kl * inv_n, grad_mu.row(r), grad_lv.row(r));
    }
  }
  if (kinks) {
    for (const auto& p : ec.pre) kinks->Add(p);
    for (const auto& p : dc.pre) kinks->Add(p);
    kinks->Add(cc.pre_activation);
  }

  BatchLoss result;
  result.components = sum.Scaled(inv_n);
  result.total = TotalLoss(result.components, w);
  if (!backprop) return result;

  const Matrix grad_xcf = obj.classifier->InputGradient(cc, grad_logits);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t i = 0; i < cols.size(); ++i) grad_out(r, i) += grad_xcf(r, cols[i]);
  }
  const Matrix grad_z = model.DecoderBackward(dc, grad_out);
  for (std::size_t i = 0; i < grad_z.size(); ++i) {
    const double gz = grad_z.data()[i];
    grad_mu.data()[i] += gz;
    grad_lv.data()[i] += gz * eps.data()[i] * 0.5 * std::exp(0.5 * lat.logvar.data()[i]);
  }
  model.EncoderBackward(ec, grad_mu, grad_lv);
  return result;
}

struct CfTrainConfig {
  ConstraintKind constraint = ConstraintKind::kUnary;
  double learning_rate = 0.2;
  std::size_t batch_size = 2048;
  int epochs = 25;
  nn::OptimizerKind optimizer = nn::OptimizerKind::kSgd;
  LossWeights weights;
  SparsityMode sparsity = SparsityMode::kL1;
  double dropout = 0.3;
  std::size_t latent_dim = kLatentDim;
  double extra_noise = 0.0;
  bool straight_through = true;
  std::uint64_t seed = 0;
};

struct EpochLog {
  int epoch = 0;
  LossComponents components;
  double total = 0.0;
};

// Constraints of the configured kind.
inline std::vector<ConstraintSpec> ActiveConstraints(const DatasetSchema& schema, ConstraintKind kind) {
  std::vector<ConstraintSpec> out;
  for (const auto& c : schema.constraints) {
    if (c.kind() == kind) out.push_back(c);
  }
  return out;
}

// Trains on `train` with the desired class set to the opposite of the
// classifier's prediction for each row. Returns the final-epoch model.
inline VaeModel TrainCfModel(const Classifier& classifier, const EncodedDataset& train,
                             const DatasetSchema& schema, const CfTrainConfig& config,
                             std::vector<EpochLog>* log = nullptr) {
  if (train.size() == 0) throw DataError("counterfactual training set is empty");
  if (config.batch_size == 0) throw Error("batch size must be at least 1");
  if (config.epochs < 0) throw Error("epochs must be non-negative");
  const auto specs = ActiveConstraints(schema, config.constraint);
  CfObjective obj(classifier, train.encoding, specs, config.weights, config.sparsity);
  obj.straight_through = config.straight_through;

  std::mt19937_64 rng(config.seed);
  VaeModel model(obj.mask.mutable_width(), rng, config.dropout, config.latent_dim);
  auto params = model.Parameters();
  nn::Optimizer opt({config.optimizer, config.learning_rate});

  std::vector<int> desired = classifier.PredictBatch(train.matrix);
  for (int& d : desired) d = 1 - d;

  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), 0);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    LossComponents sum;
    double total = 0.0;
    std::size_t seen = 0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t end = std::min(order.size(), start + config.batch_size);
      const std::span<const std::size_t> idx(order.data() + start, end - start);
      const Matrix x = SelectRows(train.matrix, idx);
      std::vector<int> d;
      d.reserve(idx.size());
      for (std::size_t i : idx) d.push_back(desired[i]);
      Matrix eps(idx.size(), model.latent_dim());
      for (double& v : eps.data()) v = normal(rng);
      Matrix extra(eps.rows(), eps.cols());
      PerturbLatent(extra, config.extra_noise, rng);
      nn::ZeroGrads(params);
      BatchLoss batch;
      try {
        batch = CfBatchLoss(model, obj, x, d, eps, true, rng, true, nullptr,
                            config.extra_noise > 0.0 ? &extra : nullptr);
        opt.Step(params);
      } catch (const NumericError& e) {
        throw NumericError("training diverged at epoch " + std::to_string(epoch) + ": " + e.what());
      }
      const double b = static_cast<double>(idx.size());
      sum += batch.components.Scaled(b);
      total += batch.total * b;
      seen += idx.size();
    }
    const double inv = 1.0 / static_cast<double>(seen);
    EpochLog entry{epoch, sum.Scaled(inv), total * inv};
    if (!std::isfinite(entry.total)) {
      throw NumericError("training diverged at epoch " + std::to_string(epoch));
    }
    if (log) log->push_back(entry);
  }
  return model;
}

// k counterfactuals for one encoded instance. The desired class defaults to
// the opposite of the classifier's prediction.
inline std::vector<CFResult> GenerateCounterfactuals(const VaeModel& model, const Classifier& classifier,
                                                     const DatasetSchema& schema, const EncodingState& state,
                                                     std::span<const double> x_full,
                                                     std::optional<int> desired, int k,
                                                     std::mt19937_64& rng, double extra_noise = 0.0) {
  if (k < 1) throw Error("k must be at least 1");
  if (x_full.size() != state.width()) throw ShapeError("instance width does not match the encoding");
  const MutableMask mask = MutableMask::FromEncoding(state);
  const int input_class = classifier.Predict(x_full).label;
  const int target = desired.value_or(1 - input_class);
  if (target != 0 && target != 1) throw Error("desired class must be 0 or 1");

  const std::vector<int> cond(static_cast<std::size_t>(k), target);
  const Matrix x_mut = Matrix::RowVector(MutablePart(x_full, mask));
  Matrix rows(static_cast<std::size_t>(k), x_mut.cols());
  for (std::size_t r = 0; r < rows.rows(); ++r) {
    std::copy(x_mut.data().begin(), x_mut.data().end(), rows.row(r).begin());
  }
  const LatentParams lat = model.Encode(rows, cond);
  Matrix z = SampleLatent(lat.mu, lat.logvar, rng);
  PerturbLatent(z, extra_noise, rng);
  const Matrix out = model.Decode(z, cond);

  std::vector<CFResult> results;
  results.reserve(static_cast<std::size_t>(k));
  const std::vector<double> input(x_full.begin(), x_full.end());
  for (std::size_t r = 0; r < out.rows(); ++r) {
    auto cf = AssembleCounterfactual(x_full, out.row(r), mask, state);
    const int cf_class = classifier.Predict(cf).label;
    results.push_back(MakeResult(schema, state, input, std::move(cf), input_class, cf_class, target));
  }
  return results;
}

}  // namespace cfx
