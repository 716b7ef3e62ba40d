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

// Minimal dense feed-forward building blocks with hand-written backward
// passes: linear layers, ReLU/sigmoid, inverted dropout, Adam/SGD and a
// central-difference gradient checker.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "cfx/error.hpp"
#include "cfx/matrix.hpp"

namespace cfx::nn {

// Non-owning view of one trainable tensor and its gradient accumulator.
struct Parameter {
  std::string name;
  std::vector<double>* value = nullptr;
  std::vector<double>* grad = nullptr;
};

inline void ZeroGrads(std::span<const Parameter> params) {
  for (const auto& p : params) std::fill(p.grad->begin(), p.grad->end(), 0.0);
}

inline void CheckFinite(std::span<const Parameter> params, const std::string& context) {
  for (const auto& p : params) {
    for (double v : *p.value) {
      if (!std::isfinite(v)) {
        throw NumericError(context + ": parameter '" + p.name + "' became non-finite");
      }
    }
  }
}

// y = x W^T + b, with W stored out x in.
class LinearLayer {
 public:
  struct Cache {
    Matrix input;
    bool valid = false;
  };

  LinearLayer() = default;
  LinearLayer(std::string name, std::size_t in_dim, std::size_t out_dim)
      : name_(std::move(name)),
        weight_(out_dim, in_dim),
        bias_(out_dim, 0.0),
        grad_weight_(out_dim, in_dim),
        grad_bias_(out_dim, 0.0) {}

  // Uniform in +-sqrt(6 / (fan_in + fan_out)), zero bias.
  static LinearLayer Glorot(std::string name, std::size_t in_dim, std::size_t out_dim,
                            std::mt19937_64& rng) {
    LinearLayer layer(std::move(name), in_dim, out_dim);
    const double limit = std::sqrt(6.0 / static_cast<double>(in_dim + out_dim));
    std::uniform_real_distribution<double> dist(-limit, limit);
    for (double& w : layer.weight_.data()) w = dist(rng);
    return layer;
  }

  const std::string& name() const { return name_; }
  std::size_t in_dim() const { return weight_.cols(); }
  std::size_t out_dim() const { return weight_.rows(); }

  Matrix& weight() { return weight_; }
  const Matrix& weight() const { return weight_; }
  std::vector<double>& bias() { return bias_; }
  const std::vector<double>& bias() const { return bias_; }
  const Matrix& grad_weight() const { return grad_weight_; }
  const std::vector<double>& grad_bias() const { return grad_bias_; }

  Matrix Forward(const Matrix& x, Cache* cache = nullptr) const {
    if (x.cols() != in_dim()) {
      throw ShapeError("layer '" + name_ + "' expects " + std::to_string(in_dim()) +
                       " inputs, got " + std::to_string(x.cols()));
    }
    Matrix y(x.rows(), out_dim());
    for (std::size_t r = 0; r < x.rows(); ++r) {
      const auto xr = x.row(r);
      auto yr = y.row(r);
      for (std::size_t o = 0; o < out_dim(); ++o) {
        const auto wo = weight_.row(o);
        double acc = bias_[o];
        for (std::size_t i = 0; i < xr.size(); ++i) acc += xr[i] * wo[i];
        yr[o] = acc;
      }
    }
    if (cache != nullptr) {
      cache->input = x;
      cache->valid = true;
    }
    return y;
  }

  // Accumulates weight/bias gradients and returns the gradient w.r.t. input.
  Matrix Backward(const Cache& cache, const Matrix& grad_out) {
    CheckBackward(cache, grad_out);
    const Matrix& x = cache.input;
    for (std::size_t r = 0; r < grad_out.rows(); ++r) {
      const auto g = grad_out.row(r);
      const auto xr = x.row(r);
      for (std::size_t o = 0; o < out_dim(); ++o) {
        if (g[o] == 0.0) continue;
        auto gw = grad_weight_.row(o);
        for (std::size_t i = 0; i < xr.size(); ++i) gw[i] += g[o] * xr[i];
        grad_bias_[o] += g[o];
      }
    }
    return BackwardInput(cache, grad_out);
  }

  // Gradient w.r.t. input only; parameters and their gradients are untouched.
  Matrix BackwardInput(const Cache& cache, const Matrix& grad_out) const {
    CheckBackward(cache, grad_out);
    Matrix grad_in(grad_out.rows(), in_dim());
    for (std::size_t r = 0; r < grad_out.rows(); ++r) {
      const auto g = grad_out.row(r);
      auto gi = grad_in.row(r);
      for (std::size_t o = 0; o < out_dim(); ++o) {
        if (g[o] == 0.0) continue;
        const auto wo = weight_.row(o);
        for (std::size_t i = 0; i < gi.size(); ++i) gi[i] += g[o] * wo[i];
      }
    }
    return grad_in;
  }

  void ZeroGrad() {
    grad_weight_.Fill(0.0);
    std::fill(grad_bias_.begin(), grad_bias_.end(), 0.0);
  }

  void AppendParameters(std::vector<Parameter>& out) {
    out.push_back({name_ + ".weight", &weight_.data(), &grad_weight_.data()});
    out.push_back({name_ + ".bias", &bias_, &grad_bias_});
  }

  void AppendValues(std::vector<double>& out) const {
    out.insert(out.end(), weight_.data().begin(), weight_.data().end());
    out.insert(out.end(), bias_.begin(), bias_.end());
  }

 private:
  void CheckBackward(const Cache& cache, const Matrix& grad_out) const {
    if (!cache.valid) {
      throw Error("layer '" + name_ + "': backward called without a cached forward pass");
    }
    if (grad_out.rows() != cache.input.rows() || grad_out.cols() != out_dim()) {
      throw ShapeError("layer '" + name_ + "': gradient shape does not match forward output");
    }
  }

  std::string name_;
  Matrix weight_;
  std::vector<double> bias_;
  Matrix grad_weight_;
  std::vector<double> grad_bias_;
};

enum class Activation { kRelu, kSigmoid };

inline double Sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

inline Matrix Activate(Activation kind, const Matrix& x) {
  Matrix y = x;
  for (double& v : y.data()) v = kind == Activation::kRelu ? std::max(0.0, v) : Sigmoid(v);
  return y;
}

// x_cached is the pre-activation input. ReLU derivative at 0 is 0.
inline Matrix ActivationBackward(Activation kind, const Matrix& grad, const Matrix& x_cached) {
  CheckSameShape(grad, x_cached, "ActivationBackward");
  Matrix out = grad;
  auto& g = out.data();
  const auto& x = x_cached.data();
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (kind == Activation::kRelu) {
      g[i] = x[i] > 0.0 ? g[i] : 0.0;
    } else {
      const double s = Sigmoid(x[i]);
      g[i] *= s * (1.0 - s);
    }
  }
  return out;
}

// Inverted dropout: survivors are scaled by 1/(1-rate) so evaluation is the
// identity. When `mask` is given it receives the per-unit multiplier.
inline Matrix Dropout(const Matrix& x, double rate, bool training, std::mt19937_64& rng,
                      Matrix* mask = nullptr) {
  if (!(rate >= 0.0 && rate < 1.0)) {
    throw Error("dropout rate must be in [0, 1), got " + std::to_string(rate));
  }
  if (!training || rate == 0.0) {
    if (mask != nullptr) *mask = Matrix(x.rows(), x.cols(), 1.0);
    return x;
  }
  Matrix m(x.rows(), x.cols());
  const double keep_scale = 1.0 / (1.0 - rate);
  std::bernoulli_distribution drop(rate);
  for (double& v : m.data()) v = drop(rng) ? 0.0 : keep_scale;
  Matrix y = x;
  for (std::size_t i = 0; i < y.size(); ++i) y.data()[i] *= m.data()[i];
  if (mask != nullptr) *mask = std::move(m);
  return y;
}

inline Matrix DropoutBackward(const Matrix& grad, const Matrix& mask) {
  CheckSameShape(grad, mask, "DropoutBackward");
  Matrix out = grad;
  for (std::size_t i = 0; i < out.size(); ++i) out.data()[i] *= mask.data()[i];
  return out;
}

enum class OptimizerKind { kAdam, kSgd };

struct OptimizerConfig {
  OptimizerKind kind = OptimizerKind::kAdam;
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

class Optimizer {
 public:
  explicit Optimizer(OptimizerConfig config) : config_(config) {}

  const OptimizerConfig& config() const { return config_; }
  std::int64_t step_count() const { return step_; }
  const std::vector<std::vector<double>>& first_moments() const { return first_; }
  const std::vector<std::vector<double>>& second_moments() const { return second_; }

  // Applies one update. Nothing is modified if any gradient is non-finite.
  void Step(std::span<const Parameter> params) {
    for (const auto& p : params) {
      if (p.value->size() != p.grad->size()) {
        throw ShapeError("parameter '" + p.name + "': gradient size mismatch");
      }
      for (double g : *p.grad) {
        if (!std::isfinite(g)) throw NumericError("non-finite gradient in parameter '" + p.name + "'");
      }
    }
    if (first_.empty()) {
      for (const auto& p : params) {
        first_.emplace_back(p.value->size(), 0.0);
        second_.emplace_back(p.value->size(), 0.0);
      }
    }
    if (first_.size() != params.size()) throw ShapeError("optimizer: parameter list changed");
    ++step_;
    const double lr = config_.learning_rate;
    if (config_.kind == OptimizerKind::kSgd) {
      for (const auto& p : params) {
        for (std::size_t i = 0; i < p.value->size(); ++i) (*p.value)[i] -= lr * (*p.grad)[i];
      }
      return;
    }
    const double b1 = config_.beta1;
    const double b2 = config_.beta2;
    const double c1 = 1.0 - std::pow(b1, static_cast<double>(step_));
    const double c2 = 1.0 - std::pow(b2, static_cast<double>(step_));
    for (std::size_t k = 0; k < params.size(); ++k) {
      auto& value = *params[k].value;
      const auto& grad = *params[k].grad;
      auto& m = first_[k];
      auto& v = second_[k];
      if (m.size() != value.size()) {
        throw ShapeError("optimizer: moment shape mismatch for '" + params[k].name + "'");
      }
      for (std::size_t i = 0; i < value.size(); ++i) {
        m[i] = b1 * m[i] + (1.0 - b1) * grad[i];
        v[i] = b2 * v[i] + (1.0 - b2) * grad[i] * grad[i];
        const double m_hat = m[i] / c1;
        const double v_hat = v[i] / c2;
        value[i] -= lr * m_hat / (std::sqrt(v_hat) + config_.epsilon);
      }
    }
  }

 private:
  OptimizerConfig config_;
  std::int64_t step_ = 0;
  std::vector<std::vector<double>> first_;
  std::vector<std::vector<double>> second_;
};

// Order-sensitive hash of the sign pattern of a set of values. Used to detect
// finite-difference probes that cross a ReLU/L1/hinge kink.
class KinkSignature {
 public:
  void Add(double v) { Mix(v > 0.0 ? 1u : (v < 0.0 ? 2u : 3u)); }
  void Add(const Matrix& m) {
    for (double v : m.data()) Add(v);
  }
  std::uint64_t value() const { return hash_; }

 private:
  void Mix(std::uint64_t x) {
    hash_ ^= x;
    hash_ *= 1099511628211ull;
  }
  std::uint64_t hash_ = 14695981039346656037ull;
};

inline constexpr double kGradCheckStep = 1e-5;
// Relative error denominator floor; below it the comparison is absolute.
inline constexpr double kGradCheckFloor = 1e-5;

struct GradCheckResult {
  double max_relative_error = 0.0;
  std::size_t checked = 0;
  std::size_t skipped_at_kinks = 0;
  std::string worst_parameter;
  std::size_t worst_index = 0;
};

inline double RelativeError(double analytic, double numeric) {
  return std::abs(analytic - numeric) /
         std::max({std::abs(analytic), std::abs(numeric), kGradCheckFloor});
}

// Compares analytic gradients against central differences over every entry of
// `params`. `loss` evaluates the scalar objective at the current values;
// `backprop` fills the gradient accumulators (they are zeroed beforehand).
// When `kink_signature` is given, probes whose +h or -h evaluation changes the
// signature relative to the base point are skipped and counted.
inline GradCheckResult GradCheck(std::span<const Parameter> params,
                                 const std::function<double()>& loss,
                                 const std::function<void()>& backprop,
                                 const std::function<std::uint64_t()>& kink_signature = nullptr,
                                 double h = kGradCheckStep) {
  ZeroGrads(params);
  backprop();
  std::vector<std::vector<double>> analytic;
  analytic.reserve(params.size());
  for (const auto& p : params) analytic.push_back(*p.grad);

  loss();
  const std::uint64_t base_sig = kink_signature ? kink_signature() : 0;

  GradCheckResult result;
  for (std::size_t k = 0; k < params.size(); ++k) {
    auto& values = *params[k].value;
    for (std::size_t i = 0; i < values.size(); ++i) {
      const double saved = values[i];
      values[i] = saved + h;
      const double plus = loss();
      const bool plus_same = !kink_signature || kink_signature() == base_sig;
      values[i] = saved - h;
      const double minus = loss();
      const bool minus_same = !kink_signature || kink_signature() == base_sig;
      values[i] = saved;
      if (!plus_same || !minus_same) {
        ++result.skipped_at_kinks;
        continue;
      }
      const double numeric = (plus - minus) / (2.0 * h);
      const double err = RelativeError(analytic[k][i], numeric);
      ++result.checked;
      if (err > result.max_relative_error || !std::isfinite(err)) {
        result.max_relative_error = std::isfinite(err) ? err : INFINITY;
        result.worst_parameter = params[k].name;
        result.worst_index = i;
      }
    }
  }
  return result;
}

}  // namespace cfx::nn
