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

// Exact O(n^2) t-SNE: perplexity-calibrated Gaussian affinities in the input
// space, Student-t affinities in the plane, momentum gradient descent with
// per-coordinate gains and early exaggeration.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "cfx/error.hpp"
#include "cfx/matrix.hpp"

namespace cfx {

inline constexpr std::size_t kTsneMaxPoints = 5000;
inline constexpr double kEntropyTolerance = 1e-5;
inline constexpr int kMaxBisectionSteps = 50;

struct TsneConfig {
  double perplexity = 30.0;
  int iterations = 1000;
  double learning_rate = 200.0;
  double early_exaggeration = 12.0;
  int exaggeration_iterations = 250;
  int momentum_switch = 250;
  double initial_momentum = 0.5;
  double final_momentum = 0.8;
  std::uint64_t seed = 0;
};

inline Matrix SquaredDistances(const Matrix& x) {
  const std::size_t n = x.rows();
  Matrix d(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto a = x.row(i);
    for (std::size_t j = i + 1; j < n; ++j) {
      const auto b = x.row(j);
      double s = 0.0;
      for (std::size_t k = 0; k < a.size(); ++k) s += (a[k] - b[k]) * (a[k] - b[k]);
      d(i, j) = s;
      d(j, i) = s;
    }
  }
  return d;
}

struct Affinities {
  Matrix p;                          // symmetric, sums to 1
  std::vector<double> row_entropy;   // entropy of each conditional (nats)
};

// Conditional P_{j|i} with bandwidths found by bisection on log(beta) so the
// entropy of each row equals log(perplexity); then P = (P_{j|i} + P_{i|j}) / 2n.
inline Affinities PairwiseAffinities(const Matrix& x, double perplexity) {
  const std::size_t n = x.rows();
  if (n < 4) throw Error("affinities need at least 4 points");
  if (!(perplexity > 0.0) || perplexity >= static_cast<double>(n - 1) / 3.0) {
    throw Error("perplexity must be positive and below (n-1)/3");
  }
  const Matrix d = SquaredDistances(x);
  const double target = std::log(perplexity);
  Matrix cond(n, n);
  Affinities out;
  out.row_entropy.resize(n);
  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i) {
    double dmin = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i) dmin = std::min(dmin, d(i, j));
    }
    // Row entropy and weights at a given log(beta).
    auto evaluate = [&](double log_beta) {
      const double beta = std::exp(log_beta);
      double z = 0.0, dot = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        if (j == i) {
          w[j] = 0.0;
          continue;
        }
        const double dj = d(i, j) - dmin;
        w[j] = std::exp(-beta * dj);
        z += w[j];
        dot += w[j] * dj;
      }
      return std::log(z) + beta * dot / z;
    };
    double lo = -60.0, hi = 60.0, mid = 0.0;
    double h = evaluate(mid);
    bool degenerate = true;
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i && d(i, j) != dmin) degenerate = false;
    }
    int step = 0;
    while (!degenerate && std::abs(h - target) > kEntropyTolerance) {
      if (++step > kMaxBisectionSteps) {
        throw NumericError("affinity bisection did not converge for row " + std::to_string(i));
      }
      if (h > target) {
        lo = mid;
      } else {
        hi = mid;
      }
      mid = 0.5 * (lo + hi);
      h = evaluate(mid);
    }
    double z = 0.0;
    for (double v : w) z += v;
    for (std::size_t j = 0; j < n; ++j) cond(i, j) = w[j] / z;
    out.row_entropy[i] = h;
  }
  out.p = Matrix(n, n);
  const double inv = 1.0 / (2.0 * static_cast<double>(n));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) out.p(i, j) = (cond(i, j) + cond(j, i)) * inv;
  }
  return out;
}

struct KlSample {
  int iteration = 0;
  double kl = 0.0;  // KL(P||Q) with the unexaggerated P
};

// KL is recorded at every iteration of this final stretch and sparsely before.
inline constexpr int kKlDenseTail = 100;
inline constexpr int kKlSparseEvery = 25;

struct TsneResult {
  Matrix embedding;  // n x 2, centered
  std::vector<KlSample> kl_history;
};

inline TsneResult TsneEmbed(const Matrix& x, const TsneConfig& config) {
  const std::size_t n = x.rows();
  if (n < 10) throw Error("t-SNE needs at least 10 points");
  if (n > kTsneMaxPoints) {
    throw Error("t-SNE is limited to " + std::to_string(kTsneMaxPoints) + " points, got " + std::to_string(n));
  }
  if (config.iterations < 250) throw Error("t-SNE needs at least 250 iterations");
  const Matrix p = PairwiseAffinities(x, config.perplexity).p;
  double p_log_p = 0.0;
  for (double v : p.data()) p_log_p += v > 0.0 ? v * std::log(v) : 0.0;

  std::mt19937_64 rng(config.seed);
  std::normal_distribution<double> init(0.0, 1e-4);
  Matrix y(n, 2);
  for (double& v : y.data()) v = init(rng);
  Matrix update(n, 2, 0.0), gains(n, 2, 1.0), grad(n, 2);

  TsneResult result;
  for (int it = 0; it < config.iterations; ++it) {
    const double exaggeration = it < config.exaggeration_iterations ? config.early_exaggeration : 1.0;
    const double momentum = it < config.momentum_switch ? config.initial_momentum : config.final_momentum;
    const bool want_kl = it >= config.iterations - kKlDenseTail || it % kKlSparseEvery == 0;

    double zsum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double yi0 = y(i, 0), yi1 = y(i, 1);
      for (std::size_t j = i + 1; j < n; ++j) {
        const double dx = yi0 - y(j, 0), dy = yi1 - y(j, 1);
        zsum += 1.0 / (1.0 + dx * dx + dy * dy);
      }
    }
    zsum *= 2.0;
    const double inv_z = 1.0 / zsum;

    grad.Fill(0.0);
    double p_log_num = 0.0;  // sum over ordered pairs of p * log(num)
    for (std::size_t i = 0; i < n; ++i) {
      const double yi0 = y(i, 0), yi1 = y(i, 1);
      const auto prow = p.row(i);
      double gi0 = 0.0, gi1 = 0.0;
      for (std::size_t j = i + 1; j < n; ++j) {
        const double dx = yi0 - y(j, 0), dy = yi1 - y(j, 1);
        const double num = 1.0 / (1.0 + dx * dx + dy * dy);
        const double pij = prow[j];
        const double mult = 4.0 * (exaggeration * pij - num * inv_z) * num;
        gi0 += mult * dx;
        gi1 += mult * dy;
        grad(j, 0) -= mult * dx;
        grad(j, 1) -= mult * dy;
        if (want_kl && pij > 0.0) p_log_num += 2.0 * pij * std::log(num);
      }
      grad(i, 0) += gi0;
      grad(i, 1) += gi1;
    }
    for (double g : grad.data()) {
      if (!std::isfinite(g)) throw NumericError("t-SNE diverged at iteration " + std::to_string(it));
    }
    if (want_kl) {
      // q = num / Z and sum(p) = 1, so KL = sum p log p - sum p log num + log Z.
      const double kl = p_log_p - p_log_num + std::log(zsum);
      if (!std::isfinite(kl)) throw NumericError("t-SNE diverged at iteration " + std::to_string(it));
      result.kl_history.push_back({it, kl});
    }
    for (std::size_t k = 0; k < y.size(); ++k) {
      double& g = gains.data()[k];
      const double gr = grad.data()[k];
      double& u = update.data()[k];
      g = (gr > 0.0) != (u > 0.0) ? g + 0.2 : g * 0.8;
      g = std::max(g, 0.01);
      u = momentum * u - config.learning_rate * g * gr;
      y.data()[k] += u;
    }
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      mx += y(i, 0);
      my += y(i, 1);
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) {
      y(i, 0) -= mx;
      y(i, 1) -= my;
    }
  }
  result.embedding = std::move(y);
  return result;
}

}  // namespace cfx
