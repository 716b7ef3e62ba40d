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

#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "cfx/matrix.hpp"

namespace cfx::testdata {

struct Blobs {
  Matrix points;
  std::vector<int> labels;
};

// `k` isotropic Gaussian clusters in `dim` dimensions; centers sit at
// distance `spacing` along distinct axes scaled so pairwise center distance
// equals `spacing`.
inline Blobs GaussianClusters(std::size_t per_cluster, std::size_t k, std::size_t dim, double sigma,
                              double spacing, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, sigma);
  Blobs out{Matrix(per_cluster * k, dim), {}};
  const double axis = spacing / std::sqrt(2.0);
  for (std::size_t c = 0; c < k; ++c) {
    for (std::size_t i = 0; i < per_cluster; ++i) {
      const std::size_t r = c * per_cluster + i;
      for (std::size_t d = 0; d < dim; ++d) out.points(r, d) = (d == c ? axis : 0.0) + noise(rng);
      out.labels.push_back(static_cast<int>(c));
    }
  }
  return out;
}

inline double Distance(const Matrix& m, std::size_t i, std::size_t j) {
  double s = 0.0;
  for (std::size_t d = 0; d < m.cols(); ++d) s += (m(i, d) - m(j, d)) * (m(i, d) - m(j, d));
  return std::sqrt(s);
}

inline double NearestNeighbourPurity(const Matrix& y, const std::vector<int>& labels) {
  std::size_t agree = 0;
  for (std::size_t i = 0; i < y.rows(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    std::size_t arg = i;
    for (std::size_t j = 0; j < y.rows(); ++j) {
      if (j == i) continue;
      const double d = Distance(y, i, j);
      if (d < best) {
        best = d;
        arg = j;
      }
    }
    agree += labels[arg] == labels[i] ? 1 : 0;
  }
  return static_cast<double>(agree) / static_cast<double>(y.rows());
}

inline double Silhouette(const Matrix& y, const std::vector<int>& labels) {
  int k = 0;
  for (int l : labels) k = std::max(k, l + 1);
  double total = 0.0;
  for (std::size_t i = 0; i < y.rows(); ++i) {
    std::vector<double> sum(k, 0.0);
    std::vector<int> count(k, 0);
    for (std::size_t j = 0; j < y.rows(); ++j) {
      if (j == i) continue;
      sum[labels[j]] += Distance(y, i, j);
      ++count[labels[j]];
    }
    const double a = count[labels[i]] ? sum[labels[i]] / count[labels[i]] : 0.0;
    double b = std::numeric_limits<double>::infinity();
    for (int c = 0; c < k; ++c) {
      if (c != labels[i] && count[c]) b = std::min(b, sum[c] / count[c]);
    }
    total += (b - a) / std::max(a, b);
  }
  return total / static_cast<double>(y.rows());
}

}  // namespace cfx::testdata
