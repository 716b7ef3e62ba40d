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

#include "cfx/tsne.hpp"

#include <gtest/gtest.h>

#include <chrono>
#include <cmath>
#include <random>

#include "support/clusters.hpp"

namespace cfx {
namespace {

Matrix RandomPoints(std::size_t n, std::size_t dim, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix m(n, dim);
  for (double& v : m.data()) v = normal(rng);
  return m;
}

TEST(AffinityTest, SymmetricNormalizedAndCalibrated) {
  const Matrix x = RandomPoints(60, 5, 1);
  const auto aff = PairwiseAffinities(x, 10.0);
  double total = 0.0;
  for (std::size_t i = 0; i < 60; ++i) {
    EXPECT_EQ(aff.p(i, i), 0.0);
    for (std::size_t j = 0; j < 60; ++j) {
      EXPECT_GE(aff.p(i, j), 0.0);
      EXPECT_EQ(aff.p(i, j), aff.p(j, i));
      total += aff.p(i, j);
    }
    EXPECT_NEAR(aff.row_entropy[i], std::log(10.0), 1e-5);
  }
  EXPECT_NEAR(total, 1.0, 1e-9);
}

TEST(AffinityTest, IdenticalPointsGiveUniformRows) {
  Matrix x(12, 3, 0.5);
  const auto aff = PairwiseAffinities(x, 3.0);
  for (std::size_t i = 0; i < 12; ++i) {
    for (std::size_t j = 0; j < 12; ++j) {
      if (i != j) {
        EXPECT_NEAR(aff.p(i, j), 1.0 / (12.0 * 11.0), 1e-15);
      }
    }
  }
}

TEST(AffinityTest, JitteredIdenticalPoints) {
  Matrix x(12, 3, 0.5);
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-1e-12, 1e-12);
  for (double& v : x.data()) v += u(rng);
  const auto aff = PairwiseAffinities(x, 3.0);
  double total = 0.0;
  for (double v : aff.p.data()) {
    EXPECT_TRUE(std::isfinite(v));
    total += v;
  }
  EXPECT_NEAR(total, 1.0, 1e-9);
}

TEST(AffinityTest, SeparatedPairsMatchOracle) {
  // Two tight pairs far apart plus an outlier; expected P from an independent
  // root-finding solve of the per-row entropy equation.
  const Matrix x = Matrix::FromRows({{0, 0}, {0.1, 0}, {10, 10}, {10.1, 10}, {5, -7}});
  const auto aff = PairwiseAffinities(x, 1.2);
  const Matrix expected = Matrix::FromRows({
      {0.0, 0.19125201626740668, 0.0016687471376617322, 0.0016620290061834305, 0.008791059372792598},
      {0.19125201626740668, 0.0, 0.001736212095329246, 0.0017293846008846554, 0.09987259523104872},
      {0.0016687471376617322, 0.001736212095329246, 0.0, 0.19295811655043688, 0.00016174138716047967},
      {0.0016620290061834305, 0.0017293846008846554, 0.19295811655043688, 0.0, 0.00016809835109558353},
      {0.008791059372792598, 0.09987259523104872, 0.00016174138716047967, 0.00016809835109558353, 0.0}});
  for (std::size_t i = 0; i < 5; ++i) {
    for (std::size_t j = 0; j < 5; ++j) EXPECT_NEAR(aff.p(i, j), expected(i, j), 1e-6) << i << "," << j;
  }
  EXPECT_GT(aff.p(0, 1), 100 * aff.p(0, 2));
  EXPECT_GT(aff.p(2, 3), 100 * aff.p(1, 3));
}

TEST(AffinityTest, RejectsBadPerplexity) {
  const Matrix x = RandomPoints(10, 2, 3);
  EXPECT_THROW(PairwiseAffinities(x, 3.0), Error);
  EXPECT_THROW(PairwiseAffinities(RandomPoints(3, 2, 3), 0.5), Error);
}

TEST(TsneTest, ThreeClusterBenchmark) {
  const auto blobs = testdata::GaussianClusters(50, 3, 10, 0.1, 5.0, 11);
  TsneConfig config;
  config.seed = 3;
  const auto start = std::chrono::steady_clock::now();
  const auto res = TsneEmbed(blobs.points, config);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  ASSERT_EQ(res.embedding.rows(), 150u);
  ASSERT_EQ(res.embedding.cols(), 2u);
  EXPECT_GT(testdata::NearestNeighbourPurity(res.embedding, blobs.labels), 0.9);
  EXPECT_GT(testdata::Silhouette(res.embedding, blobs.labels), 0.5);
  EXPECT_LT(secs, 30.0);
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < 150; ++i) {
    mx += res.embedding(i, 0);
    my += res.embedding(i, 1);
  }
  EXPECT_NEAR(mx / 150.0, 0.0, 1e-6);
  EXPECT_NEAR(my / 150.0, 0.0, 1e-6);
  // KL settles over the final iterations.
  const auto& kl = res.kl_history;
  ASSERT_GE(kl.size(), 101u);
  EXPECT_EQ(kl.front().iteration, 0);
  EXPECT_EQ(kl.back().iteration, config.iterations - 1);
  for (std::size_t i = kl.size() - 99; i < kl.size(); ++i) {
    EXPECT_EQ(kl[i].iteration, kl[i - 1].iteration + 1);
    EXPECT_LE(kl[i].kl, kl[i - 1].kl + 1e-3);
  }
  EXPECT_LT(kl.back().kl, kl.front().kl);
}

TEST(TsneTest, InitialKlMatchesDirectSum) {
  const Matrix x = RandomPoints(30, 3, 8);
  TsneConfig config;
  config.perplexity = 5.0;
  config.iterations = 250;
  config.seed = 21;
  const auto res = TsneEmbed(x, config);
  // Rebuild the seeded starting layout and evaluate KL(P||Q) pair by pair.
  std::mt19937_64 rng(config.seed);
  std::normal_distribution<double> init(0.0, 1e-4);
  Matrix y(30, 2);
  for (double& v : y.data()) v = init(rng);
  const Matrix p = PairwiseAffinities(x, config.perplexity).p;
  double z = 0.0;
  for (std::size_t i = 0; i < 30; ++i) {
    for (std::size_t j = 0; j < 30; ++j) {
      if (i != j) z += 1.0 / (1.0 + std::pow(y(i, 0) - y(j, 0), 2) + std::pow(y(i, 1) - y(j, 1), 2));
    }
  }
  double kl = 0.0;
  for (std::size_t i = 0; i < 30; ++i) {
    for (std::size_t j = 0; j < 30; ++j) {
      if (i == j || p(i, j) <= 0.0) continue;
      const double q = 1.0 / (1.0 + std::pow(y(i, 0) - y(j, 0), 2) + std::pow(y(i, 1) - y(j, 1), 2)) / z;
      kl += p(i, j) * std::log(p(i, j) / q);
    }
  }
  ASSERT_FALSE(res.kl_history.empty());
  EXPECT_EQ(res.kl_history.front().iteration, 0);
  EXPECT_NEAR(res.kl_history.front().kl, kl, 1e-9);
}

TEST(TsneTest, DeterministicPerSeed) {
  const Matrix x = RandomPoints(40, 4, 5);
  TsneConfig config;
  config.perplexity = 8.0;
  config.iterations = 300;
  config.seed = 9;
  EXPECT_EQ(TsneEmbed(x, config).embedding, TsneEmbed(x, config).embedding);
  config.seed = 10;
  const auto other = TsneEmbed(x, config).embedding;
  config.seed = 9;
  EXPECT_NE(TsneEmbed(x, config).embedding, other);
}

TEST(TsneTest, InputLimits) {
  TsneConfig config;
  config.perplexity = 2.0;
  EXPECT_THROW(TsneEmbed(RandomPoints(9, 2, 1), config), Error);
  EXPECT_THROW(TsneEmbed(Matrix(kTsneMaxPoints + 1, 2, 0.0), config), Error);
  config.iterations = 100;
  EXPECT_THROW(TsneEmbed(RandomPoints(20, 2, 1), config), Error);
}

}  // namespace
}  // namespace cfx
