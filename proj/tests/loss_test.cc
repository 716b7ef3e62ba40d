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

#include "cfx/loss.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <random>

#include "cfx/feasibility.hpp"
#include "cfx/nn.hpp"
#include "support/fixtures.hpp"

namespace cfx {
namespace {

double Norm(double age) { return (age - 17.0) / 73.0; }

TEST(ValidityLossTest, Examples) {
  EXPECT_DOUBLE_EQ(ValidityLoss(0, 5, 1, 0.5), 0.0);
  EXPECT_DOUBLE_EQ(ValidityLoss(2, 2, 1, 0.5), 0.5);
  EXPECT_DOUBLE_EQ(ValidityLoss(3, 0, 1, 0.5), 3.5);
  EXPECT_DOUBLE_EQ(ValidityLoss(3, 0, 0, 0.5), 0.0);
  EXPECT_DOUBLE_EQ(ValidityLoss(1, 1.5, 1, 0.5), 0.0);
}

TEST(ValidityLossTest, Gradient) {
  const auto g = ValidityGrad(2, 2, 1, 0.5);
  EXPECT_EQ(g[0], 1.0);
  EXPECT_EQ(g[1], -1.0);
  const auto z = ValidityGrad(0, 5, 1, 0.5);
  EXPECT_EQ(z[0], 0.0);
  EXPECT_EQ(z[1], 0.0);
}

TEST(ProximityLossTest, Examples) {
  const std::vector<double> x{0.1, 0.5, 0.9};
  EXPECT_DOUBLE_EQ(ProximityLoss(x, x), 0.0);
  std::vector<double> y = x;
  y[1] = 0.8;
  EXPECT_NEAR(ProximityLoss(x, y), 0.3, 1e-15);
  EXPECT_THROW(ProximityLoss(x, std::vector<double>{0.1}), ShapeError);
}

TEST(ProximityLossTest, MatchesNaiveSum) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> a(17), b(17);
    for (auto& v : a) v = u(rng);
    for (auto& v : b) v = u(rng);
    const double naive = std::transform_reduce(a.begin(), a.end(), b.begin(), 0.0, std::plus<>(),
                                               [](double p, double q) { return std::fabs(p - q); });
    EXPECT_NEAR(ProximityLoss(a, b), naive, 1e-12);
  }
}

TEST(UnaryPenaltyTest, Examples) {
  EXPECT_EQ(UnaryPenalty(Norm(38), Norm(43.55)), 0.0);
  EXPECT_NEAR(UnaryPenalty(0.5, 0.3), 0.2, 1e-15);
  EXPECT_EQ(UnaryPenalty(0.4, 0.4), 0.0);
  EXPECT_EQ(UnaryPenaltyGrad(0.4, 0.4), 0.0);
  EXPECT_EQ(UnaryPenaltyGrad(0.5, 0.3), -1.0);
  EXPECT_NEAR(UnaryPenalty(0.3, 0.5, UnaryDirection::kNonIncrease), 0.2, 1e-15);
}

BinaryConstraint Edu(double c1, double c2, BinaryMode mode = BinaryMode::kHinge) {
  return {"education", "age", c1, c2, mode};
}

TEST(BinaryPenaltyTest, TableVPairIsPenaltyFree) {
  // hs_grad (rank 1 of 0..7) to doctorate (rank 7); age 38 -> 43.55.
  EXPECT_EQ(BinaryPenalty(1.0 / 7.0, 1.0, Norm(38), Norm(43.55), Edu(0, 0.05)), 0.0);
  // The default slope asks for a larger age increase than the example shows.
  EXPECT_NEAR(BinaryPenalty(1.0 / 7.0, 1.0, Norm(38), Norm(43.55), Edu(0, 0.1)),
              0.1 * 6.0 / 7.0 - 5.55 / 73.0, 1e-12);
}

TEST(BinaryPenaltyTest, CauseUpEffectUnchanged) {
  EXPECT_NEAR(BinaryPenalty(0.0, 0.9, 0.4, 0.4, Edu(0, 1)), 0.9, 1e-15);
}

TEST(BinaryPenaltyTest, DegenerateSlope) {
  EXPECT_EQ(BinaryPenalty(0.2, 0.6, 0.4, 0.4, Edu(0, 0)), 0.0);
}

TEST(BinaryPenaltyTest, CauseDecreaseIsPenalized) {
  EXPECT_NEAR(BinaryPenalty(0.6, 0.2, 0.4, 0.9, Edu(0, 0.1)), 0.4, 1e-15);
}

TEST(BinaryPenaltyTest, EffectDecreaseIsPenalized) {
  // Hinge: 0.1 * 0 - (-0.2) = 0.2 plus unary 0.2.
  EXPECT_NEAR(BinaryPenalty(0.5, 0.5, 0.6, 0.4, Edu(0, 0.1)), 0.4, 1e-15);
}

TEST(BinaryPenaltyTest, LiteralMode) {
  EXPECT_NEAR(BinaryPenalty(0.0, 0.5, 0.0, 0.3, Edu(0.1, 0.2, BinaryMode::kLiteral)), 0.3 - 0.1 - 0.1,
              1e-15);
  EXPECT_NEAR(BinaryPenalty(0.0, 0.5, 0.0, 0.3, Edu(0.0, -0.2, BinaryMode::kLiteral)), 0.3 + 0.1 + 0.2,
              1e-15);
  const auto g = BinaryPenaltyGrad(0, 0.5, 0, 0.3, Edu(0.1, 0.2, BinaryMode::kLiteral));
  EXPECT_DOUBLE_EQ(g[0], -0.2);
  EXPECT_DOUBLE_EQ(g[1], 1.0);
}

TEST(SparsityPenaltyTest, Examples) {
  const std::vector<double> x{0.1, 0.5};
  EXPECT_EQ(SparsityPenalty(x, x, SparsityMode::kL1), 0.0);
  EXPECT_EQ(SparsityPenalty(x, x, SparsityMode::kSmoothL0), 0.0);
  const std::vector<double> y{0.1, 0.7};
  EXPECT_NEAR(SparsityPenalty(x, y, SparsityMode::kL1), 0.2, 1e-15);
  EXPECT_NEAR(SparsityPenalty(x, y, SparsityMode::kSmoothL0), 1.0 - std::exp(-4.0), 1e-12);
}

TEST(KlLossTest, Examples) {
  const std::vector<double> zero(10, 0.0);
  EXPECT_EQ(KlLoss(zero, zero), 0.0);
  EXPECT_DOUBLE_EQ(KlLoss(std::vector<double>{1.0}, std::vector<double>{0.0}), 0.5);
  std::mt19937_64 rng(1);
  std::normal_distribution<double> n(0.0, 2.0);
  for (int i = 0; i < 1000; ++i) {
    const std::vector<double> mu{n(rng), n(rng)}, lv{n(rng), n(rng)};
    EXPECT_GE(KlLoss(mu, lv), 0.0);
  }
}

TEST(TotalLossTest, Examples) {
  const LossComponents c{1, 2, 3, 4, 5};
  EXPECT_EQ(TotalLoss(c, {0, 0, 0, 0, 0, 0.5}), 0.0);
  EXPECT_EQ(TotalLoss(c, {1, 1, 1, 1, 1, 0.5}), 15.0);
  LossWeights w;
  const double base = TotalLoss(c, w);
  w.feasibility *= 2;
  EXPECT_DOUBLE_EQ(TotalLoss(c, w) - base, w.feasibility / 2.0 * 3.0);
}

TEST(TotalLossTest, LinearInEachWeight) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 3.0);
  for (int trial = 0; trial < 100; ++trial) {
    const LossComponents c{u(rng), u(rng), u(rng), u(rng), u(rng)};
    LossWeights w{u(rng), u(rng), u(rng), u(rng), u(rng), 0.5};
    const double a = TotalLoss(c, w);
    w.sparsity += 1.0;
    EXPECT_NEAR(TotalLoss(c, w) - a, c.sparsity, 1e-12);
  }
}

TEST(TotalLossTest, NamesNonFiniteComponent) {
  LossComponents c{1, 2, 3, 4, 5};
  c.kl = std::nan("");
  try {
    TotalLoss(c, {});
    FAIL();
  } catch (const NumericError& e) {
    EXPECT_NE(std::string(e.what()).find("'kl'"), std::string::npos);
  }
}

TEST(LossWeightsTest, Validation) {
  EXPECT_NO_THROW(LossWeights{}.Validate());
  EXPECT_THROW((LossWeights{-1, 1, 1, 1, 1, 0.5}.Validate()), Error);
  EXPECT_THROW((LossWeights{1, 1, 1, 1, 1, 0.0}.Validate()), Error);
}

// Central differences of `f` at `v` in every coordinate.
template <typename F>
std::vector<double> Numeric(F f, std::vector<double> v, double h = 1e-6) {
  std::vector<double> g(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double keep = v[i];
    v[i] = keep + h;
    const double up = f(v);
    v[i] = keep - h;
    const double down = f(v);
    v[i] = keep;
    g[i] = (up - down) / (2 * h);
  }
  return g;
}

void ExpectClose(const std::vector<double>& analytic, const std::vector<double>& numeric) {
  for (std::size_t i = 0; i < analytic.size(); ++i) {
    EXPECT_LT(nn::RelativeError(analytic[i], numeric[i]), 1e-3) << "coordinate " << i;
  }
}

TEST(LossGradientTest, ElementwiseTerms) {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> x(8), cf(8);
    for (auto& v : x) v = u(rng);
    for (std::size_t i = 0; i < 8; ++i) {
      // Keep away from the |.| kink.
      const double d = 0.05 + 0.4 * u(rng);
      cf[i] = x[i] + (u(rng) < 0.5 ? d : -d);
    }
    std::vector<double> g(8, 0.0);
    ProximityGrad(x, cf, 1.0, g);
    ExpectClose(g, Numeric([&](const std::vector<double>& v) { return ProximityLoss(x, v); }, cf));
    for (auto mode : {SparsityMode::kL1, SparsityMode::kSmoothL0}) {
      std::fill(g.begin(), g.end(), 0.0);
      SparsityGrad(x, cf, mode, 1.0, g);
      ExpectClose(g, Numeric([&](const std::vector<double>& v) { return SparsityPenalty(x, v, mode); }, cf));
    }
  }
}

TEST(LossGradientTest, KlTerm) {
  std::mt19937_64 rng(10);
  std::normal_distribution<double> n(0.0, 1.0);
  std::vector<double> mu(10), lv(10);
  for (auto& v : mu) v = n(rng);
  for (auto& v : lv) v = n(rng);
  std::vector<double> gm(10, 0.0), gl(10, 0.0);
  KlGrad(mu, lv, 1.0, gm, gl);
  ExpectClose(gm, Numeric([&](const std::vector<double>& v) { return KlLoss(v, lv); }, mu));
  ExpectClose(gl, Numeric([&](const std::vector<double>& v) { return KlLoss(mu, v); }, lv));
}

class ConstraintTermTest : public ::testing::Test {
 protected:
  const testdata::Adult& adult = testdata::LoadAdult();
  MutableMask mask = MutableMask::FromEncoding(adult.state);

  std::vector<double> MutablePart(const std::vector<double>& full) const {
    std::vector<double> out;
    for (std::size_t c : mask.mutable_columns()) out.push_back(full[c]);
    return out;
  }
};

TEST_F(ConstraintTermTest, GradientMatchesFiniteDifferences) {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> u(0.05, 0.95);
  int checked = 0;
  for (const auto& spec : adult.schema.constraints) {
    const ConstraintTerm term(spec, adult.state, mask);
    for (int trial = 0; trial < 50; ++trial) {
      const auto x_full = Encode(testdata::RandomInstance(adult.state, rng), adult.state);
      const auto x_mut = MutablePart(x_full);
      std::vector<double> out(x_mut.size());
      for (auto& v : out) v = u(rng);
      auto f = [&](const std::vector<double>& o) { return term.Evaluate(x_full, x_mut, o, 1.0, {}); };
      std::vector<double> g(out.size(), 0.0);
      term.Evaluate(x_full, x_mut, out, 1.0, g);
      const auto num = Numeric(f, out);
      // Skip points within a step of a hinge kink.
      const double h = 1e-6;
      bool near_kink = false;
      for (std::size_t i = 0; i < out.size() && !near_kink; ++i) {
        auto a = out, b = out;
        a[i] += h;
        b[i] -= h;
        const double mid = f(out);
        near_kink = std::abs((f(a) - mid) - (mid - f(b))) > 1e-9;
      }
      if (near_kink) continue;
      ExpectClose(g, num);
      ++checked;
    }
  }
  EXPECT_GT(checked, 60);
}

TEST_F(ConstraintTermTest, ZeroPenaltyImpliesConstraintHolds) {
  std::mt19937_64 rng(2024);
  int zero_unary = 0, zero_binary = 0;
  for (int i = 0; i < 10000; ++i) {
    const Instance x = testdata::RandomInstance(adult.state, rng);
    const Instance cf = testdata::Perturb(x, adult.state, rng);
    const auto xv = Encode(x, adult.state);
    const auto cv = Encode(cf, adult.state);
    const auto x_mut = MutablePart(xv);
    const auto c_mut = MutablePart(cv);
    const Instance xd = Decode(xv, adult.state);
    const Instance cd = Decode(cv, adult.state);
    for (const auto& spec : adult.schema.constraints) {
      const double p = ConstraintTerm(spec, adult.state, mask).Evaluate(xv, x_mut, c_mut, 1.0, {});
      ASSERT_GE(p, 0.0);
      const bool holds = CheckConstraint(adult.schema, xd, cd, spec);
      if (spec.is_unary()) {
        EXPECT_EQ(p == 0.0, holds);
        zero_unary += p == 0.0;
      } else if (p == 0.0) {
        EXPECT_TRUE(holds);
        ++zero_binary;
      }
    }
  }
  EXPECT_GT(zero_unary, 1000);
  EXPECT_GT(zero_binary, 1000);
}

TEST_F(ConstraintTermTest, CategoricalCauseUsesExpectedRank) {
  const ConstraintSpec& spec = adult.schema.constraints.at(1);
  ASSERT_TRUE(spec.is_binary());
  const ConstraintTerm term(spec, adult.state, mask);
  const auto xv = Encode(testdata::TableVInput(), adult.state);
  const auto cv = Encode(testdata::TableVCounterfactual(), adult.state);
  const double p = term.Evaluate(xv, MutablePart(xv), MutablePart(cv), 1.0, {});
  EXPECT_NEAR(p, 0.1 * 6.0 / 7.0 - 5.55 / 73.0, 1e-12);
}

}  // namespace
}  // namespace cfx
