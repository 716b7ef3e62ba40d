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

// Counterfactual training objective: validity hinge, L1 proximity,
// constraint penalties, sparsity and the VAE KL term. Penalties act on
// normalized values; categorical causes use their normalized ordinal rank.

#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "cfx/encoding.hpp"
#include "cfx/error.hpp"
#include "cfx/mask.hpp"
#include "cfx/nn.hpp"
#include "cfx/schema.hpp"

namespace cfx {

enum class SparsityMode { kL1, kSmoothL0 };

inline constexpr double kSmoothL0Scale = 0.05;

inline std::string ToString(SparsityMode m) { return m == SparsityMode::kL1 ? "l1" : "smooth_l0"; }

inline SparsityMode ParseSparsityMode(const std::string& s) {
  if (s == "l1") return SparsityMode::kL1;
  if (s == "smooth_l0") return SparsityMode::kSmoothL0;
  throw Error("unknown sparsity mode '" + s + "'");
}

struct LossWeights {
  double validity = 10.0;
  double proximity = 0.3;
  double feasibility = 5.0;
  double sparsity = 0.15;
  double kl = 0.05;
  double hinge_margin = 0.5;

  void Validate() const {
    const std::array<std::pair<const char*, double>, 5> w{
        {{"validity", validity}, {"proximity", proximity}, {"feasibility", feasibility},
         {"sparsity", sparsity}, {"kl", kl}}};
    for (const auto& [name, v] : w) {
      if (!std::isfinite(v) || v < 0.0) {
        throw Error(std::string("loss weight '") + name + "' must be finite and non-negative");
      }
    }
    if (!std::isfinite(hinge_margin) || hinge_margin <= 0.0) {
      throw Error("hinge margin must be positive");
    }
  }
};

struct LossComponents {
  double validity = 0.0;
  double proximity = 0.0;
  double feasibility = 0.0;
  double sparsity = 0.0;
  double kl = 0.0;

  LossComponents& operator+=(const LossComponents& o) {
    validity += o.validity;
    proximity += o.proximity;
    feasibility += o.feasibility;
    sparsity += o.sparsity;
    kl += o.kl;
    return *this;
  }
  LossComponents Scaled(double s) const {
    return {validity * s, proximity * s, feasibility * s, sparsity * s, kl * s};
  }
};

inline double TotalLoss(const LossComponents& c, const LossWeights& w) {
  const std::array<std::pair<const char*, double>, 5> parts{
      {{"validity", c.validity}, {"proximity", c.proximity}, {"feasibility", c.feasibility},
       {"sparsity", c.sparsity}, {"kl", c.kl}}};
  for (const auto& [name, v] : parts) {
    if (!std::isfinite(v)) throw NumericError(std::string("non-finite loss component '") + name + "'");
  }
  return w.validity * c.validity + w.proximity * c.proximity + w.feasibility * c.feasibility +
         w.sparsity * c.sparsity + w.kl * c.kl;
}

// max(0, margin - (logit_desired - logit_other)).
inline double ValidityLoss(double logit0, double logit1, int desired, double margin) {
  const double gap = desired == 1 ? logit1 - logit0 : logit0 - logit1;
  return std::max(0.0, margin - gap);
}

// d/d(logit0, logit1).
inline std::array<double, 2> ValidityGrad(double logit0, double logit1, int desired, double margin) {
  if (ValidityLoss(logit0, logit1, desired, margin) <= 0.0) return {0.0, 0.0};
  return desired == 1 ? std::array<double, 2>{1.0, -1.0} : std::array<double, 2>{-1.0, 1.0};
}

namespace detail {
inline void CheckWidths(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw ShapeError("width mismatch: " + std::to_string(a.size()) + " vs " + std::to_string(b.size()));
  }
}
inline double Sign(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }
}  // namespace detail

// Both vectors restricted to the mutable columns.
inline double ProximityLoss(std::span<const double> x, std::span<const double> x_cf) {
  detail::CheckWidths(x, x_cf);
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += std::abs(x_cf[i] - x[i]);
  return s;
}

inline void ProximityGrad(std::span<const double> x, std::span<const double> x_cf, double scale,
                          std::span<double> grad) {
  for (std::size_t i = 0; i < x.size(); ++i) grad[i] += scale * detail::Sign(x_cf[i] - x[i]);
}

inline double SparsityPenalty(std::span<const double> x, std::span<const double> x_cf, SparsityMode mode) {
  detail::CheckWidths(x, x_cf);
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d = std::abs(x_cf[i] - x[i]);
    s += mode == SparsityMode::kL1 ? d : 1.0 - std::exp(-d / kSmoothL0Scale);
  }
  return s;
}

inline void SparsityGrad(std::span<const double> x, std::span<const double> x_cf, SparsityMode mode,
                         double scale, std::span<double> grad) {
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d = x_cf[i] - x[i];
    const double sg = detail::Sign(d);
    grad[i] += mode == SparsityMode::kL1
                   ? scale * sg
                   : scale * sg * std::exp(-std::abs(d) / kSmoothL0Scale) / kSmoothL0Scale;
  }
}

// -min(0, x_cf - x) for non_decrease, -min(0, x - x_cf) for non_increase.
inline double UnaryPenalty(double x, double x_cf,
                           UnaryDirection dir = UnaryDirection::kNonDecrease) {
  const double d = dir == UnaryDirection::kNonDecrease ? x_cf - x : x - x_cf;
  return std::max(0.0, -d);
}

inline double UnaryPenaltyGrad(double x, double x_cf,
                               UnaryDirection dir = UnaryDirection::kNonDecrease) {
  if (UnaryPenalty(x, x_cf, dir) <= 0.0) return 0.0;
  return dir == UnaryDirection::kNonDecrease ? -1.0 : 1.0;
}

// Hinge mode:
//   max(0, x1 - x1_cf) + max(0, c1 + c2 (x1_cf - x1) - (x2_cf - x2)) + unary(x2, x2_cf)
// Zero only when the cause does not decrease and the effect rises by at least
// c1 + c2 times the cause increase; with c1 >= 0 and c2 > 0 this implies the
// constraint check on the decoded pair.
// Literal mode: (x2_cf - c1 - c2 x1_cf) - min(0, c2).
inline double BinaryPenalty(double x1, double x1_cf, double x2, double x2_cf, const BinaryConstraint& c) {
  if (c.mode == BinaryMode::kLiteral) {
    return (x2_cf - c.c1 - c.c2 * x1_cf) - std::min(0.0, c.c2);
  }
  return std::max(0.0, x1 - x1_cf) +
         std::max(0.0, c.c1 + c.c2 * (x1_cf - x1) - (x2_cf - x2)) + UnaryPenalty(x2, x2_cf);
}

// d/d(x1_cf, x2_cf).
inline std::array<double, 2> BinaryPenaltyGrad(double x1, double x1_cf, double x2, double x2_cf,
                                               const BinaryConstraint& c) {
  if (c.mode == BinaryMode::kLiteral) return {-c.c2, 1.0};
  std::array<double, 2> g{0.0, UnaryPenaltyGrad(x2, x2_cf)};
  if (x1 - x1_cf > 0.0) g[0] -= 1.0;
  if (c.c1 + c.c2 * (x1_cf - x1) - (x2_cf - x2) > 0.0) {
    g[0] += c.c2;
    g[1] -= 1.0;
  }
  return g;
}

// -1/2 sum(1 + logvar - mu^2 - exp(logvar)).
inline double KlLoss(std::span<const double> mu, std::span<const double> logvar) {
  detail::CheckWidths(mu, logvar);
  double s = 0.0;
  for (std::size_t i = 0; i < mu.size(); ++i) {
    s += 1.0 + logvar[i] - mu[i] * mu[i] - std::exp(logvar[i]);
  }
  return -0.5 * s;
}

inline void KlGrad(std::span<const double> mu, std::span<const double> logvar, double scale,
                   std::span<double> grad_mu, std::span<double> grad_logvar) {
  for (std::size_t i = 0; i < mu.size(); ++i) {
    grad_mu[i] += scale * mu[i];
    grad_logvar[i] += scale * 0.5 * (std::exp(logvar[i]) - 1.0);
  }
}

// A constraint resolved against the encoded layout. Values are read from the
// relaxed mutable output when the column is mutable and from the input row
// otherwise.
class ConstraintTerm {
 public:
  ConstraintTerm(ConstraintSpec spec, const EncodingState& state, const MutableMask& mask)
      : spec_(std::move(spec)) {
    if (spec_.is_unary()) {
      effect_ = Resolve(state.Feature(spec_.unary().feature), mask);
    } else {
      cause_ = Resolve(state.Feature(spec_.binary().cause_feature), mask);
      effect_ = Resolve(state.Feature(spec_.binary().effect_feature), mask);
    }
  }

  const ConstraintSpec& spec() const { return spec_; }

  // Penalty for one row; when grad is non-empty, adds scale * dP/d(out).
  double Evaluate(std::span<const double> x_full, std::span<const double> x_mut,
                  std::span<const double> out, double scale, std::span<double> grad) const {
    const double x2 = effect_.Value(x_full, x_mut);
    const double x2_cf = effect_.Value(x_full, out);
    if (spec_.is_unary()) {
      const auto dir = spec_.unary().direction;
      if (!grad.empty()) effect_.AddGrad(out, scale * UnaryPenaltyGrad(x2, x2_cf, dir), grad);
      return UnaryPenalty(x2, x2_cf, dir);
    }
    const auto& b = spec_.binary();
    const double x1 = cause_.Value(x_full, x_mut);
    const double x1_cf = cause_.Value(x_full, out);
    if (!grad.empty()) {
      const auto g = BinaryPenaltyGrad(x1, x1_cf, x2, x2_cf, b);
      cause_.AddGrad(out, scale * g[0], grad);
      effect_.AddGrad(out, scale * g[1], grad);
    }
    return BinaryPenalty(x1, x1_cf, x2, x2_cf, b);
  }

  // Records the sign of every hinge argument at this point.
  void AddKinks(std::span<const double> x_full, std::span<const double> x_mut,
                std::span<const double> out, nn::KinkSignature& kinks) const {
    const double x2 = effect_.Value(x_full, x_mut);
    const double x2_cf = effect_.Value(x_full, out);
    kinks.Add(x2_cf - x2);
    if (spec_.is_unary()) return;
    const auto& b = spec_.binary();
    const double x1 = cause_.Value(x_full, x_mut);
    const double x1_cf = cause_.Value(x_full, out);
    kinks.Add(x1_cf - x1);
    kinks.Add(b.c1 + b.c2 * (x1_cf - x1) - (x2_cf - x2));
  }

 private:
  // Either a single column or a ranked one-hot group read as its expected
  // normalized rank sum(o_k r_k) / sum(o_k).
  struct Accessor {
    std::vector<std::size_t> full_cols;
    std::vector<std::size_t> mut_cols;  // empty when immutable
    std::vector<double> ranks;

    bool mutable_() const { return !mut_cols.empty(); }

    // `v` is a mutable-width row (input or output).
    double Value(std::span<const double> x_full, std::span<const double> v) const {
      if (ranks.empty()) return mutable_() ? v[mut_cols[0]] : x_full[full_cols[0]];
      double num = 0.0, den = 0.0;
      for (std::size_t k = 0; k < ranks.size(); ++k) {
        const double o = mutable_() ? v[mut_cols[k]] : x_full[full_cols[k]];
        num += o * ranks[k];
        den += o;
      }
      return den > 0.0 ? num / den : 0.0;
    }

    void AddGrad(std::span<const double> out, double g, std::span<double> grad) const {
      if (!mutable_() || g == 0.0) return;
      if (ranks.empty()) {
        grad[mut_cols[0]] += g;
        return;
      }
      double num = 0.0, den = 0.0;
      for (std::size_t k = 0; k < ranks.size(); ++k) {
        num += out[mut_cols[k]] * ranks[k];
        den += out[mut_cols[k]];
      }
      if (den <= 0.0) return;
      const double mean = num / den;
      for (std::size_t k = 0; k < ranks.size(); ++k) grad[mut_cols[k]] += g * (ranks[k] - mean) / den;
    }
  };

  static Accessor Resolve(const FeatureEncoding& f, const MutableMask& mask) {
    Accessor a;
    for (std::size_t k = 0; k < f.width; ++k) {
      a.full_cols.push_back(f.offset + k);
      if (const auto pos = mask.MutablePosition(f.offset + k)) a.mut_cols.push_back(*pos);
    }
    if (f.kind == FeatureKind::kCategorical) {
      if (f.ranks.empty()) throw SchemaError("feature '" + f.name + "' has no ordinal ranks");
      for (std::size_t k = 0; k < f.width; ++k) a.ranks.push_back(f.NormalizedRank(k));
    }
    return a;
  }

  ConstraintSpec spec_;
  Accessor cause_;
  Accessor effect_;
};

}  // namespace cfx
