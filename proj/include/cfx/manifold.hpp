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

// Latent sampling, feasibility labelling and TSV export of 2D embeddings.

#include <algorithm>
#include <cmath>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <limits>
#include <random>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "cfx/classifier.hpp"
#include "cfx/encoding.hpp"
#include "cfx/error.hpp"
#include "cfx/feasibility.hpp"
#include "cfx/mask.hpp"
#include "cfx/schema.hpp"
#include "cfx/vae.hpp"

namespace cfx {

enum class PointSource { kTrain, kLatent, kPredicted };

inline std::string ToString(PointSource s) {
  switch (s) {
    case PointSource::kTrain:
      return "train";
    case PointSource::kLatent:
      return "latent";
    case PointSource::kPredicted:
      return "predicted";
  }
  return "";
}

inline PointSource ParsePointSource(const std::string& s) {
  if (s == "train") return PointSource::kTrain;
  if (s == "latent") return PointSource::kLatent;
  if (s == "predicted") return PointSource::kPredicted;
  throw Error("unknown point source '" + s + "'");
}

struct ManifoldPoint {
  double x = 0.0;
  double y = 0.0;
  PointSource source = PointSource::kTrain;
  int feasible = 0;

  bool operator==(const ManifoldPoint&) const = default;
};

// True when every constraint in `specs` holds between two decoded instances.
inline bool AllConstraintsHold(const DatasetSchema& schema, const Instance& input, const Instance& cf,
                               std::span<const ConstraintSpec> specs) {
  for (const auto& c : specs) {
    if (!CheckConstraint(schema, input, cf, c)) return false;
  }
  return true;
}

// Row of `reference` closest to `v` in L1 over the mutable columns.
inline std::size_t NearestRow(const Matrix& reference, std::span<const double> v, const MutableMask& mask) {
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  const auto& cols = mask.mutable_columns();
  for (std::size_t r = 0; r < reference.rows(); ++r) {
    const auto row = reference.row(r);
    double d = 0.0;
    for (std::size_t i = 0; i < cols.size() && d < best_d; ++i) d += std::abs(row[cols[i]] - v[i]);
    if (d < best_d) {
      best_d = d;
      best = r;
    }
  }
  return best;
}

struct LatentSamples {
  Matrix latent;                   // n x latent_dim, drawn from N(0, I)
  Matrix decoded;                  // n x encoded width, projected
  std::vector<int> conditions;     // class each sample was decoded for
  std::vector<std::size_t> nearest;  // row of the reference set each sample is compared to
  std::vector<int> labels;         // 1 feasible, 0 infeasible
};

// Draws n prior samples, decodes each for a class drawn with the training
// desired-class balance, pairs it with its nearest row of `train` and labels
// it by the constraints in `specs`.
inline LatentSamples SampleAndLabel(const VaeModel& model, const Classifier& classifier,
                                    const DatasetSchema& schema, const EncodedDataset& train,
                                    std::span<const ConstraintSpec> specs, std::size_t n,
                                    std::mt19937_64& rng) {
  if (n < 1) throw Error("at least one latent sample is required");
  if (train.size() == 0) throw DataError("reference set is empty");
  const auto& state = train.encoding;
  const MutableMask mask = MutableMask::FromEncoding(state);
  const auto predicted = classifier.PredictBatch(train.matrix);
  double desired_one = 0.0;
  for (int p : predicted) desired_one += p == 0 ? 1.0 : 0.0;
  desired_one /= static_cast<double>(predicted.size());

  LatentSamples out;
  out.latent = Matrix(n, model.latent_dim());
  std::normal_distribution<double> normal(0.0, 1.0);
  for (double& v : out.latent.data()) v = normal(rng);
  std::bernoulli_distribution coin(desired_one);
  out.conditions.resize(n);
  for (int& c : out.conditions) c = coin(rng) ? 1 : 0;
  const Matrix relaxed = model.Decode(out.latent, out.conditions);

  out.decoded = Matrix(n, state.width());
  out.nearest.resize(n);
  out.labels.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t ref = NearestRow(train.matrix, relaxed.row(i), mask);
    const auto input = train.matrix.row(ref);
    const auto cf = AssembleCounterfactual(input, relaxed.row(i), mask, state);
    std::copy(cf.begin(), cf.end(), out.decoded.row(i).begin());
    out.nearest[i] = ref;
    out.labels[i] = AllConstraintsHold(schema, Decode(input, state), Decode(cf, state), specs) ? 1 : 0;
  }
  return out;
}

inline std::string ManifoldTsv(std::span<const ManifoldPoint> points) {
  std::string out = "x\ty\tsource\tfeasible\n";
  char buf[32];
  auto put = [&](double v) {
    const auto end = std::to_chars(buf, buf + sizeof buf, v).ptr;
    out.append(buf, end);
    out += '\t';
  };
  for (const auto& p : points) {
    put(p.x);
    put(p.y);
    out += ToString(p.source);
    out += p.feasible ? "\t1\n" : "\t0\n";
  }
  return out;
}

inline void ExportManifold(std::span<const ManifoldPoint> points, const std::filesystem::path& path) {
  if (points.empty()) throw Error("no manifold points to export");
  for (const auto& p : points) {
    if (!std::isfinite(p.x) || !std::isfinite(p.y)) throw NumericError("manifold point has non-finite coordinates");
  }
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
    if (ec) throw Error("cannot create '" + path.parent_path().string() + "': " + ec.message());
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  out << ManifoldTsv(points);
  if (!out.flush()) throw Error("failed writing '" + path.string() + "'");
}

inline std::vector<ManifoldPoint> ReadManifold(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read '" + path.string() + "'");
  std::string line;
  if (!std::getline(in, line) || line != "x\ty\tsource\tfeasible") {
    throw Error("'" + path.string() + "' is not a manifold TSV");
  }
  std::vector<ManifoldPoint> points;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string x, y, source, feasible;
    if (!std::getline(row, x, '\t') || !std::getline(row, y, '\t') || !std::getline(row, source, '\t') ||
        !std::getline(row, feasible, '\t')) {
      throw Error("malformed manifold row: " + line);
    }
    const auto px = ParseNumber(x), py = ParseNumber(y);
    if (!px || !py || (feasible != "0" && feasible != "1")) throw Error("malformed manifold row: " + line);
    points.push_back({*px, *py, ParsePointSource(source), feasible == "1" ? 1 : 0});
  }
  return points;
}

}  // namespace cfx
