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

#include "cfx/pipeline.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "support/bundle_fixture.hpp"
#include "support/metric_oracle.hpp"

namespace cfx {
namespace {

const testdata::Adult& adult = testdata::LoadAdult();

TEST(PipelineTest, TrainingRecordsPerEpochLogAndValidationMetrics) {
  const auto& b = testdata::QuickBundle();
  ASSERT_EQ(b.vae_log.size(), 4u);
  for (std::size_t i = 0; i < b.vae_log.size(); ++i) {
    EXPECT_EQ(b.vae_log[i].epoch, static_cast<int>(i + 1));
    EXPECT_TRUE(std::isfinite(b.vae_log[i].total));
  }
  ASSERT_TRUE(b.metrics);
  EXPECT_EQ(b.metrics->n, 3256u);
}

TEST(PipelineTest, TrainingIsSeedDeterministic) {
  const auto again = TrainPipeline(adult.schema, adult.table, testdata::QuickConfig());
  EXPECT_EQ(SerializeBundle(again), SerializeBundle(testdata::QuickBundle()));
}

TEST(PipelineTest, ZeroEpochsGivesUntrainedModel) {
  auto config = testdata::QuickConfig();
  config.classifier.epochs = 1;
  config.vae.epochs = 0;
  const auto b = TrainPipeline(adult.schema, adult.table, config);
  EXPECT_TRUE(b.vae_log.empty());
  EXPECT_EQ(b.vae.ParameterDigest(), [&] {
    std::mt19937_64 rng(config.vae.seed);
    return VaeModel(MutableMask::FromEncoding(b.encoding).mutable_width(), rng).ParameterDigest();
  }());
}

TEST(PipelineTest, EvaluationIsDeterministicAndMatchesOracle) {
  const auto& b = testdata::QuickBundle();
  const auto rows = SplitRows(b, adult.table, EvalSplit::kTest);
  EXPECT_EQ(rows.size(), 3257u);
  const auto r1 = EvaluateRows(b, rows, 5);
  const auto r2 = EvaluatePipeline(b, adult.table, EvalSplit::kTest, 5);
  EXPECT_EQ(r1, r2);
  EXPECT_EQ(ReportCsv(r1), ReportCsv(r2));

  const auto results = CounterfactualsForRows(b, rows, 5);
  const auto o = oracle::Compute(results, adult.schema, adult.state);
  EXPECT_NEAR(r1.validity_pct, o.validity, 1e-9);
  EXPECT_NEAR(r1.feasibility_unary_pct, o.feas_unary, 1e-9);
  EXPECT_NEAR(r1.feasibility_binary_pct, o.feas_binary, 1e-9);
  EXPECT_NEAR(r1.continuous_proximity, o.cont_prox, 1e-9);
  EXPECT_NEAR(r1.categorical_proximity, o.cat_prox, 1e-9);
  EXPECT_NEAR(r1.sparsity_mean, o.sparsity, 1e-9);
  EXPECT_EQ(r1.config_digest, ConfigDigest(b.config, b.schema));
}

TEST(PipelineTest, RowGeneratorsAreIndependentOfOrder) {
  const auto& b = testdata::QuickBundle();
  const auto rows = SplitRows(b, adult.table, EvalSplit::kValidation);
  const auto all = CounterfactualsForRows(b, SubsetRows(rows, std::vector<std::size_t>{0, 1, 2, 3, 4, 5, 6, 7}), 9);
  auto rng = RowRng(9, 7);
  const auto one = GenerateCounterfactuals(b.vae, b.classifier, b.schema, b.encoding, rows.matrix.row(7),
                                           std::nullopt, 1, rng);
  EXPECT_EQ(all[7].cf_vector, one.front().cf_vector);
  auto a = RowRng(1, 2), c = RowRng(2, 1);
  EXPECT_NE(a(), c());
}

TEST(PipelineTest, EmptySplitIsAnError) {
  const auto& b = testdata::QuickBundle();
  EncodedDataset empty;
  empty.encoding = b.encoding;
  empty.matrix = Matrix(0, b.encoding.width());
  EXPECT_THROW(EvaluateRows(b, empty, 0), DataError);
}

TEST(PipelineTest, GenerateTableVKeepsImmutables) {
  const auto& b = testdata::QuickBundle();
  const auto results = GeneratePipeline(b, testdata::TableVInput(), std::nullopt, 1, 0);
  ASSERT_EQ(results.size(), 1u);
  EXPECT_EQ(results[0].cf.at("race"), Value(std::string("white")));
  EXPECT_EQ(results[0].cf.at("gender"), Value(std::string("male")));
  EXPECT_EQ(results[0].desired_class, 1 - results[0].input_class);
  EXPECT_EQ(GeneratePipeline(b, testdata::TableVInput(), 1, 5, 3).size(), 5u);
  EXPECT_THROW(GeneratePipeline(b, testdata::TableVInput(), std::nullopt, 51, 0), Error);
  EXPECT_THROW(GeneratePipeline(b, testdata::TableVInput(), std::nullopt, 0, 0), Error);
  EXPECT_THROW(GeneratePipeline(b, testdata::TableVInput(), 2, 1, 0), Error);
}

TEST(PipelineTest, UnknownCategoryIsItemized) {
  auto j = testdata::TableVJson();
  j["education"] = "astronaut";
  j.erase("age");
  try {
    InstanceFromJson(j, testdata::QuickBundle().encoding);
    FAIL() << "expected ValidationError";
  } catch (const ValidationError& e) {
    ASSERT_EQ(e.errors().size(), 2u);
    std::set<std::string> fields;
    for (const auto& f : e.errors()) fields.insert(f.field);
    EXPECT_EQ(fields, (std::set<std::string>{"age", "education"}));
  }
}

TEST(PipelineTest, ResultJsonIsConsistent) {
  const auto& b = testdata::QuickBundle();
  for (const auto& r : GeneratePipeline(b, testdata::TableVInput(), std::nullopt, 10, 4)) {
    const auto j = CfResultToJson(r);
    EXPECT_EQ(j.at("sparsity").get<int>(), static_cast<int>(j.at("changed_features").size()));
    EXPECT_EQ(j.at("changes").size(), j.at("changed_features").size());
    EXPECT_EQ(j.at("feasible").at("unary"), r.FeasibleFor(ConstraintKind::kUnary));
    EXPECT_EQ(j.at("feasible").at("binary"), r.FeasibleFor(ConstraintKind::kBinary));
    EXPECT_EQ(j.at("cf_class"), r.cf_class);
    EXPECT_EQ(InstanceFromJson(j.at("cf"), b.encoding), r.cf);
  }
}

TEST(PipelineTest, EmbedCapAndShape) {
  const auto& b = testdata::QuickBundle();
  try {
    EmbedPipeline(b, adult.table, 6000, 7);
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("5000"), std::string::npos);
  }
  EXPECT_THROW(EmbedPipeline(b, adult.table, 5, 7), Error);
  const auto pts = EmbedPipeline(b, adult.table, 40, 7, 250);
  ASSERT_EQ(pts.size(), 120u);
  std::map<PointSource, int> per_source;
  for (const auto& p : pts) {
    ++per_source[p.source];
    EXPECT_TRUE(p.feasible == 0 || p.feasible == 1);
    EXPECT_TRUE(std::isfinite(p.x) && std::isfinite(p.y));
  }
  EXPECT_EQ(per_source[PointSource::kTrain], 40);
  EXPECT_EQ(per_source[PointSource::kLatent], 40);
  EXPECT_EQ(per_source[PointSource::kPredicted], 40);
  EXPECT_EQ(ManifoldTsv(pts), ManifoldTsv(EmbedPipeline(b, adult.table, 40, 7, 250)));
  EXPECT_NE(ManifoldTsv(pts), ManifoldTsv(EmbedPipeline(b, adult.table, 40, 8, 250)));
}

}  // namespace
}  // namespace cfx
