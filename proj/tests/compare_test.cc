/*
 * Copyright 2026 The dcaudit Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */


#include <cmath>
#include <memory>
#include <random>
#include <vector>

#include "dcaudit/binning.h"
#include "dcaudit/compare.h"
#include "dcaudit/distill.h"
#include "dcaudit/random.h"
#include "dcaudit/synthetic.h"
#include "gmock/gmock.h"
#include "gtest/gtest.h"

namespace dcaudit::compare {
namespace {

using ::testing::HasSubstr;

// One single-bin feature; values[k][l] become the bag contributions.
distill::BagEnsemble FromValues(const std::vector<std::vector<double>>& values) {
  distill::BagEnsemble e;
  e.outer_folds = static_cast<int>(values.size());
  e.inner_folds = static_cast<int>(values[0].size());
  for (const auto& row : values) {
    for (const double v : row) {
      gam::AdditiveModel m;
      m.feature_names = {"f"};
      m.shapes = {{0, {v, -v}}};
      e.models.push_back(m);
    }
  }
  return e;
}

TEST(LittleBagsTest, WorkedExample) {
  auto curve = Curve(FromValues({{0, 2}, {3, 3}}), 0);
  ASSERT_TRUE(curve.ok());
  EXPECT_DOUBLE_EQ(curve->mean[0], 2);
  EXPECT_DOUBLE_EQ(curve->variance[0], 1);
  EXPECT_DOUBLE_EQ(curve->lower[0], 2 - kZ95);
  EXPECT_DOUBLE_EQ(curve->upper[0], 2 + kZ95);
}

TEST(LittleBagsTest, MatchesLiteralFormula) {
  Rng rng(1);
  std::normal_distribution<double> normal(0, 1);
  for (int K = 2; K <= 5; ++K) {
    for (int L = 2; L <= 5; ++L) {
      std::vector<double> v(K * L);
      for (double& x : v) x = normal(rng);
      double grand = 0;
      for (const double x : v) grand += x;
      grand /= K * L;
      double expected = 0;
      for (int k = 0; k < K; ++k) {
        double inner = 0;
        for (int l = 0; l < L; ++l) inner += v[k * L + l];
        expected += std::pow(inner / L - grand, 2);
      }
      expected /= K;
      EXPECT_NEAR(LittleBagsVariance(v, K, L), expected, 1e-14);
      EXPECT_NEAR(LittleBagsMean(v), grand, 1e-14);
    }
  }
}

TEST(LittleBagsTest, ConstantBagsHaveZeroWidth) {
  auto curve = Curve(FromValues({{1.5, 1.5}, {1.5, 1.5}}), 0);
  ASSERT_TRUE(curve.ok());
  EXPECT_EQ(curve->variance[0], 0);
  EXPECT_EQ(curve->lower[0], 1.5);
  EXPECT_EQ(curve->upper[0], 1.5);
}

TEST(DifferenceTest, IdenticalEnsemblesGiveZero) {
  const distill::BagEnsemble e = FromValues({{0.1, 0.7}, {-0.4, 0.9}, {2, 3}});
  auto diff = Difference(e, e, 0);
  ASSERT_TRUE(diff.ok());
  for (int b = 0; b < diff->num_bins(); ++b) {
    EXPECT_EQ(diff->mean[b], 0);
    EXPECT_EQ(diff->variance[b], 0);
    EXPECT_FALSE(diff->significant[b]);
  }
  EXPECT_FALSE(diff->any_floored());
}

TEST(DifferenceTest, VarianceIncludesCovarianceAndIsSymmetric) {
  Rng rng(2);
  std::normal_distribution<double> normal(0, 1);
  std::vector<std::vector<double>> a(4, std::vector<double>(3));
  std::vector<std::vector<double>> b = a;
  std::vector<double> flat_a, flat_b;
  for (int k = 0; k < 4; ++k) {
    for (int l = 0; l < 3; ++l) {
      a[k][l] = normal(rng);
      b[k][l] = 0.5 * a[k][l] + normal(rng);
      flat_a.push_back(a[k][l]);
      flat_b.push_back(b[k][l]);
    }
  }
  auto ab = Difference(FromValues(a), FromValues(b), 0);
  auto ba = Difference(FromValues(b), FromValues(a), 0);
  ASSERT_TRUE(ab.ok() && ba.ok());
  // The difference of bag-paired values has exactly Va + Vb - 2 Cov.
  std::vector<double> d(flat_a.size());
  for (size_t i = 0; i < d.size(); ++i) d[i] = flat_a[i] - flat_b[i];
  EXPECT_NEAR(ab->variance[0], LittleBagsVariance(d, 4, 3), 1e-12);
  EXPECT_DOUBLE_EQ(ab->mean[0], -ba->mean[0]);
  EXPECT_DOUBLE_EQ(ab->variance[0], ba->variance[0]);
  EXPECT_DOUBLE_EQ(ab->lower[0], -ba->upper[0]);
}

TEST(CurveTest, Errors) {
  EXPECT_EQ(Curve(FromValues({{1, 2}, {3, 4}}), 3).status().code(),
            absl::StatusCode::kNotFound);
  EXPECT_FALSE(Curve(FromValues({{1, 2}}), 0).ok());
  EXPECT_THAT(Difference(FromValues({{1, 2}, {3, 4}}),
                         FromValues({{1, 2, 3}, {3, 4, 5}}), 0)
                  .status()
                  .message(),
              HasSubstr("mismatched bag plans"));
}

struct Trained {
  std::unique_ptr<AuditDataset> data;
  std::unique_ptr<BinnedMatrix> x;
  std::unique_ptr<distill::PairedEnsembles> paired;
};

Trained Train(absl::StatusOr<AuditDataset> data, int max_bins, int folds) {
  EXPECT_TRUE(data.ok());
  Trained t;
  t.data = std::make_unique<AuditDataset>(*std::move(data));
  auto schema = FitSchema(*t.data, max_bins);
  auto x = Bin(*t.data, std::make_shared<const FeatureSchema>(*schema));
  t.x = std::make_unique<BinnedMatrix>(*std::move(x));
  auto plan = distill::PlanBags(t.data->LabeledRows().size(), folds, folds, 3);
  gam::TrainConfig config;
  config.learning_rate = 0.05;
  auto paired = distill::TrainPaired(*t.data, *t.x, std::nullopt, *plan, config);
  EXPECT_TRUE(paired.ok()) << paired.status();
  t.paired = std::make_unique<distill::PairedEnsembles>(*std::move(paired));
  return t;
}

TEST(SummarizeTest, GenderFlipShowsOppositeEffects) {
  const double delta = 0.5;
  Trained t = Train(synthetic::GenderFlip(20000, 4, delta), 32, 2);
  auto summary = Summarize(*t.paired, *t.x);
  ASSERT_TRUE(summary.ok()) << summary.status();
  const FeatureComparison& group = summary->features[0];
  const FeatureBinning& binning = t.x->schema().features[0];
  const int a = binning.BinOfCategory("A");
  const int b = binning.BinOfCategory("B");
  // Shapes are centered, so the A-versus-B contrast carries the effect.
  const double contrast = group.difference.mean[a] - group.difference.mean[b];
  EXPECT_NEAR(contrast, 2 * delta, 0.15);
  EXPECT_GT(group.mimic.mean[a], group.mimic.mean[b]);
  EXPECT_LT(group.outcome.mean[a], group.outcome.mean[b]);
  EXPECT_TRUE(group.difference.significant[a]);
  EXPECT_TRUE(group.difference.significant[b]);
  EXPECT_EQ(summary->ranking.front(), 0);
  EXPECT_GT(group.discrepancy, 0.2);
}

TEST(SummarizeTest, DecompositionReproducesBagAveragedPredictions) {
  Trained t = Train(synthetic::GenderFlip(2000, 5), 16, 2);
  const distill::BagEnsemble& e = t.paired->outcome;
  std::vector<std::vector<double>> shapes;
  for (int f = 0; f < e.num_features(); ++f) shapes.push_back(e.MeanShape(f));
  for (size_t r = 0; r < 50; ++r) {
    double bag_average = 0;
    for (const gam::AdditiveModel& m : e.models) {
      bag_average += gam::LinkScore(m, *t.x, r);
    }
    bag_average /= static_cast<double>(e.models.size());
    double sum = e.MeanIntercept();
    for (int f = 0; f < e.num_features(); ++f) sum += shapes[f][t.x->at(r, f)];
    EXPECT_NEAR(sum, bag_average, 1e-9);
  }
}

TEST(SummarizeTest, NoSignalGivesSmallDiscrepancy) {
  Trained t = Train(synthetic::PureNoise(3000, 6, 2), 8, 3);
  auto summary = Summarize(*t.paired, *t.x);
  ASSERT_TRUE(summary.ok());
  for (const FeatureComparison& c : summary->features) {
    EXPECT_LT(c.discrepancy, 0.05);
  }
}

TEST(SummarizeTest, SingleFeatureAndExports) {
  std::vector<double> values(400);
  for (size_t i = 0; i < values.size(); ++i) values[i] = i % 4;
  FeatureColumn column{"only", FeatureKind::kNumeric, values, {}};
  std::vector<double> scores(400);
  std::vector<Outcome> outcomes(400);
  for (size_t i = 0; i < scores.size(); ++i) {
    scores[i] = values[i];
    outcomes[i] = (i % 3 == 0) ? Outcome::kPositive : Outcome::kNegative;
  }
  Trained t = Train(AuditDataset::Create({column}, scores, outcomes), 16, 2);
  auto summary = Summarize(*t.paired, *t.x);
  ASSERT_TRUE(summary.ok());
  ASSERT_EQ(summary->features.size(), 1);
  double mass = 0;
  for (const double m : summary->features[0].bin_mass) mass += m;
  EXPECT_NEAR(mass, 1, 1e-12);
  const std::string csv = CurvesToCsv(*summary, t.x->schema());
  EXPECT_EQ(csv.rfind("feature,bin,bin_label,mass,", 0), 0);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 1 + 5);
  const nlohmann::json json = SummaryToJson(*summary, t.x->schema());
  EXPECT_FALSE(json.empty());
}

TEST(DiscrepancyTest, MassWeightedSignificantDifference) {
  DifferenceCurve d;
  d.mean = {1, -2, 5};
  d.significant = {true, true, false};
  const std::vector<double> mass = {0.5, 0.25, 0.25};
  EXPECT_DOUBLE_EQ(Discrepancy(d, mass), 0.5 * 1 + 0.25 * 2);
}

}  // namespace
}  // namespace dcaudit::compare
