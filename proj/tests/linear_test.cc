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
#include <random>
#include <vector>

#include "dcaudit/binning.h"
#include "dcaudit/dataset.h"
#include "dcaudit/linear.h"
#include "dcaudit/random.h"
#include "gmock/gmock.h"
#include "gtest/gtest.h"

namespace dcaudit::baseline {
namespace {

using ::testing::HasSubstr;

struct Problem {
  AuditDataset data;
  LinearEncoding encoding;
};

Problem MakeProblem(std::vector<FeatureColumn> features,
                    std::vector<double> scores,
                    std::vector<Outcome> outcomes = {}) {
  if (outcomes.empty()) outcomes.assign(scores.size(), Outcome::kNegative);
  auto data = AuditDataset::Create(std::move(features), std::move(scores),
                                   std::move(outcomes));
  EXPECT_TRUE(data.ok()) << data.status();
  auto schema = FitSchema(*data);
  EXPECT_TRUE(schema.ok());
  auto encoding = MakeEncoding(*data, *schema);
  EXPECT_TRUE(encoding.ok());
  return {*std::move(data), *std::move(encoding)};
}

TEST(TrainLinearTest, ExactRecoveryWithoutPenalty) {
  Rng rng(1);
  std::normal_distribution<double> normal(0, 1);
  const size_t n = 200;
  FeatureColumn a{"a", FeatureKind::kNumeric, std::vector<double>(n), {}};
  FeatureColumn b{"b", FeatureKind::kNumeric, std::vector<double>(n), {}};
  std::vector<double> y(n);
  for (size_t i = 0; i < n; ++i) {
    a.numeric[i] = normal(rng);
    b.numeric[i] = normal(rng);
    y[i] = 0.5 + 2 * a.numeric[i] - 3 * b.numeric[i];
  }
  Problem p = MakeProblem({a, b}, y);
  auto model = TrainLinear(p.data, p.encoding, y, gam::Link::kIdentity, 0.0);
  ASSERT_TRUE(model.ok()) << model.status();
  EXPECT_NEAR(model->intercept, 0.5, 1e-10);
  EXPECT_NEAR(model->weights[0], 2, 1e-10);
  EXPECT_NEAR(model->weights[1], -3, 1e-10);
  auto predictions = PredictLinear(*model, p.data);
  ASSERT_TRUE(predictions.ok());
  double worst = 0;
  for (size_t i = 0; i < n; ++i) worst = std::max(worst, std::abs((*predictions)[i] - y[i]));
  EXPECT_LE(worst, 1e-8);
  EXPECT_LE(model->gradient_norm, 1e-8);
}

TEST(TrainLinearTest, IrrelevantFeaturesGetNearZeroWeight) {
  Rng rng(2);
  std::normal_distribution<double> normal(0, 1);
  const size_t n = 500;
  FeatureColumn a{"a", FeatureKind::kNumeric, std::vector<double>(n), {}};
  FeatureColumn z{"z", FeatureKind::kNumeric, std::vector<double>(n), {}};
  std::vector<double> y(n);
  for (size_t i = 0; i < n; ++i) {
    a.numeric[i] = normal(rng);
    z.numeric[i] = normal(rng);
    y[i] = a.numeric[i];
  }
  Problem p = MakeProblem({a, z}, y);
  auto model = TrainLinear(p.data, p.encoding, y, gam::Link::kIdentity, kDefaultL2);
  ASSERT_TRUE(model.ok());
  EXPECT_NEAR(model->weights[1], 0, 1e-5);
  EXPECT_NEAR(model->weights[0], 1, 1e-5);
}

TEST(TrainLinearTest, SingularDesignWithoutPenalty) {
  FeatureColumn a{"a", FeatureKind::kNumeric, {1, 2, 3, 4}, {}};
  FeatureColumn b{"b", FeatureKind::kNumeric, {2, 4, 6, 8}, {}};
  Problem p = MakeProblem({a, b}, {1, 2, 3, 4});
  const std::vector<double> y = {1, 2, 3, 4};
  EXPECT_THAT(TrainLinear(p.data, p.encoding, y, gam::Link::kIdentity, 0.0)
                  .status()
                  .message(),
              HasSubstr("singular design"));
  EXPECT_TRUE(TrainLinear(p.data, p.encoding, y, gam::Link::kIdentity, 1e-3).ok());
  EXPECT_FALSE(TrainLinear(p.data, p.encoding, y, gam::Link::kIdentity, -1).ok());
}

TEST(TrainLinearTest, SeparableLogisticStaysFiniteAndLossDecreases) {
  const size_t n = 100;
  FeatureColumn a{"a", FeatureKind::kNumeric, std::vector<double>(n), {}};
  std::vector<double> y(n);
  std::vector<Outcome> outcomes(n);
  for (size_t i = 0; i < n; ++i) {
    a.numeric[i] = static_cast<double>(i) - 49.5;
    y[i] = a.numeric[i] > 0 ? 1 : 0;
    outcomes[i] = y[i] > 0 ? Outcome::kPositive : Outcome::kNegative;
  }
  Problem p = MakeProblem({a}, y, outcomes);
  auto model = TrainLinear(p.data, p.encoding, y, gam::Link::kLogistic, 1e-3);
  ASSERT_TRUE(model.ok()) << model.status();
  EXPECT_TRUE(model->converged);
  EXPECT_TRUE(std::isfinite(model->weights[0]));
  EXPECT_GT(model->weights[0], 0);
  for (size_t i = 1; i < model->loss_history.size(); ++i) {
    EXPECT_LE(model->loss_history[i], model->loss_history[i - 1]);
  }
  auto predictions = PredictLinear(*model, p.data);
  ASSERT_TRUE(predictions.ok());
  for (size_t i = 0; i < n; ++i) {
    EXPECT_EQ((*predictions)[i] > 0.5, y[i] > 0.5);
  }
  const std::vector<double> one_class(n, 1.0);
  EXPECT_THAT(TrainLinear(p.data, p.encoding, one_class, gam::Link::kLogistic, 1e-3)
                  .status()
                  .message(),
              HasSubstr("single-class"));
}

TEST(TrainLinearTest, LogisticMatchesKnownOptimumOnBalancedCells) {
  // Two groups with positive rates 1/4 and 3/4: the unpenalized MLE has
  // logit(1/4) at group "a" and logit(3/4) at group "b".
  FeatureColumn g{"g", FeatureKind::kCategorical, {}, {}};
  std::vector<double> y;
  std::vector<Outcome> outcomes;
  for (int i = 0; i < 8; ++i) {
    const bool b = i >= 4;
    g.categorical.push_back(b ? "b" : "a");
    const bool positive = b ? i != 4 : i == 0;
    y.push_back(positive);
    outcomes.push_back(positive ? Outcome::kPositive : Outcome::kNegative);
  }
  Problem p = MakeProblem({g}, y, outcomes);
  auto model = TrainLinear(p.data, p.encoding, y, gam::Link::kLogistic, 1e-9);
  ASSERT_TRUE(model.ok()) << model.status();
  auto predictions = PredictLinear(*model, p.data);
  ASSERT_TRUE(predictions.ok());
  EXPECT_NEAR((*predictions)[0], 0.25, 1e-6);
  EXPECT_NEAR((*predictions)[7], 0.75, 1e-6);
}

TEST(EncodingTest, OneHotAndMeanImputation) {
  FeatureColumn g{"g", FeatureKind::kCategorical, {}, {"x", "y", std::nullopt, "x"}};
  FeatureColumn a{"a", FeatureKind::kNumeric, {1, std::nan(""), 3, 5}, {}};
  Problem p = MakeProblem({g, a}, {1, 2, 3, 4});
  ASSERT_EQ(p.encoding.num_columns(), 3);
  EXPECT_EQ(p.encoding.columns[0].category, 0);
  EXPECT_EQ(p.encoding.columns[1].category, 1);
  EXPECT_EQ(p.encoding.columns[2].category, -1);
  EXPECT_DOUBLE_EQ(p.encoding.numeric_fill[1], 3);

  LinearModel model;
  model.encoding = p.encoding;
  model.intercept = 10;
  model.weights = {1, 2, 100};
  auto predictions = PredictLinear(model, p.data);
  ASSERT_TRUE(predictions.ok());
  EXPECT_DOUBLE_EQ((*predictions)[0], 10 + 1 + 100);
  EXPECT_DOUBLE_EQ((*predictions)[1], 10 + 2 + 300);
  // A missing category contributes nothing.
  EXPECT_DOUBLE_EQ((*predictions)[2], 10 + 300);

  // So does a category never seen at fit time.
  FeatureColumn g2{"g", FeatureKind::kCategorical, {}, {"z"}};
  FeatureColumn a2{"a", FeatureKind::kNumeric, {0}, {}};
  auto other = AuditDataset::Create({g2, a2}, {0}, {Outcome::kNegative});
  ASSERT_TRUE(other.ok());
  auto unseen = PredictLinear(model, *other);
  ASSERT_TRUE(unseen.ok());
  EXPECT_DOUBLE_EQ((*unseen)[0], 10);
  EXPECT_FALSE(LinearToJson(model).empty());
}

}  // namespace
}  // namespace dcaudit::baseline
