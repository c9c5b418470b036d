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
#include "dcaudit/distill.h"
#include "dcaudit/missing_features.h"
#include "dcaudit/random.h"
#include "dcaudit/synthetic.h"
#include "gmock/gmock.h"
#include "gtest/gtest.h"

namespace dcaudit::missing {
namespace {

using ::testing::HasSubstr;

int Sign(double v) { return (v > 0) - (v < 0); }

// O(n^2) tau-b straight from the definition.
double BruteForceTauB(const std::vector<double>& x, const std::vector<double>& y) {
  double concordant = 0, discordant = 0, ties_x = 0, ties_y = 0;
  const size_t n = x.size();
  for (size_t i = 0; i < n; ++i) {
    for (size_t j = i + 1; j < n; ++j) {
      const int sx = Sign(x[i] - x[j]);
      const int sy = Sign(y[i] - y[j]);
      if (sx == 0) ties_x += 1;
      if (sy == 0) ties_y += 1;
      if (sx * sy > 0) concordant += 1;
      if (sx * sy < 0) discordant += 1;
    }
  }
  const double pairs = n * (n - 1) / 2.0;
  return (concordant - discordant) /
         std::sqrt((pairs - ties_x) * (pairs - ties_y));
}

TEST(KendallTauBTest, MatchesBruteForceWithTies) {
  Rng rng(1);
  std::uniform_int_distribution<int> small(0, 4);
  std::normal_distribution<double> normal(0, 1);
  for (int trial = 0; trial < 100; ++trial) {
    const size_t n = 2 + trial % 60;
    std::vector<double> x(n), y(n);
    for (size_t i = 0; i < n; ++i) {
      x[i] = trial % 2 ? small(rng) : normal(rng);
      y[i] = small(rng) + 0.3 * x[i];
    }
    const auto tau = KendallTauB(x, y);
    bool constant_x = true, constant_y = true;
    for (size_t i = 1; i < n; ++i) {
      constant_x &= x[i] == x[0];
      constant_y &= y[i] == y[0];
    }
    if (constant_x || constant_y) {
      EXPECT_FALSE(tau.has_value());
      continue;
    }
    ASSERT_TRUE(tau.has_value());
    EXPECT_NEAR(*tau, BruteForceTauB(x, y), 1e-12);
  }
}

TEST(KendallTauBTest, SmallExamples) {
  // Two concordant and one discordant pair out of three.
  EXPECT_NEAR(*KendallTauB(std::vector<double>{1, 2, 3},
                           std::vector<double>{1, 3, 2}),
              1.0 / 3, 1e-15);
  std::vector<double> x(50), y(50);
  for (size_t i = 0; i < x.size(); ++i) {
    x[i] = static_cast<double>(i);
    y[i] = std::exp(0.1 * static_cast<double>(i));
  }
  EXPECT_DOUBLE_EQ(*KendallTauB(x, y), 1.0);
  EXPECT_DOUBLE_EQ(*Spearman(x, y), 1.0);
  EXPECT_FALSE(KendallTauB(x, std::vector<double>(50, 2.0)).has_value());
}

TEST(CorrelationTest, InvariantToMonotoneTransformsAndSymmetric) {
  Rng rng(2);
  std::normal_distribution<double> normal(0, 1);
  std::vector<double> x(300), y(300), tx(300);
  for (size_t i = 0; i < x.size(); ++i) {
    x[i] = normal(rng);
    y[i] = 0.4 * x[i] + normal(rng);
    tx[i] = std::exp(x[i]);
  }
  EXPECT_NEAR(*Spearman(x, y), *Spearman(tx, y), 1e-15);
  EXPECT_NEAR(*KendallTauB(x, y), *KendallTauB(tx, y), 1e-15);
  EXPECT_NEAR(*Pearson(x, y), *Pearson(y, x), 1e-15);
  EXPECT_NEAR(*Spearman(x, y), *Spearman(y, x), 1e-15);
  EXPECT_NEAR(*KendallTauB(x, y), *KendallTauB(y, x), 1e-15);

  CorrelationTestOptions options;
  options.resamples = 300;
  options.seed = 3;
  auto result = CorrelationTest(x, y, options);
  ASSERT_TRUE(result.ok());
  for (const Interval* i : {&result->pearson, &result->spearman, &result->kendall}) {
    EXPECT_LE(i->lo, i->estimate);
    EXPECT_LE(i->estimate, i->hi);
    EXPECT_GT(i->lo, 0);
  }
  EXPECT_EQ(result->verdict, Verdict::kEvidence);
}

TEST(CorrelationTest, Errors) {
  const std::vector<double> ten(10, 1.0);
  EXPECT_THAT(CorrelationTest(ten, ten, {}).status().message(),
              HasSubstr("too few pairs: 10 (need at least 30)"));
  std::vector<double> varying(40);
  for (size_t i = 0; i < varying.size(); ++i) varying[i] = static_cast<double>(i);
  const auto constant = CorrelationTest(varying, std::vector<double>(40, 0.5), {});
  EXPECT_EQ(constant.status().code(), absl::StatusCode::kFailedPrecondition);
  EXPECT_THAT(constant.status().message(), HasSubstr("degenerate margin"));
  EXPECT_FALSE(CorrelationTest(varying, ten, {}).ok());
}

TEST(DecideVerdictTest, Thresholds) {
  const Interval strong{0.2, 0.1, 0.3};
  const Interval weak{0.05, 0.005, 0.1};
  const Interval straddle{0.0, -0.1, 0.1};
  EXPECT_EQ(DecideVerdict(strong, strong, strong), Verdict::kEvidence);
  EXPECT_EQ(DecideVerdict(strong, weak, strong), Verdict::kWeakEvidence);
  EXPECT_EQ(DecideVerdict(straddle, straddle, weak), Verdict::kWeakEvidence);
  EXPECT_EQ(DecideVerdict(straddle, straddle, straddle), Verdict::kNone);
  EXPECT_EQ(VerdictName(Verdict::kEvidence), "evidence-of-missing-features");
  EXPECT_EQ(VerdictName(Verdict::kWeakEvidence), "weak-evidence");
  EXPECT_EQ(VerdictName(Verdict::kNone), "none");
}

TEST(CorrelationTest, FisherZAndJobsInvariance) {
  Rng rng(4);
  std::normal_distribution<double> normal(0, 1);
  std::vector<double> x(200), y(200);
  for (size_t i = 0; i < x.size(); ++i) {
    x[i] = normal(rng);
    y[i] = 0.2 * x[i] + normal(rng);
  }
  CorrelationTestOptions options;
  options.resamples = 200;
  options.seed = 9;
  auto one = CorrelationTest(x, y, options);
  options.jobs = 3;
  auto three = CorrelationTest(x, y, options);
  ASSERT_TRUE(one.ok() && three.ok());
  EXPECT_EQ(ResultToJson(*one), ResultToJson(*three));

  options.pearson_interval = PearsonInterval::kFisherZ;
  auto fisher = CorrelationTest(x, y, options);
  ASSERT_TRUE(fisher.ok());
  const double r = fisher->pearson.estimate;
  const double se = 1 / std::sqrt(200.0 - 3);
  EXPECT_NEAR(fisher->pearson.lo, std::tanh(std::atanh(r) - 1.96 * se), 1e-12);
  EXPECT_NEAR(fisher->pearson.hi, std::tanh(std::atanh(r) + 1.96 * se), 1e-12);
  EXPECT_EQ(ResultToJson(*fisher)["pearson_interval"], "fisher-z");
}

TEST(ErrorPairsCsvTest, ParsesHeadersAndReportsBadLines) {
  auto plain = ParseErrorPairsCsv("0.5,0.25\n1,2\n");
  ASSERT_TRUE(plain.ok());
  EXPECT_EQ(plain->mimic_error, (std::vector<double>{0.5, 1}));
  auto named = ParseErrorPairsCsv("row,fold,mimic_error,outcome_error\n3,0,0.1,0.2\n");
  ASSERT_TRUE(named.ok()) << named.status();
  EXPECT_EQ(named->mimic_error, std::vector<double>{0.1});
  EXPECT_EQ(named->outcome_error, std::vector<double>{0.2});
  EXPECT_THAT(ParseErrorPairsCsv("1,2\n3,x\n").status().message(),
              HasSubstr("malformed error pair on line 2"));

  ErrorPairs pairs;
  pairs.rows = {4, 9};
  pairs.fold = {0, 1};
  pairs.mimic_error = {0.125, 1.0 / 3};
  pairs.outcome_error = {0.5, 0.75};
  auto back = ParseErrorPairsCsv(ErrorPairsToCsv(pairs));
  ASSERT_TRUE(back.ok());
  EXPECT_EQ(back->mimic_error, pairs.mimic_error);
  EXPECT_EQ(back->outcome_error, pairs.outcome_error);
}

struct HiddenRun {
  std::unique_ptr<AuditDataset> data;
  std::unique_ptr<BinnedMatrix> x;
  std::unique_ptr<distill::PairedEnsembles> paired;
};

HiddenRun TrainHidden(double strength, uint64_t seed) {
  HiddenRun h;
  auto data = synthetic::HiddenFeature(6000, seed, strength, false);
  EXPECT_TRUE(data.ok());
  h.data = std::make_unique<AuditDataset>(*std::move(data));
  auto schema = FitSchema(*h.data, 32);
  h.x = std::make_unique<BinnedMatrix>(
      *Bin(*h.data, std::make_shared<const FeatureSchema>(*schema)));
  auto plan = distill::PlanBags(h.data->num_rows(), 3, 2, seed);
  gam::TrainConfig config;
  config.learning_rate = 0.05;
  auto paired = distill::TrainPaired(*h.data, *h.x, std::nullopt, *plan, config);
  EXPECT_TRUE(paired.ok()) << paired.status();
  h.paired = std::make_unique<distill::PairedEnsembles>(*std::move(paired));
  return h;
}

TEST(ComputeErrorPairsTest, LowestHoldingFoldScoresEachRow) {
  HiddenRun h = TrainHidden(1.0, 5);
  auto pairs = ComputeErrorPairs(*h.paired, *h.data, *h.x);
  ASSERT_TRUE(pairs.ok()) << pairs.status();
  std::vector<int> first_fold(h.data->num_rows(), -1);
  for (int k = 2; k >= 0; --k) {
    for (const uint32_t r : h.paired->TestRows(k)) first_fold[r] = k;
  }
  size_t held_out = 0;
  for (const int f : first_fold) held_out += f >= 0 ? 1 : 0;
  EXPECT_EQ(pairs->size(), held_out);
  EXPECT_EQ(pairs->never_held_out, h.data->num_rows() - held_out);
  for (size_t i = 0; i < pairs->size(); ++i) {
    EXPECT_EQ(pairs->fold[i], first_fold[pairs->rows[i]]);
    EXPECT_GE(pairs->mimic_error[i], 0);
    EXPECT_LE(pairs->outcome_error[i], 1);
  }
  EXPECT_TRUE(std::is_sorted(pairs->rows.begin(), pairs->rows.end()));
}

TEST(ComputeErrorPairsTest, CorrelationGrowsWithHiddenSignal) {
  std::vector<double> estimates;
  for (const double strength : {0.5, 1.0, 2.0}) {
    HiddenRun h = TrainHidden(strength, 7);
    auto pairs = ComputeErrorPairs(*h.paired, *h.data, *h.x);
    ASSERT_TRUE(pairs.ok());
    estimates.push_back(*Spearman(pairs->mimic_error, pairs->outcome_error));
  }
  EXPECT_LT(estimates[0], estimates[1]);
  EXPECT_LT(estimates[1], estimates[2]);
  EXPECT_GT(estimates[2], 0);
}

}  // namespace
}  // namespace dcaudit::missing
