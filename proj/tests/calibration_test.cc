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
#include <limits>
#include <random>
#include <vector>

#include "dcaudit/calibration.h"
#include "dcaudit/random.h"
#include "dcaudit/synthetic.h"
#include "gmock/gmock.h"
#include "gtest/gtest.h"

namespace dcaudit::calibrate {
namespace {

using ::testing::ElementsAre;
using ::testing::HasSubstr;

// Exhaustive oracle: every partition into consecutive blocks whose weighted
// means are non-decreasing; keep the one with the least weighted SSE.
std::vector<double> BlockPartitionOracle(const std::vector<double>& y,
                                         const std::vector<double>& w) {
  const size_t n = y.size();
  double best = std::numeric_limits<double>::infinity();
  std::vector<double> best_fit;
  for (uint32_t cuts = 0; cuts < (1u << (n - 1)); ++cuts) {
    std::vector<double> fit(n);
    double previous = -std::numeric_limits<double>::infinity();
    bool monotone = true;
    size_t start = 0;
    for (size_t i = 0; i < n; ++i) {
      if (i + 1 < n && !((cuts >> i) & 1u)) continue;
      double sw = 0, swy = 0;
      for (size_t j = start; j <= i; ++j) {
        sw += w[j];
        swy += w[j] * y[j];
      }
      const double mean = swy / sw;
      monotone &= mean >= previous - 1e-12;
      for (size_t j = start; j <= i; ++j) fit[j] = mean;
      previous = mean;
      start = i + 1;
    }
    if (!monotone) continue;
    double sse = 0;
    for (size_t i = 0; i < n; ++i) sse += w[i] * (y[i] - fit[i]) * (y[i] - fit[i]);
    if (sse < best - 1e-12) {
      best = sse;
      best_fit = fit;
    }
  }
  return best_fit;
}

TEST(PoolAdjacentViolatorsTest, MatchesOracleOnAllBinarySequences) {
  for (size_t n = 1; n <= 12; ++n) {
    const std::vector<double> w(n, 1.0);
    for (uint32_t bits = 0; bits < (1u << n); ++bits) {
      std::vector<double> y(n);
      for (size_t i = 0; i < n; ++i) y[i] = (bits >> i) & 1u;
      const std::vector<double> fit = PoolAdjacentViolators(y, w);
      const std::vector<double> oracle = BlockPartitionOracle(y, w);
      for (size_t i = 0; i < n; ++i) ASSERT_NEAR(fit[i], oracle[i], 1e-12);
    }
  }
}

TEST(PoolAdjacentViolatorsTest, MatchesOracleOnWeightedThreeValueGrid) {
  const double grid[] = {0.0, 0.5, 1.0};
  for (size_t n = 1; n <= 8; ++n) {
    size_t combos = 1;
    for (size_t i = 0; i < n; ++i) combos *= 3;
    for (size_t code = 0; code < combos; ++code) {
      std::vector<double> y(n), w(n);
      size_t rest = code;
      for (size_t i = 0; i < n; ++i) {
        y[i] = grid[rest % 3];
        rest /= 3;
        w[i] = 1.0 + static_cast<double>((code + i) % 4);
      }
      const std::vector<double> fit = PoolAdjacentViolators(y, w);
      const std::vector<double> oracle = BlockPartitionOracle(y, w);
      for (size_t i = 0; i < n; ++i) ASSERT_NEAR(fit[i], oracle[i], 1e-12);
    }
  }
}

TEST(PoolAdjacentViolatorsTest, OutputIsMonotone) {
  Rng rng(1);
  std::normal_distribution<double> normal(0, 1);
  std::vector<double> y(500), w(500, 1.0);
  for (size_t i = 0; i < y.size(); ++i) y[i] = 0.01 * i + normal(rng);
  const std::vector<double> fit = PoolAdjacentViolators(y, w);
  for (size_t i = 1; i < fit.size(); ++i) EXPECT_LE(fit[i - 1], fit[i]);
}

TEST(FitCalibrationTest, ClampsAndMapsToLogits) {
  const std::vector<double> scores = {1, 1, 2, 2, 3, 3};
  const std::vector<double> outcomes = {0, 0, 0, 1, 1, 1};
  auto map = FitCalibration(scores, outcomes);
  ASSERT_TRUE(map.ok()) << map.status();
  EXPECT_THAT(map->breakpoints, ElementsAre(1, 2, 3));
  EXPECT_THAT(map->pooled_probabilities, ElementsAre(0, 0.5, 1));
  EXPECT_DOUBLE_EQ(map->epsilon, 1.0 / 12);
  EXPECT_NEAR(map->values[0], std::log((1.0 / 12) / (11.0 / 12)), 1e-12);
  EXPECT_NEAR(map->values[1], 0, 1e-12);
  EXPECT_NEAR(map->values[2], -map->values[0], 1e-12);
  for (size_t i = 1; i < map->values.size(); ++i) {
    EXPECT_LE(map->values[i - 1], map->values[i]);
  }
}

TEST(CalibrationMapTest, ApplyAndInvert) {
  CalibrationMap map;
  map.breakpoints = {1, 2, 3, 4};
  map.values = {-1, -1, 0, 2};
  map.pooled_probabilities = {0.25, 0.25, 0.5, 0.9};
  EXPECT_EQ(map.Apply(0.0), -1);
  EXPECT_EQ(map.Apply(2.5), -1);
  EXPECT_EQ(map.Apply(3.0), 0);
  EXPECT_EQ(map.Apply(10.0), 2);
  // Plateau {1, 2} maps back to its midpoint.
  EXPECT_DOUBLE_EQ(map.Invert(-1), 1.5);
  EXPECT_DOUBLE_EQ(map.Invert(0), 3);
  EXPECT_DOUBLE_EQ(map.Invert(-0.5), 2.25);
  EXPECT_DOUBLE_EQ(map.Invert(-5), 1.5);
  EXPECT_DOUBLE_EQ(map.Invert(9), 4);
  auto back = MapFromJson(MapToJson(map));
  ASSERT_TRUE(back.ok());
  EXPECT_EQ(back->values, map.values);
}

TEST(FitCalibrationTest, Errors) {
  EXPECT_THAT(FitCalibration(std::vector<double>{1, 1},
                             std::vector<double>{0, 1})
                  .status()
                  .message(),
              HasSubstr("single distinct score"));
  EXPECT_THAT(FitCalibration(std::vector<double>{1, 2},
                             std::vector<double>{1, 1})
                  .status()
                  .message(),
              HasSubstr("single-class"));
  EXPECT_FALSE(FitCalibration(std::vector<double>{1, 2},
                              std::vector<double>{0, 2})
                   .ok());
}

TEST(CalibrateTest, AutoLeavesLogitLinearScoresAlone) {
  auto data = synthetic::LogitLinear(20000, 3);
  ASSERT_TRUE(data.ok());
  const std::vector<double> scores(data->scores().begin(), data->scores().end());
  auto result = Calibrate(scores, data->OutcomeValues(data->LabeledRows()),
                          CalibrationMode::kAuto);
  ASSERT_TRUE(result.ok()) << result.status();
  EXPECT_FALSE(result->decision.calibrated);
  EXPECT_LT(result->decision.residual_before, kDefaultResidualThreshold);
  EXPECT_FALSE(result->map.has_value());
}

TEST(CalibrateTest, AutoCalibratesKinkedScores) {
  auto data = synthetic::Kinked(20000, 4);
  ASSERT_TRUE(data.ok());
  const std::vector<double> scores(data->scores().begin(), data->scores().end());
  const std::vector<double> outcomes = data->OutcomeValues(data->LabeledRows());
  auto result = Calibrate(scores, outcomes, CalibrationMode::kAuto);
  ASSERT_TRUE(result.ok()) << result.status();
  EXPECT_TRUE(result->decision.calibrated);
  ASSERT_TRUE(result->map.has_value());
  EXPECT_LE(*result->decision.residual_after * 5, result->decision.residual_before);
  EXPECT_TRUE(result->before.bucketed);
  EXPECT_LE(result->before.levels.size(), kMaxDiagnosticBuckets);

  auto off = Calibrate(scores, outcomes, CalibrationMode::kOff);
  ASSERT_TRUE(off.ok());
  EXPECT_FALSE(off->decision.calibrated);
  EXPECT_THAT(off->decision.reason, HasSubstr("warning"));
}

TEST(CalibrationModeTest, Parse) {
  EXPECT_EQ(*ParseCalibrationMode("auto"), CalibrationMode::kAuto);
  EXPECT_EQ(*ParseCalibrationMode("on"), CalibrationMode::kOn);
  EXPECT_EQ(*ParseCalibrationMode("off"), CalibrationMode::kOff);
  EXPECT_FALSE(ParseCalibrationMode("sometimes").ok());
  EXPECT_EQ(CalibrationModeName(CalibrationMode::kOn), "on");
}

}  // namespace
}  // namespace dcaudit::calibrate
