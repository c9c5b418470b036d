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

// Monotone calibration of raw risk scores onto the logit scale of the
// empirical outcome probability. A mimic trained on calibrated scores and an
// outcome model then produce outputs on the same scale.

#ifndef DCAUDIT_CALIBRATION_H_
#define DCAUDIT_CALIBRATION_H_

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "absl/status/statusor.h"
#include "json.hpp"

namespace dcaudit::calibrate {

// Non-decreasing step function from raw score to calibrated logit.
struct CalibrationMap {
  // Distinct training scores, ascending.
  std::vector<double> breakpoints;
  // Calibrated logit of each breakpoint's pooled probability.
  std::vector<double> values;
  // Pooled probability before clamping.
  std::vector<double> pooled_probabilities;
  double epsilon = 0;

  // Scores below the first breakpoint take the first value, scores above the
  // last take the last value, and interior scores take the value of the
  // closest breakpoint at or below them.
  double Apply(double score) const;
  std::vector<double> Apply(std::span<const double> scores) const;

  // Approximate inverse: each plateau of equal values maps to the midpoint of
  // its raw-score range, with linear interpolation between plateaus and
  // clamping outside them.
  double Invert(double calibrated) const;
};

// Weighted pool-adjacent-violators: the non-decreasing sequence minimizing
// sum w_i (y_i - fit_i)^2.
std::vector<double> PoolAdjacentViolators(std::span<const double> values,
                                          std::span<const double> weights);

// PAV fit of outcome on score, pooled probabilities clamped to
// [1/(2T), 1 - 1/(2T)], then mapped to logits.
absl::StatusOr<CalibrationMap> FitCalibration(std::span<const double> scores,
                                              std::span<const double> outcomes);

struct LineFit {
  double intercept = 0;
  double slope = 0;
};

struct CalibrationLevel {
  double score = 0;  // Mean score of the level (or bucket).
  double count = 0;
  double positives = 0;
  double empirical_probability = 0;
  double empirical_logit = 0;
};

struct CalibrationDiagnostics {
  std::vector<CalibrationLevel> levels;
  LineFit probability_line;
  LineFit logit_line;
  // Count-weighted RMSE of the logit-scale line.
  double linearity_residual = 0;
  bool bucketed = false;
  bool transformed = false;
};

inline constexpr int kMaxDiagnosticBuckets = 50;

// Empirical probability per score level (or per quantile bucket when there
// are more than kMaxDiagnosticBuckets levels) and count-weighted least-squares
// lines on the probability and logit scales. With a map, the diagnostics are
// computed on the transformed scores.
absl::StatusOr<CalibrationDiagnostics> Diagnose(
    std::span<const double> scores, std::span<const double> outcomes,
    const CalibrationMap* map = nullptr);

enum class CalibrationMode { kAuto, kOn, kOff };

absl::StatusOr<CalibrationMode> ParseCalibrationMode(const std::string& text);
std::string CalibrationModeName(CalibrationMode mode);

inline constexpr double kDefaultResidualThreshold = 0.15;

struct CalibrationDecision {
  CalibrationMode mode = CalibrationMode::kAuto;
  bool calibrated = false;
  double residual_before = 0;
  std::optional<double> residual_after;
  double threshold = kDefaultResidualThreshold;
  std::string reason;
};

struct CalibrationResult {
  std::optional<CalibrationMap> map;
  CalibrationDiagnostics before;
  std::optional<CalibrationDiagnostics> after;
  CalibrationDecision decision;
};

// Applies the calibration mode: kAuto calibrates when the raw scores' logit
// linearity residual exceeds `threshold`.
absl::StatusOr<CalibrationResult> Calibrate(
    std::span<const double> scores, std::span<const double> outcomes,
    CalibrationMode mode, double threshold = kDefaultResidualThreshold);

nlohmann::json MapToJson(const CalibrationMap& map);
absl::StatusOr<CalibrationMap> MapFromJson(const nlohmann::json& json);
nlohmann::json DiagnosticsToJson(const CalibrationDiagnostics& diagnostics);
std::string DiagnosticsToCsv(const CalibrationDiagnostics& diagnostics);

}  // namespace dcaudit::calibrate

#endif  // DCAUDIT_CALIBRATION_H_
