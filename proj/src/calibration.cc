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

#include "dcaudit/calibration.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "dcaudit/status_macros.h"

namespace dcaudit::calibrate {
namespace {

double Logit(double p) { return std::log(p / (1.0 - p)); }

absl::Status CheckInputs(std::span<const double> scores,
                         std::span<const double> outcomes) {
  if (scores.size() != outcomes.size()) {
    return absl::InvalidArgumentError("scores and outcomes differ in length");
  }
  bool has_zero = false;
  bool has_one = false;
  for (const double o : outcomes) {
    if (o == 0.0) {
      has_zero = true;
    } else if (o == 1.0) {
      has_one = true;
    } else {
      return absl::InvalidArgumentError("non-binary outcome");
    }
  }
  for (const double s : scores) {
    if (!std::isfinite(s)) {
      return absl::InvalidArgumentError("non-finite score");
    }
  }
  if (scores.empty() ||
      std::adjacent_find(scores.begin(), scores.end(),
                         std::not_equal_to<>()) == scores.end()) {
    return absl::InvalidArgumentError("single distinct score");
  }
  if (!has_zero || !has_one) {
    return absl::InvalidArgumentError("single-class outcomes");
  }
  return absl::OkStatus();
}

// Distinct sorted values with counts and outcome sums.
struct Level {
  double score = 0;
  double count = 0;
  double positives = 0;
};

std::vector<Level> GroupByScore(std::span<const double> scores,
                                std::span<const double> outcomes) {
  std::vector<size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](size_t a, size_t b) { return scores[a] < scores[b]; });
  std::vector<Level> levels;
  for (const size_t i : order) {
    if (levels.empty() || levels.back().score != scores[i]) {
      levels.push_back({scores[i], 0, 0});
    }
    levels.back().count += 1;
    levels.back().positives += outcomes[i];
  }
  return levels;
}

LineFit WeightedLine(const std::vector<double>& x, const std::vector<double>& y,
                     const std::vector<double>& w, double* residual) {
  double sw = 0;
  double sx = 0;
  double sy = 0;
  for (size_t i = 0; i < x.size(); ++i) {
    sw += w[i];
    sx += w[i] * x[i];
    sy += w[i] * y[i];
  }
  const double mx = sx / sw;
  const double my = sy / sw;
  double sxx = 0;
  double sxy = 0;
  for (size_t i = 0; i < x.size(); ++i) {
    sxx += w[i] * (x[i] - mx) * (x[i] - mx);
    sxy += w[i] * (x[i] - mx) * (y[i] - my);
  }
  LineFit line;
  line.slope = sxx > 0 ? sxy / sxx : 0.0;
  line.intercept = my - line.slope * mx;
  if (residual != nullptr) {
    double sse = 0;
    for (size_t i = 0; i < x.size(); ++i) {
      const double r = y[i] - (line.intercept + line.slope * x[i]);
      sse += w[i] * r * r;
    }
    *residual = std::sqrt(sse / sw);
  }
  return line;
}

}  // namespace

double CalibrationMap::Apply(double score) const {
  const auto it = std::upper_bound(breakpoints.begin(), breakpoints.end(), score);
  if (it == breakpoints.begin()) return values.front();
  return values[static_cast<size_t>(it - breakpoints.begin()) - 1];
}

std::vector<double> CalibrationMap::Apply(std::span<const double> scores) const {
  std::vector<double> out;
  out.reserve(scores.size());
  for (const double s : scores) out.push_back(Apply(s));
  return out;
}

double CalibrationMap::Invert(double calibrated) const {
  std::vector<double> plateau_values;
  std::vector<double> plateau_midpoints;
  size_t begin = 0;
  while (begin < values.size()) {
    size_t end = begin + 1;
    while (end < values.size() && values[end] == values[begin]) ++end;
    plateau_values.push_back(values[begin]);
    plateau_midpoints.push_back(0.5 * (breakpoints[begin] + breakpoints[end - 1]));
    begin = end;
  }
  if (calibrated <= plateau_values.front()) return plateau_midpoints.front();
  if (calibrated >= plateau_values.back()) return plateau_midpoints.back();
  const size_t j = static_cast<size_t>(
      std::upper_bound(plateau_values.begin(), plateau_values.end(),
                       calibrated) -
      plateau_values.begin());
  const double t = (calibrated - plateau_values[j - 1]) /
                   (plateau_values[j] - plateau_values[j - 1]);
  return plateau_midpoints[j - 1] +
         t * (plateau_midpoints[j] - plateau_midpoints[j - 1]);
}

std::vector<double> PoolAdjacentViolators(std::span<const double> values,
                                          std::span<const double> weights) {
  struct Block {
    double mean;
    double weight;
    size_t length;
  };
  std::vector<Block> blocks;
  blocks.reserve(values.size());
  for (size_t i = 0; i < values.size(); ++i) {
    blocks.push_back({values[i], weights[i], 1});
    while (blocks.size() >= 2 &&
           blocks[blocks.size() - 2].mean > blocks.back().mean) {
      const Block top = blocks.back();
      blocks.pop_back();
      Block& below = blocks.back();
      const double weight = below.weight + top.weight;
      below.mean = (below.mean * below.weight + top.mean * top.weight) / weight;
      below.weight = weight;
      below.length += top.length;
    }
  }
  std::vector<double> fit;
  fit.reserve(values.size());
  for (const Block& block : blocks) fit.insert(fit.end(), block.length, block.mean);
  return fit;
}

absl::StatusOr<CalibrationMap> FitCalibration(std::span<const double> scores,
                                              std::span<const double> outcomes) {
  RETURN_IF_ERROR(CheckInputs(scores, outcomes));
  const std::vector<Level> levels = GroupByScore(scores, outcomes);
  std::vector<double> means;
  std::vector<double> weights;
  for (const Level& level : levels) {
    means.push_back(level.positives / level.count);
    weights.push_back(level.count);
  }
  CalibrationMap map;
  map.pooled_probabilities = PoolAdjacentViolators(means, weights);
  map.epsilon = 1.0 / (2.0 * static_cast<double>(scores.size()));
  for (size_t i = 0; i < levels.size(); ++i) {
    map.breakpoints.push_back(levels[i].score);
    const double p = std::clamp(map.pooled_probabilities[i], map.epsilon,
                                1.0 - map.epsilon);
    map.values.push_back(Logit(p));
  }
  return map;
}

absl::StatusOr<CalibrationDiagnostics> Diagnose(std::span<const double> scores,
                                                std::span<const double> outcomes,
                                                const CalibrationMap* map) {
  RETURN_IF_ERROR(CheckInputs(scores, outcomes));
  std::vector<double> x(scores.begin(), scores.end());
  if (map != nullptr) x = map->Apply(scores);

  CalibrationDiagnostics diagnostics;
  diagnostics.transformed = map != nullptr;
  const std::vector<Level> distinct = GroupByScore(x, outcomes);
  std::vector<Level> levels;
  if (static_cast<int>(distinct.size()) <= kMaxDiagnosticBuckets) {
    levels = distinct;
  } else {
    // Quantile buckets over rows; a tie group stays in the bucket of its
    // first row.
    diagnostics.bucketed = true;
    const double n = static_cast<double>(x.size());
    double rank = 0;
    int current_bucket = -1;
    for (const Level& level : distinct) {
      const int bucket = static_cast<int>(rank * kMaxDiagnosticBuckets / n);
      if (bucket != current_bucket) {
        levels.push_back({0, 0, 0});
        current_bucket = bucket;
      }
      levels.back().score += level.score * level.count;
      levels.back().count += level.count;
      levels.back().positives += level.positives;
      rank += level.count;
    }
    for (Level& level : levels) level.score /= level.count;
  }

  std::vector<double> xs;
  std::vector<double> ps;
  std::vector<double> logits;
  std::vector<double> ws;
  for (const Level& level : levels) {
    CalibrationLevel out;
    out.score = level.score;
    out.count = level.count;
    out.positives = level.positives;
    out.empirical_probability = level.positives / level.count;
    // Transformed scores are clamped logits, so the empirical side gets the
    // same clamp.
    const double eps =
        map != nullptr ? map->epsilon : 1.0 / (2.0 * level.count);
    out.empirical_logit =
        Logit(std::clamp(out.empirical_probability, eps, 1.0 - eps));
    diagnostics.levels.push_back(out);
    xs.push_back(out.score);
    ps.push_back(out.empirical_probability);
    logits.push_back(out.empirical_logit);
    ws.push_back(out.count);
  }
  diagnostics.probability_line = WeightedLine(xs, ps, ws, nullptr);
  diagnostics.logit_line =
      WeightedLine(xs, logits, ws, &diagnostics.linearity_residual);
  return diagnostics;
}

absl::StatusOr<CalibrationMode> ParseCalibrationMode(const std::string& text) {
  if (text == "auto") return CalibrationMode::kAuto;
  if (text == "on") return CalibrationMode::kOn;
  if (text == "off") return CalibrationMode::kOff;
  return absl::InvalidArgumentError(
      absl::StrCat("calibration mode must be auto, on or off, got '", text, "'"));
}

std::string CalibrationModeName(CalibrationMode mode) {
  switch (mode) {
    case CalibrationMode::kAuto:
      return "auto";
    case CalibrationMode::kOn:
      return "on";
    case CalibrationMode::kOff:
      return "off";
  }
  return "auto";
}

absl::StatusOr<CalibrationResult> Calibrate(std::span<const double> scores,
                                            std::span<const double> outcomes,
                                            CalibrationMode mode,
                                            double threshold) {
  CalibrationResult result;
  ASSIGN_OR_RETURN(result.before, Diagnose(scores, outcomes));
  CalibrationDecision& decision = result.decision;
  decision.mode = mode;
  decision.threshold = threshold;
  decision.residual_before = result.before.linearity_residual;
  const bool nonlinear = decision.residual_before > threshold;
  switch (mode) {
    case CalibrationMode::kOff:
      decision.calibrated = false;
      decision.reason =
          nonlinear
              ? absl::StrFormat(
                    "warning: calibration disabled although the logit "
                    "linearity residual %.4g exceeds the threshold %.4g",
                    decision.residual_before, threshold)
              : "calibration disabled";
      break;
    case CalibrationMode::kOn:
      decision.calibrated = true;
      decision.reason = "calibration forced on";
      break;
    case CalibrationMode::kAuto:
      decision.calibrated = nonlinear;
      decision.reason =
          absl::StrFormat(nonlinear ? "logit linearity residual %.4g exceeds %.4g"
                                    : "logit linearity residual %.4g is within %.4g",
                          decision.residual_before, threshold);
      break;
  }
  if (decision.calibrated) {
    ASSIGN_OR_RETURN(result.map, FitCalibration(scores, outcomes));
    ASSIGN_OR_RETURN(result.after, Diagnose(scores, outcomes, &*result.map));
    decision.residual_after = result.after->linearity_residual;
  }
  return result;
}

nlohmann::json MapToJson(const CalibrationMap& map) {
  return {{"format_version", 1},
          {"breakpoints", map.breakpoints},
          {"values", map.values},
          {"pooled_probabilities", map.pooled_probabilities},
          {"epsilon", map.epsilon}};
}

absl::StatusOr<CalibrationMap> MapFromJson(const nlohmann::json& json) {
  CalibrationMap map;
  try {
    map.breakpoints = json.at("breakpoints").get<std::vector<double>>();
    map.values = json.at("values").get<std::vector<double>>();
    map.pooled_probabilities =
        json.at("pooled_probabilities").get<std::vector<double>>();
    map.epsilon = json.at("epsilon").get<double>();
  } catch (const nlohmann::json::exception& e) {
    return absl::InvalidArgumentError(
        absl::StrCat("malformed calibration JSON: ", e.what()));
  }
  if (map.breakpoints.empty() || map.breakpoints.size() != map.values.size()) {
    return absl::InvalidArgumentError("calibration map arrays are inconsistent");
  }
  if (!std::is_sorted(map.values.begin(), map.values.end())) {
    return absl::InvalidArgumentError("calibration map is not monotone");
  }
  return map;
}

nlohmann::json DiagnosticsToJson(const CalibrationDiagnostics& d) {
  nlohmann::json levels = nlohmann::json::array();
  for (const CalibrationLevel& level : d.levels) {
    levels.push_back({{"score", level.score},
                      {"count", level.count},
                      {"positives", level.positives},
                      {"empirical_probability", level.empirical_probability},
                      {"empirical_logit", level.empirical_logit}});
  }
  return {{"levels", levels},
          {"bucketed", d.bucketed},
          {"transformed", d.transformed},
          {"probability_line",
           {{"intercept", d.probability_line.intercept},
            {"slope", d.probability_line.slope}}},
          {"logit_line",
           {{"intercept", d.logit_line.intercept},
            {"slope", d.logit_line.slope}}},
          {"linearity_residual", d.linearity_residual}};
}

std::string DiagnosticsToCsv(const CalibrationDiagnostics& d) {
  std::string out = "score_level,count,positives,empirical_p,logit_p\n";
  for (const CalibrationLevel& level : d.levels) {
    absl::StrAppendFormat(&out, "%.10g,%.0f,%.0f,%.10g,%.10g\n", level.score,
                          level.count, level.positives,
                          level.empirical_probability, level.empirical_logit);
  }
  return out;
}

}  // namespace dcaudit::calibrate
