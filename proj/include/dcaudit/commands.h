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


// End-to-end commands behind the dcaudit binary.
//
// An audit run writes one directory:
//   report.json          deterministic summary of every stage
//   run_metadata.json    timestamps and timings (not deterministic)
//   calibration.json     map, decision and diagnostics
//   models/              schema, bag plan, serialized ensembles, error pairs
//   curves/*.csv         contribution and difference curves
//   plots/*.svg          curve and calibration plots

#ifndef DCAUDIT_COMMANDS_H_
#define DCAUDIT_COMMANDS_H_

#include <cstdint>
#include <optional>
#include <string>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "dcaudit/calibration.h"
#include "dcaudit/gam.h"
#include "dcaudit/missing_features.h"
#include "dcaudit/synthetic.h"
#include "json.hpp"

namespace dcaudit::cli {

// Pipeline stage an error belongs to; decides the process exit code.
enum class Stage { kConfig, kData, kTraining, kStatistics };

std::string StageName(Stage stage);
int ExitCode(Stage stage);
// Attaches the stage to a non-OK status (OK passes through).
absl::Status Tag(absl::Status status, Stage stage);
std::optional<Stage> StageOf(const absl::Status& status);
// 0 for OK, the stage's code when tagged, 1 otherwise.
int ExitCodeFor(const absl::Status& status);

struct RunConfig {
  std::string data_path;
  std::string config_path;
  std::optional<std::string> score_column;
  std::optional<std::string> outcome_column;
  calibrate::CalibrationMode calibration = calibrate::CalibrationMode::kAuto;
  double calibration_threshold = calibrate::kDefaultResidualThreshold;
  int outer_folds = 5;
  int inner_folds = 5;
  uint64_t seed = 0;
  gam::TrainConfig train;
  int max_bins = 256;
  double l2 = 1e-6;
  int resamples = missing::kDefaultResamples;
  missing::ErrorScale error_scale = missing::ErrorScale::kCalibrated;
  bool fisher_z = false;
  int jobs = 1;
  std::string out_dir;
};

// Everything that can influence results (paths to outputs and the thread
// count are left out).
nlohmann::json RunConfigToJson(const RunConfig& config);

absl::Status RunCalibrate(const RunConfig& config);

// Returns the report that was written to report.json.
absl::StatusOr<nlohmann::json> RunAudit(const RunConfig& config);

struct TestMissingConfig {
  std::string errors_path;
  missing::CorrelationTestOptions options;
  std::string out_dir;
};
absl::StatusOr<nlohmann::json> RunTestMissing(const TestMissingConfig& config);

absl::Status RunGenSynthetic(const std::string& generator,
                             const synthetic::GeneratorOptions& options,
                             const std::string& out_path);

}  // namespace dcaudit::cli

#endif  // DCAUDIT_COMMANDS_H_
