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


// Test for audit data missing features that the black-box model uses: if the
// mimic model's errors and the outcome model's errors are positively
// correlated, some signal shared by the score and the outcome is absent from
// the audit features.

#ifndef DCAUDIT_MISSING_FEATURES_H_
#define DCAUDIT_MISSING_FEATURES_H_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "absl/status/statusor.h"
#include "dcaudit/binning.h"
#include "dcaudit/dataset.h"
#include "dcaudit/distill.h"
#include "json.hpp"

namespace dcaudit::missing {

inline constexpr size_t kMinPairs = 30;
inline constexpr int kDefaultResamples = 1000;
// Positive lower bounds at or below this count as weak evidence only.
inline constexpr double kWeakLowerBound = 0.01;

// Scale on which the mimic error is measured.
enum class ErrorScale {
  // The mimic's own target scale (the calibrated score when calibrating).
  kCalibrated,
  // The raw score scale, through the inverse calibration map.
  kRaw,
};

absl::StatusOr<ErrorScale> ParseErrorScale(const std::string& text);

struct ErrorPairs {
  std::vector<double> mimic_error;
  std::vector<double> outcome_error;
  std::vector<int> fold;
  // Data row of each pair.
  std::vector<uint32_t> rows;
  // Labeled rows that no outer fold held out.
  size_t never_held_out = 0;

  size_t size() const { return mimic_error.size(); }
};

// Each labeled row is scored by the first outer fold (lowest k) that holds it
// out, averaging that fold's inner models.
absl::StatusOr<ErrorPairs> ComputeErrorPairs(
    const distill::PairedEnsembles& paired, const AuditDataset& data,
    const BinnedMatrix& x, ErrorScale scale = ErrorScale::kCalibrated);

// Point estimates. Each returns std::nullopt when a margin is constant.
std::optional<double> Pearson(std::span<const double> x,
                              std::span<const double> y);
std::optional<double> Spearman(std::span<const double> x,
                               std::span<const double> y);
// Tau-b with tie correction, O(n log n).
std::optional<double> KendallTauB(std::span<const double> x,
                                  std::span<const double> y);

enum class Verdict { kNone, kWeakEvidence, kEvidence };
std::string VerdictName(Verdict verdict);

struct Interval {
  double estimate = 0;
  double lo = 0;
  double hi = 0;

  bool ExcludesZero() const { return lo > 0 || hi < 0; }
};

enum class PearsonInterval { kBootstrap, kFisherZ };

struct CorrelationTestOptions {
  int resamples = kDefaultResamples;
  uint64_t seed = 0;
  PearsonInterval pearson_interval = PearsonInterval::kBootstrap;
  int jobs = 1;
};

struct CorrelationTestResult {
  Interval pearson;
  Interval spearman;
  Interval kendall;
  int resamples = 0;
  // Resamples in which a margin was constant; they are left out of the
  // percentiles.
  int degenerate_resamples = 0;
  size_t num_pairs = 0;
  PearsonInterval pearson_interval = PearsonInterval::kBootstrap;
  Verdict verdict = Verdict::kNone;
};

Verdict DecideVerdict(const Interval& pearson, const Interval& spearman,
                      const Interval& kendall);

absl::StatusOr<CorrelationTestResult> CorrelationTest(
    std::span<const double> mimic_error, std::span<const double> outcome_error,
    const CorrelationTestOptions& options);

// Two numeric columns (mimic error, outcome error) with an optional header.
absl::StatusOr<ErrorPairs> ParseErrorPairsCsv(const std::string& text);
absl::StatusOr<ErrorPairs> LoadErrorPairsCsv(const std::string& path);
std::string ErrorPairsToCsv(const ErrorPairs& pairs);

nlohmann::json ResultToJson(const CorrelationTestResult& result);

}  // namespace dcaudit::missing

#endif  // DCAUDIT_MISSING_FEATURES_H_
