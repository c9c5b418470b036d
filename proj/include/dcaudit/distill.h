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

// Paired mimic / outcome training over two-level structured cross-validation.
//
// Each of K outer folds holds out 15% of the rows as a test set. Within the
// remaining 85%, each of L inner folds draws 15% (of the full set) for
// validation and keeps the remaining 70% for training. The mimic model
// (regression on the possibly calibrated score) and the outcome model
// (classification of the ground truth) of bag (k, l) see the same rows.

#ifndef DCAUDIT_DISTILL_H_
#define DCAUDIT_DISTILL_H_

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "absl/status/statusor.h"
#include "dcaudit/binning.h"
#include "dcaudit/calibration.h"
#include "dcaudit/dataset.h"
#include "dcaudit/gam.h"
#include "dcaudit/metrics.h"
#include "json.hpp"

namespace dcaudit::distill {

inline constexpr double kTestFraction = 0.15;
inline constexpr double kValidationFraction = 0.15;
inline constexpr int kDefaultOuterFolds = 5;
inline constexpr int kDefaultInnerFolds = 5;

struct InnerSplit {
  std::vector<uint32_t> train;
  std::vector<uint32_t> validation;
};

// Row indices refer to positions 0..num_rows-1 of whatever the plan was built
// over (the labeled rows, in PairedEnsembles).
struct BagPlan {
  size_t num_rows = 0;
  int outer_folds = 0;
  int inner_folds = 0;
  uint64_t seed = 0;
  // test[k]: held-out rows of outer fold k, ascending.
  std::vector<std::vector<uint32_t>> test;
  // splits[k][l], ascending index lists.
  std::vector<std::vector<InnerSplit>> splits;

  const InnerSplit& split(int k, int l) const { return splits[k][l]; }
};

// Outer test sets are independent draws without replacement, so two outer
// folds may share test rows.
absl::StatusOr<BagPlan> PlanBags(size_t num_rows, int outer_folds,
                                 int inner_folds, uint64_t seed);

// K x L models sharing a schema and link, stored at index k * L + l.
struct BagEnsemble {
  gam::Link link = gam::Link::kIdentity;
  int outer_folds = 0;
  int inner_folds = 0;
  std::vector<gam::AdditiveModel> models;

  const gam::AdditiveModel& model(int k, int l) const {
    return models[static_cast<size_t>(k) * inner_folds + l];
  }
  int num_features() const {
    return models.empty() ? 0 : models.front().num_features();
  }
  // Per-bin average of h_i over all bags.
  std::vector<double> MeanShape(int feature) const;
  double MeanIntercept() const;
};

struct PairedEnsembles {
  // Built over the labeled rows: plan row i is data row labeled_rows[i].
  BagPlan plan;
  std::vector<uint32_t> labeled_rows;
  // Added to every mimic training set, never to validation or test sets.
  std::vector<uint32_t> score_only_rows;
  std::shared_ptr<const FeatureSchema> schema;
  std::optional<calibrate::CalibrationMap> calibration;
  gam::TrainConfig config;

  BagEnsemble mimic;
  BagEnsemble outcome;
  // Present when config.interaction_pairs > 0; same main effects plus pairs.
  std::optional<BagEnsemble> mimic_interactions;
  std::optional<BagEnsemble> outcome_interactions;

  // Data row indices.
  std::vector<uint32_t> OutcomeTrainRows(int k, int l) const;
  std::vector<uint32_t> MimicTrainRows(int k, int l) const;
  std::vector<uint32_t> ValidationRows(int k, int l) const;
  std::vector<uint32_t> TestRows(int k) const;
};

// Mimic regression targets: the calibrated score when a map is given.
std::vector<double> MimicTargets(const AuditDataset& data,
                                 const std::optional<calibrate::CalibrationMap>& map);

// Trains all K x L bags; bags run on up to `jobs` threads and the result does
// not depend on `jobs`.
absl::StatusOr<PairedEnsembles> TrainPaired(
    const AuditDataset& data, const BinnedMatrix& x,
    const std::optional<calibrate::CalibrationMap>& map, const BagPlan& plan,
    const gam::TrainConfig& config, int jobs = 1);

struct FoldMetrics {
  int fold = 0;
  double rmse = 0;
  std::optional<double> auc;
};

struct FidelityMetrics {
  std::vector<FoldMetrics> folds;
  MeanAndSpread rmse;
  MeanAndSpread auc;
  // Folds whose test rows hold a single outcome class (AUC undefined).
  std::vector<int> skipped_auc_folds;
};

// Per outer fold: predictions averaged over its inner models, evaluated on
// that fold's test rows.
struct FoldPredictions {
  int fold = 0;
  std::vector<double> raw_scores;
  // Mimic predictions already mapped back to the raw score scale.
  std::vector<double> mimic_raw_predictions;
  std::vector<double> outcomes;
  std::vector<double> outcome_probabilities;
};

FidelityMetrics ScoreFolds(const std::vector<FoldPredictions>& folds);

enum class ModelVariant { kMainEffects, kInteractions };

// Mimic RMSE on the raw score scale (the calibration map is inverted) and
// outcome AUC, mean and spread over outer folds.
absl::StatusOr<FidelityMetrics> Fidelity(const PairedEnsembles& ensembles,
                                         const AuditDataset& data,
                                         const BinnedMatrix& x,
                                         ModelVariant variant =
                                             ModelVariant::kMainEffects);

nlohmann::json PlanToJson(const BagPlan& plan);
absl::StatusOr<BagPlan> PlanFromJson(const nlohmann::json& json);
nlohmann::json EnsembleToJson(const BagEnsemble& ensemble);
absl::StatusOr<BagEnsemble> EnsembleFromJson(const nlohmann::json& json);
nlohmann::json FidelityToJson(const FidelityMetrics& metrics);

}  // namespace dcaudit::distill

#endif  // DCAUDIT_DISTILL_H_
