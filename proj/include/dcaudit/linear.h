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


// Linear mimic and outcome baselines over raw features. Numeric features enter
// as one column each (missing values imputed with the column mean); categorical
// features are one-hot encoded over the categories seen when fitting the
// schema, so unseen or missing categories contribute nothing.

#ifndef DCAUDIT_LINEAR_H_
#define DCAUDIT_LINEAR_H_

#include <span>
#include <string>
#include <vector>

#include "absl/status/statusor.h"
#include "dcaudit/binning.h"
#include "dcaudit/dataset.h"
#include "dcaudit/distill.h"
#include "dcaudit/gam.h"
#include "json.hpp"

namespace dcaudit::baseline {

inline constexpr double kDefaultL2 = 1e-6;
inline constexpr double kGradientTolerance = 1e-8;
inline constexpr int kMaxNewtonIterations = 100;

struct EncodedColumn {
  int feature = 0;
  // Index into the feature's categories, or -1 for a numeric column.
  int category = -1;
  std::string name;
};

struct LinearEncoding {
  std::vector<std::string> feature_names;
  std::vector<FeatureKind> kinds;
  std::vector<std::vector<std::string>> categories;
  // Imputed value for missing numeric entries (0 for categorical features).
  std::vector<double> numeric_fill;
  std::vector<EncodedColumn> columns;

  int num_columns() const { return static_cast<int>(columns.size()); }
};

absl::StatusOr<LinearEncoding> MakeEncoding(const AuditDataset& data,
                                            const FeatureSchema& schema);

struct LinearModel {
  gam::Link link = gam::Link::kIdentity;
  double intercept = 0;
  double l2 = kDefaultL2;
  LinearEncoding encoding;
  // One weight per encoded column.
  std::vector<double> weights;
  int iterations = 0;
  double gradient_norm = 0;
  bool converged = true;
  // Penalized mean loss after each Newton step (entry 0: starting point).
  std::vector<double> loss_history;
};

// Minimizes mean loss + (l2 / 2) * |weights|^2; the intercept is not
// penalized. The identity link uses squared error / 2, the logistic link the
// Bernoulli negative log-likelihood (Newton steps with step halving).
absl::StatusOr<LinearModel> TrainLinear(const AuditDataset& data,
                                        const LinearEncoding& encoding,
                                        std::span<const double> targets,
                                        gam::Link link, double l2,
                                        std::span<const uint32_t> rows = {});

// Predictions on the response scale (probabilities for the logistic link).
absl::StatusOr<std::vector<double>> PredictLinear(
    const LinearModel& model, const AuditDataset& data,
    std::span<const uint32_t> rows = {});

// Linear mimic / outcome pairs trained on the same bags as `paired` (only its
// plan, rows and calibration are read).
struct LinearEnsembles {
  int outer_folds = 0;
  int inner_folds = 0;
  std::vector<LinearModel> mimic;
  std::vector<LinearModel> outcome;

  const LinearModel& mimic_model(int k, int l) const {
    return mimic[static_cast<size_t>(k) * inner_folds + l];
  }
  const LinearModel& outcome_model(int k, int l) const {
    return outcome[static_cast<size_t>(k) * inner_folds + l];
  }
};

absl::StatusOr<LinearEnsembles> TrainLinearPaired(
    const distill::PairedEnsembles& paired, const AuditDataset& data,
    double l2 = kDefaultL2, int jobs = 1);

// Same protocol as distill::Fidelity: the outer-fold test rows, inner
// predictions averaged.
absl::StatusOr<distill::FidelityMetrics> LinearFidelity(
    const LinearEnsembles& ensembles, const distill::PairedEnsembles& paired,
    const AuditDataset& data);

nlohmann::json LinearToJson(const LinearModel& model);
nlohmann::json LinearEnsemblesToJson(const LinearEnsembles& ensembles);

}  // namespace dcaudit::baseline

#endif  // DCAUDIT_LINEAR_H_
