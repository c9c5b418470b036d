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

// Additive models over binned features,
//
//   g(y) = intercept + sum_i h_i(x_i) + sum_{(i,j)} h_ij(x_i, x_j),
//
// fitted by cyclic gradient boosting: every round visits the features in
// schema order and fits one shallow tree per feature on the current
// pseudo-residuals. Trees are not kept. Their leaf values are accumulated
// directly into per-bin lookup tables, so a trained model is just the tables.
//
// Regression models (mimics of a risk score) use the identity link and
// squared error. Classification models (outcome models) use the logistic link
// and the Bernoulli log-likelihood with Newton leaf values.

#ifndef DCAUDIT_GAM_H_
#define DCAUDIT_GAM_H_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "dcaudit/binning.h"
#include "json.hpp"

namespace dcaudit::gam {

enum class Link { kIdentity, kLogistic };

std::string LinkName(Link link);

struct TrainConfig {
  double learning_rate = 0.01;
  int max_rounds = 5000;
  int max_leaves = 3;
  // Rounds without validation improvement before stopping.
  int patience = 50;
  // A validation loss counts as an improvement only when it beats the best so
  // far by more than this fraction of the starting validation loss.
  double min_relative_improvement = 1e-9;
  // When false, all max_rounds rounds run and the validation rows are only
  // monitored.
  bool early_stopping = true;
  int interaction_pairs = 0;
  uint64_t seed = 0;
};

absl::Status ValidateConfig(const TrainConfig& config);

// Per-bin contribution of one feature.
struct ShapeFunction {
  int feature = 0;
  std::vector<double> values;
};

// Per-cell contribution of a feature pair, row-major over
// (bin of `first`, bin of `second`).
struct InteractionSurface {
  int first = 0;
  int second = 0;
  int first_bins = 0;
  int second_bins = 0;
  std::vector<double> values;

  double at(int first_bin, int second_bin) const {
    return values[static_cast<size_t>(first_bin) * second_bins + second_bin];
  }
};

struct TrainingMetadata {
  int rounds_run = 0;
  int best_round = 0;
  double learning_rate = 0;
  // Loss after every full cyclic pass; entry 0 is the intercept-only loss.
  std::vector<double> training_loss;
  std::vector<double> validation_loss;
  bool constant_target = false;
  int interaction_rounds = 0;
};

struct AdditiveModel {
  Link link = Link::kIdentity;
  double intercept = 0;
  std::vector<std::string> feature_names;
  std::vector<ShapeFunction> shapes;
  std::vector<InteractionSurface> interactions;
  TrainingMetadata metadata;

  int num_features() const { return static_cast<int>(shapes.size()); }
};

// An intercept-only model whose shapes cover the schema's bins.
AdditiveModel MakeInterceptOnlyModel(const FeatureSchema& schema, Link link,
                                     double intercept);

// Squared-error boosting. `validation_rows` drives early stopping and may be
// empty, in which case all `max_rounds` rounds run.
absl::StatusOr<AdditiveModel> TrainRegressor(
    const BinnedMatrix& x, std::span<const double> targets,
    const TrainConfig& config, std::span<const uint32_t> train_rows,
    std::span<const uint32_t> validation_rows);

// Log-loss boosting on 0/1 outcomes.
absl::StatusOr<AdditiveModel> TrainClassifier(
    const BinnedMatrix& x, std::span<const double> outcomes,
    const TrainConfig& config, std::span<const uint32_t> train_rows,
    std::span<const uint32_t> validation_rows);

// All rows of `x` as one index list.
std::vector<uint32_t> AllRows(size_t num_rows);

struct PairScore {
  int first = 0;
  int second = 0;
  double gain = 0;
};

// Scores every feature pair by how much variance of the main-effect
// pseudo-residuals a coarse (at most 16x16) grid of cell means explains.
// Sorted by decreasing gain; ties keep lexicographic pair order.
std::vector<PairScore> RankInteractionPairs(const AdditiveModel& model,
                                            const BinnedMatrix& x,
                                            std::span<const double> targets,
                                            std::span<const uint32_t> train_rows);

// Adds `n_pairs` interaction surfaces to a main-effect model. The pairs are
// chosen by RankInteractionPairs and boosted on the residuals with the main
// effects frozen.
absl::StatusOr<AdditiveModel> FitInteractions(
    const AdditiveModel& model, const BinnedMatrix& x,
    std::span<const double> targets, int n_pairs, const TrainConfig& config,
    std::span<const uint32_t> train_rows,
    std::span<const uint32_t> validation_rows);

absl::Status CheckCompatible(const AdditiveModel& model, const BinnedMatrix& x);

// Output on the link scale: intercept, then shapes in feature order, then
// surfaces in stored order.
double LinkScore(const AdditiveModel& model, const BinnedMatrix& x, size_t row);

// The individual terms LinkScore adds up, in the same order.
std::vector<double> LinkTerms(const AdditiveModel& model, const BinnedMatrix& x,
                              size_t row);

absl::StatusOr<std::vector<double>> PredictLink(
    const AdditiveModel& model, const BinnedMatrix& x,
    std::span<const uint32_t> rows = {});

// Identity link: the additive sum. Logistic link: probabilities.
absl::StatusOr<std::vector<double>> Predict(const AdditiveModel& model,
                                            const BinnedMatrix& x,
                                            std::span<const uint32_t> rows = {});

absl::StatusOr<ShapeFunction> Contribution(const AdditiveModel& model,
                                           int feature);

double Sigmoid(double z);

// Negative gradient of the summed loss with respect to each row's link score:
// target - score for squared error (halved loss), outcome - p for log loss.
std::vector<double> PseudoResiduals(Link link, std::span<const double> targets,
                                    std::span<const double> link_scores);

// Mean loss (squared error, or negative Bernoulli log-likelihood) of link
// scores against targets.
double MeanLoss(Link link, std::span<const double> targets,
                std::span<const double> link_scores);

nlohmann::json ModelToJson(const AdditiveModel& model);
absl::StatusOr<AdditiveModel> ModelFromJson(const nlohmann::json& json);

}  // namespace dcaudit::gam

#endif  // DCAUDIT_GAM_H_
