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

#include "dcaudit/distill.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <utility>

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "dcaudit/parallel.h"
#include "dcaudit/random.h"
#include "dcaudit/status_macros.h"

namespace dcaudit::distill {
namespace {

std::vector<uint32_t> ToDataRows(std::span<const uint32_t> plan_rows,
                                 std::span<const uint32_t> labeled_rows) {
  std::vector<uint32_t> out;
  out.reserve(plan_rows.size());
  for (const uint32_t r : plan_rows) out.push_back(labeled_rows[r]);
  return out;
}

struct BagModels {
  gam::AdditiveModel mimic;
  gam::AdditiveModel outcome;
  std::optional<gam::AdditiveModel> mimic_interactions;
  std::optional<gam::AdditiveModel> outcome_interactions;
};

}  // namespace

absl::StatusOr<BagPlan> PlanBags(size_t num_rows, int outer_folds,
                                 int inner_folds, uint64_t seed) {
  if (outer_folds < 2 || inner_folds < 2) {
    return absl::InvalidArgumentError(absl::StrFormat(
        "K and L must be at least 2, got K=%d L=%d", outer_folds, inner_folds));
  }
  const size_t test_n =
      static_cast<size_t>(std::llround(kTestFraction * num_rows));
  const size_t validation_n =
      static_cast<size_t>(std::llround(kValidationFraction * num_rows));
  if (num_rows < 20 || test_n < 1 || validation_n < 1 ||
      num_rows <= test_n + validation_n) {
    return absl::InvalidArgumentError(absl::StrFormat(
        "T too small: %d rows cannot populate the test/train/validation "
        "splits (need at least 20)",
        num_rows));
  }
  BagPlan plan;
  plan.num_rows = num_rows;
  plan.outer_folds = outer_folds;
  plan.inner_folds = inner_folds;
  plan.seed = seed;
  plan.test.resize(outer_folds);
  plan.splits.resize(outer_folds);
  std::vector<uint32_t> rows(num_rows);
  for (int k = 0; k < outer_folds; ++k) {
    std::iota(rows.begin(), rows.end(), 0u);
    Rng outer_rng(DeriveSeed(seed, {static_cast<uint64_t>(k)}));
    std::shuffle(rows.begin(), rows.end(), outer_rng);
    plan.test[k].assign(rows.begin(), rows.begin() + test_n);
    std::sort(plan.test[k].begin(), plan.test[k].end());
    std::vector<uint32_t> pool(rows.begin() + test_n, rows.end());
    std::sort(pool.begin(), pool.end());
    plan.splits[k].resize(inner_folds);
    for (int l = 0; l < inner_folds; ++l) {
      std::vector<uint32_t> shuffled = pool;
      Rng inner_rng(DeriveSeed(
          seed, {static_cast<uint64_t>(k), static_cast<uint64_t>(l), 1}));
      std::shuffle(shuffled.begin(), shuffled.end(), inner_rng);
      InnerSplit& split = plan.splits[k][l];
      split.validation.assign(shuffled.begin(), shuffled.begin() + validation_n);
      split.train.assign(shuffled.begin() + validation_n, shuffled.end());
      std::sort(split.validation.begin(), split.validation.end());
      std::sort(split.train.begin(), split.train.end());
    }
  }
  return plan;
}

std::vector<double> BagEnsemble::MeanShape(int feature) const {
  std::vector<double> mean(models.front().shapes[feature].values.size(), 0.0);
  for (const gam::AdditiveModel& model : models) {
    const std::vector<double>& values = model.shapes[feature].values;
    for (size_t b = 0; b < mean.size(); ++b) mean[b] += values[b];
  }
  for (double& v : mean) v /= static_cast<double>(models.size());
  return mean;
}

double BagEnsemble::MeanIntercept() const {
  double sum = 0;
  for (const gam::AdditiveModel& model : models) sum += model.intercept;
  return sum / static_cast<double>(models.size());
}

std::vector<uint32_t> PairedEnsembles::OutcomeTrainRows(int k, int l) const {
  return ToDataRows(plan.split(k, l).train, labeled_rows);
}

std::vector<uint32_t> PairedEnsembles::MimicTrainRows(int k, int l) const {
  std::vector<uint32_t> rows = OutcomeTrainRows(k, l);
  rows.insert(rows.end(), score_only_rows.begin(), score_only_rows.end());
  std::sort(rows.begin(), rows.end());
  return rows;
}

std::vector<uint32_t> PairedEnsembles::ValidationRows(int k, int l) const {
  return ToDataRows(plan.split(k, l).validation, labeled_rows);
}

std::vector<uint32_t> PairedEnsembles::TestRows(int k) const {
  return ToDataRows(plan.test[k], labeled_rows);
}

std::vector<double> MimicTargets(
    const AuditDataset& data,
    const std::optional<calibrate::CalibrationMap>& map) {
  const std::span<const double> scores = data.scores();
  if (!map.has_value()) return {scores.begin(), scores.end()};
  return map->Apply(scores);
}

absl::StatusOr<PairedEnsembles> TrainPaired(
    const AuditDataset& data, const BinnedMatrix& x,
    const std::optional<calibrate::CalibrationMap>& map, const BagPlan& plan,
    const gam::TrainConfig& config, int jobs) {
  RETURN_IF_ERROR(gam::ValidateConfig(config));
  if (x.num_rows() != data.num_rows()) {
    return absl::InvalidArgumentError("binned matrix does not match the data");
  }
  PairedEnsembles result;
  result.labeled_rows = data.LabeledRows();
  result.score_only_rows = data.ScoreOnlyRows();
  if (plan.num_rows != result.labeled_rows.size()) {
    return absl::InvalidArgumentError(absl::StrFormat(
        "bag plan covers %d rows but the data has %d labeled rows",
        plan.num_rows, result.labeled_rows.size()));
  }
  result.plan = plan;
  result.schema = x.schema_ptr();
  result.calibration = map;
  result.config = config;

  const std::vector<double> mimic_targets = MimicTargets(data, map);
  std::vector<double> outcome_targets(data.num_rows(), 0.0);
  for (size_t r = 0; r < data.num_rows(); ++r) {
    outcome_targets[r] = data.outcomes()[r] == Outcome::kPositive ? 1.0 : 0.0;
  }

  const int K = plan.outer_folds;
  const int L = plan.inner_folds;
  const size_t num_bags = static_cast<size_t>(K) * L;
  std::vector<absl::StatusOr<BagModels>> bags(num_bags,
                                              absl::UnknownError("not run"));
  ParallelFor(num_bags, jobs, [&](size_t index) {
    const int k = static_cast<int>(index) / L;
    const int l = static_cast<int>(index) % L;
    const std::vector<uint32_t> outcome_train = result.OutcomeTrainRows(k, l);
    const std::vector<uint32_t> mimic_train = result.MimicTrainRows(k, l);
    const std::vector<uint32_t> validation = result.ValidationRows(k, l);
    gam::TrainConfig bag_config = config;
    bag_config.seed = DeriveSeed(config.seed, {static_cast<uint64_t>(index)});
    bags[index] = [&]() -> absl::StatusOr<BagModels> {
      BagModels models;
      ASSIGN_OR_RETURN(models.mimic,
                       gam::TrainRegressor(x, mimic_targets, bag_config,
                                           mimic_train, validation));
      ASSIGN_OR_RETURN(models.outcome,
                       gam::TrainClassifier(x, outcome_targets, bag_config,
                                            outcome_train, validation));
      if (config.interaction_pairs > 0) {
        ASSIGN_OR_RETURN(models.mimic_interactions,
                         gam::FitInteractions(models.mimic, x, mimic_targets,
                                              config.interaction_pairs,
                                              bag_config, mimic_train,
                                              validation));
        ASSIGN_OR_RETURN(models.outcome_interactions,
                         gam::FitInteractions(models.outcome, x, outcome_targets,
                                              config.interaction_pairs,
                                              bag_config, outcome_train,
                                              validation));
      }
      return models;
    }();
  });

  const auto init = [&](BagEnsemble* ensemble, gam::Link link) {
    ensemble->link = link;
    ensemble->outer_folds = K;
    ensemble->inner_folds = L;
    ensemble->models.reserve(num_bags);
  };
  init(&result.mimic, gam::Link::kIdentity);
  init(&result.outcome, gam::Link::kLogistic);
  if (config.interaction_pairs > 0) {
    result.mimic_interactions.emplace();
    result.outcome_interactions.emplace();
    init(&*result.mimic_interactions, gam::Link::kIdentity);
    init(&*result.outcome_interactions, gam::Link::kLogistic);
  }
  for (size_t index = 0; index < num_bags; ++index) {
    if (!bags[index].ok()) {
      return absl::Status(
          bags[index].status().code(),
          absl::StrFormat("bag (%d, %d): %s", index / L, index % L,
                          bags[index].status().message()));
    }
    BagModels& models = *bags[index];
    result.mimic.models.push_back(std::move(models.mimic));
    result.outcome.models.push_back(std::move(models.outcome));
    if (config.interaction_pairs > 0) {
      result.mimic_interactions->models.push_back(
          std::move(*models.mimic_interactions));
      result.outcome_interactions->models.push_back(
          std::move(*models.outcome_interactions));
    }
  }
  return result;
}

FidelityMetrics ScoreFolds(const std::vector<FoldPredictions>& folds) {
  FidelityMetrics metrics;
  std::vector<double> rmses;
  std::vector<double> aucs;
  for (const FoldPredictions& fold : folds) {
    FoldMetrics m;
    m.fold = fold.fold;
    m.rmse = Rmse(fold.mimic_raw_predictions, fold.raw_scores);
    m.auc = Auc(fold.outcome_probabilities, fold.outcomes);
    rmses.push_back(m.rmse);
    if (m.auc.has_value()) {
      aucs.push_back(*m.auc);
    } else {
      metrics.skipped_auc_folds.push_back(fold.fold);
    }
    metrics.folds.push_back(m);
  }
  metrics.rmse = Summarize(rmses);
  metrics.auc = Summarize(aucs);
  return metrics;
}

absl::StatusOr<FidelityMetrics> Fidelity(const PairedEnsembles& ensembles,
                                         const AuditDataset& data,
                                         const BinnedMatrix& x,
                                         ModelVariant variant) {
  const BagEnsemble* mimic = &ensembles.mimic;
  const BagEnsemble* outcome = &ensembles.outcome;
  if (variant == ModelVariant::kInteractions) {
    if (!ensembles.mimic_interactions.has_value()) {
      return absl::FailedPreconditionError(
          "ensembles were trained without interaction pairs");
    }
    mimic = &*ensembles.mimic_interactions;
    outcome = &*ensembles.outcome_interactions;
  }
  const int K = ensembles.plan.outer_folds;
  const int L = ensembles.plan.inner_folds;
  std::vector<FoldPredictions> folds;
  for (int k = 0; k < K; ++k) {
    FoldPredictions fold;
    fold.fold = k;
    const std::vector<uint32_t> rows = ensembles.TestRows(k);
    std::vector<double> mimic_sum(rows.size(), 0.0);
    std::vector<double> outcome_sum(rows.size(), 0.0);
    for (int l = 0; l < L; ++l) {
      ASSIGN_OR_RETURN(const std::vector<double> m,
                       gam::Predict(mimic->model(k, l), x, rows));
      ASSIGN_OR_RETURN(const std::vector<double> o,
                       gam::Predict(outcome->model(k, l), x, rows));
      for (size_t i = 0; i < rows.size(); ++i) {
        mimic_sum[i] += m[i];
        outcome_sum[i] += o[i];
      }
    }
    for (size_t i = 0; i < rows.size(); ++i) {
      const double mimic_mean = mimic_sum[i] / L;
      fold.mimic_raw_predictions.push_back(
          ensembles.calibration.has_value()
              ? ensembles.calibration->Invert(mimic_mean)
              : mimic_mean);
      fold.raw_scores.push_back(data.scores()[rows[i]]);
      fold.outcome_probabilities.push_back(outcome_sum[i] / L);
      fold.outcomes.push_back(
          data.outcomes()[rows[i]] == Outcome::kPositive ? 1.0 : 0.0);
    }
    folds.push_back(std::move(fold));
  }
  return ScoreFolds(folds);
}

nlohmann::json PlanToJson(const BagPlan& plan) {
  nlohmann::json json;
  json["format_version"] = 1;
  json["num_rows"] = plan.num_rows;
  json["outer_folds"] = plan.outer_folds;
  json["inner_folds"] = plan.inner_folds;
  json["seed"] = plan.seed;
  json["test"] = plan.test;
  json["splits"] = nlohmann::json::array();
  for (const auto& inner : plan.splits) {
    nlohmann::json row = nlohmann::json::array();
    for (const InnerSplit& split : inner) {
      row.push_back({{"train", split.train}, {"validation", split.validation}});
    }
    json["splits"].push_back(std::move(row));
  }
  return json;
}

absl::StatusOr<BagPlan> PlanFromJson(const nlohmann::json& json) {
  BagPlan plan;
  try {
    plan.num_rows = json.at("num_rows").get<size_t>();
    plan.outer_folds = json.at("outer_folds").get<int>();
    plan.inner_folds = json.at("inner_folds").get<int>();
    plan.seed = json.at("seed").get<uint64_t>();
    plan.test = json.at("test").get<std::vector<std::vector<uint32_t>>>();
    for (const auto& inner : json.at("splits")) {
      std::vector<InnerSplit> row;
      for (const auto& split : inner) {
        row.push_back({split.at("train").get<std::vector<uint32_t>>(),
                       split.at("validation").get<std::vector<uint32_t>>()});
      }
      plan.splits.push_back(std::move(row));
    }
  } catch (const nlohmann::json::exception& e) {
    return absl::InvalidArgumentError(
        absl::StrCat("malformed bag plan JSON: ", e.what()));
  }
  return plan;
}

nlohmann::json EnsembleToJson(const BagEnsemble& ensemble) {
  nlohmann::json json;
  json["format_version"] = 1;
  json["link"] = gam::LinkName(ensemble.link);
  json["outer_folds"] = ensemble.outer_folds;
  json["inner_folds"] = ensemble.inner_folds;
  json["models"] = nlohmann::json::array();
  for (const gam::AdditiveModel& model : ensemble.models) {
    json["models"].push_back(gam::ModelToJson(model));
  }
  return json;
}

absl::StatusOr<BagEnsemble> EnsembleFromJson(const nlohmann::json& json) {
  BagEnsemble ensemble;
  try {
    ensemble.link = json.at("link").get<std::string>() == "identity"
                        ? gam::Link::kIdentity
                        : gam::Link::kLogistic;
    ensemble.outer_folds = json.at("outer_folds").get<int>();
    ensemble.inner_folds = json.at("inner_folds").get<int>();
    for (const auto& model_json : json.at("models")) {
      ASSIGN_OR_RETURN(gam::AdditiveModel model, gam::ModelFromJson(model_json));
      ensemble.models.push_back(std::move(model));
    }
  } catch (const nlohmann::json::exception& e) {
    return absl::InvalidArgumentError(
        absl::StrCat("malformed ensemble JSON: ", e.what()));
  }
  if (ensemble.models.size() !=
      static_cast<size_t>(ensemble.outer_folds) * ensemble.inner_folds) {
    return absl::InvalidArgumentError("ensemble model count is not K*L");
  }
  return ensemble;
}

nlohmann::json FidelityToJson(const FidelityMetrics& metrics) {
  nlohmann::json folds = nlohmann::json::array();
  for (const FoldMetrics& f : metrics.folds) {
    nlohmann::json entry = {{"fold", f.fold}, {"rmse", f.rmse}};
    entry["auc"] = f.auc.has_value() ? nlohmann::json(*f.auc) : nlohmann::json();
    folds.push_back(std::move(entry));
  }
  return {{"folds", folds},
          {"rmse_mean", metrics.rmse.mean},
          {"rmse_std", metrics.rmse.stddev},
          {"auc_mean", metrics.auc.mean},
          {"auc_std", metrics.auc.stddev},
          {"auc_folds", metrics.auc.count},
          {"skipped_auc_folds", metrics.skipped_auc_folds}};
}

}  // namespace dcaudit::distill
