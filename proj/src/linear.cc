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


#include "dcaudit/linear.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <utility>

#include <Eigen/Dense>

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "dcaudit/parallel.h"
#include "dcaudit/status_macros.h"

namespace dcaudit::baseline {
namespace {

// Design matrix with a leading intercept column.
absl::StatusOr<Eigen::MatrixXd> Design(const LinearEncoding& encoding,
                                       const AuditDataset& data,
                                       std::span<const uint32_t> rows) {
  std::map<std::string, size_t> index;
  for (size_t f = 0; f < data.num_features(); ++f) {
    index[data.feature(f).name] = f;
  }
  std::vector<const FeatureColumn*> columns;
  for (size_t f = 0; f < encoding.feature_names.size(); ++f) {
    const auto it = index.find(encoding.feature_names[f]);
    if (it == index.end()) {
      return absl::InvalidArgumentError(absl::StrCat(
          "feature '", encoding.feature_names[f], "' is absent from the data"));
    }
    const FeatureColumn& column = data.feature(it->second);
    if (column.kind != encoding.kinds[f]) {
      return absl::InvalidArgumentError(absl::StrCat(
          "feature '", column.name, "' changed kind since encoding"));
    }
    columns.push_back(&column);
  }
  const size_t n = rows.empty() ? data.num_rows() : rows.size();
  Eigen::MatrixXd x = Eigen::MatrixXd::Zero(n, encoding.num_columns() + 1);
  x.col(0).setOnes();
  for (size_t i = 0; i < n; ++i) {
    const size_t row = rows.empty() ? i : rows[i];
    for (int c = 0; c < encoding.num_columns(); ++c) {
      const EncodedColumn& enc = encoding.columns[c];
      const FeatureColumn& column = *columns[enc.feature];
      if (enc.category < 0) {
        const double v = column.numeric[row];
        x(i, c + 1) = std::isnan(v) ? encoding.numeric_fill[enc.feature] : v;
      } else {
        const std::optional<std::string>& v = column.categorical[row];
        x(i, c + 1) =
            v.has_value() && *v == encoding.categories[enc.feature][enc.category]
                ? 1.0
                : 0.0;
      }
    }
  }
  return x;
}

double Softplus(double z) {
  return z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
}

double LogisticObjective(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                         const Eigen::VectorXd& beta, double l2) {
  const Eigen::VectorXd eta = x * beta;
  double loss = 0;
  for (Eigen::Index i = 0; i < eta.size(); ++i) {
    loss += Softplus(eta[i]) - y[i] * eta[i];
  }
  loss /= static_cast<double>(eta.size());
  return loss + 0.5 * l2 * beta.tail(beta.size() - 1).squaredNorm();
}

double SquaredObjective(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                        const Eigen::VectorXd& beta, double l2) {
  return 0.5 * (y - x * beta).squaredNorm() / static_cast<double>(y.size()) +
         0.5 * l2 * beta.tail(beta.size() - 1).squaredNorm();
}

}  // namespace

absl::StatusOr<LinearEncoding> MakeEncoding(const AuditDataset& data,
                                            const FeatureSchema& schema) {
  LinearEncoding encoding;
  for (int f = 0; f < schema.num_features(); ++f) {
    const FeatureBinning& binning = schema.features[f];
    const FeatureColumn* column = nullptr;
    for (const FeatureColumn& c : data.features()) {
      if (c.name == binning.name) column = &c;
    }
    if (column == nullptr) {
      return absl::InvalidArgumentError(absl::StrCat(
          "schema feature '", binning.name, "' is absent from the data"));
    }
    encoding.feature_names.push_back(binning.name);
    encoding.kinds.push_back(binning.kind);
    if (binning.kind == FeatureKind::kNumeric) {
      double sum = 0;
      size_t count = 0;
      for (const double v : column->numeric) {
        if (!std::isnan(v)) {
          sum += v;
          ++count;
        }
      }
      encoding.categories.emplace_back();
      encoding.numeric_fill.push_back(count > 0 ? sum / count : 0.0);
      encoding.columns.push_back({f, -1, binning.name});
    } else {
      encoding.categories.push_back(binning.categories);
      encoding.numeric_fill.push_back(0.0);
      for (size_t c = 0; c < binning.categories.size(); ++c) {
        encoding.columns.push_back({f, static_cast<int>(c),
                                    absl::StrCat(binning.name, "=",
                                                 binning.categories[c])});
      }
    }
  }
  return encoding;
}

absl::StatusOr<LinearModel> TrainLinear(const AuditDataset& data,
                                        const LinearEncoding& encoding,
                                        std::span<const double> targets,
                                        gam::Link link, double l2,
                                        std::span<const uint32_t> rows) {
  if (!(l2 >= 0) || !std::isfinite(l2)) {
    return absl::InvalidArgumentError("l2 must be a finite value >= 0");
  }
  if (targets.size() != data.num_rows()) {
    return absl::InvalidArgumentError("targets do not match the data rows");
  }
  ASSIGN_OR_RETURN(const Eigen::MatrixXd x, Design(encoding, data, rows));
  const Eigen::Index n = x.rows();
  const Eigen::Index p = x.cols();
  if (n == 0) return absl::InvalidArgumentError("no training rows");
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    y[i] = targets[rows.empty() ? i : rows[i]];
  }
  Eigen::VectorXd penalty = Eigen::VectorXd::Constant(p, l2);
  penalty[0] = 0;

  LinearModel model;
  model.link = link;
  model.l2 = l2;
  model.encoding = encoding;
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);

  if (link == gam::Link::kIdentity) {
    model.loss_history.push_back(SquaredObjective(x, y, beta, l2));
    if (l2 == 0) {
      Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x);
      if (qr.rank() < p) {
        return absl::FailedPreconditionError(absl::StrFormat(
            "singular design: rank %d of %d columns with l2 = 0", qr.rank(),
            p));
      }
      beta = qr.solve(y);
    } else {
      Eigen::MatrixXd normal = x.transpose() * x / static_cast<double>(n);
      normal.diagonal() += penalty;
      const Eigen::VectorXd rhs = x.transpose() * y / static_cast<double>(n);
      Eigen::LDLT<Eigen::MatrixXd> ldlt(normal);
      if (ldlt.info() != Eigen::Success) {
        return absl::FailedPreconditionError("singular design");
      }
      beta = ldlt.solve(rhs);
    }
    model.iterations = 1;
    model.loss_history.push_back(SquaredObjective(x, y, beta, l2));
    const Eigen::VectorXd gradient =
        -x.transpose() * (y - x * beta) / static_cast<double>(n) +
        penalty.cwiseProduct(beta);
    model.gradient_norm = gradient.norm();
  } else {
    const double positives = y.sum();
    if (positives == 0 || positives == static_cast<double>(n)) {
      return absl::FailedPreconditionError("single-class training data");
    }
    double objective = LogisticObjective(x, y, beta, l2);
    model.loss_history.push_back(objective);
    model.converged = false;
    for (int iteration = 0; iteration < kMaxNewtonIterations; ++iteration) {
      const Eigen::VectorXd eta = x * beta;
      Eigen::VectorXd prob(n), weight(n);
      for (Eigen::Index i = 0; i < n; ++i) {
        prob[i] = gam::Sigmoid(eta[i]);
        weight[i] = prob[i] * (1 - prob[i]);
      }
      const Eigen::VectorXd gradient =
          x.transpose() * (prob - y) / static_cast<double>(n) +
          penalty.cwiseProduct(beta);
      model.gradient_norm = gradient.norm();
      if (model.gradient_norm <= kGradientTolerance) {
        model.converged = true;
        break;
      }
      Eigen::MatrixXd hessian =
          x.transpose() * weight.asDiagonal() * x / static_cast<double>(n);
      hessian.diagonal() += penalty;
      Eigen::LDLT<Eigen::MatrixXd> ldlt(hessian);
      if (ldlt.info() != Eigen::Success || !(ldlt.rcond() > 1e-14)) {
        return absl::FailedPreconditionError(
            "singular design: Hessian is not invertible");
      }
      const Eigen::VectorXd step = ldlt.solve(gradient);
      double t = 1;
      Eigen::VectorXd candidate = beta - step;
      double candidate_objective = LogisticObjective(x, y, candidate, l2);
      while (candidate_objective > objective && t > 1e-12) {
        t *= 0.5;
        candidate = beta - t * step;
        candidate_objective = LogisticObjective(x, y, candidate, l2);
      }
      if (candidate_objective > objective) break;
      beta = candidate;
      objective = candidate_objective;
      model.loss_history.push_back(objective);
      model.iterations = iteration + 1;
    }
    if (!model.converged) {
      const Eigen::VectorXd eta = x * beta;
      Eigen::VectorXd prob(n);
      for (Eigen::Index i = 0; i < n; ++i) prob[i] = gam::Sigmoid(eta[i]);
      model.gradient_norm =
          (x.transpose() * (prob - y) / static_cast<double>(n) +
           penalty.cwiseProduct(beta))
              .norm();
      model.converged = model.gradient_norm <= kGradientTolerance;
    }
  }
  model.intercept = beta[0];
  model.weights.assign(beta.data() + 1, beta.data() + p);
  return model;
}

absl::StatusOr<std::vector<double>> PredictLinear(
    const LinearModel& model, const AuditDataset& data,
    std::span<const uint32_t> rows) {
  ASSIGN_OR_RETURN(const Eigen::MatrixXd x, Design(model.encoding, data, rows));
  Eigen::VectorXd beta(model.weights.size() + 1);
  beta[0] = model.intercept;
  for (size_t i = 0; i < model.weights.size(); ++i) beta[i + 1] = model.weights[i];
  const Eigen::VectorXd eta = x * beta;
  std::vector<double> out(eta.data(), eta.data() + eta.size());
  if (model.link == gam::Link::kLogistic) {
    for (double& v : out) v = gam::Sigmoid(v);
  }
  return out;
}

absl::StatusOr<LinearEnsembles> TrainLinearPaired(
    const distill::PairedEnsembles& paired, const AuditDataset& data,
    double l2, int jobs) {
  if (paired.schema == nullptr) {
    return absl::FailedPreconditionError("paired ensembles carry no schema");
  }
  ASSIGN_OR_RETURN(const LinearEncoding encoding,
                   MakeEncoding(data, *paired.schema));
  const std::vector<double> mimic_targets =
      distill::MimicTargets(data, paired.calibration);
  std::vector<double> outcome_targets(data.num_rows());
  for (size_t r = 0; r < data.num_rows(); ++r) {
    outcome_targets[r] = data.outcomes()[r] == Outcome::kPositive ? 1.0 : 0.0;
  }
  const int K = paired.plan.outer_folds;
  const int L = paired.plan.inner_folds;
  const size_t num_bags = static_cast<size_t>(K) * L;
  std::vector<absl::StatusOr<LinearModel>> mimic(num_bags,
                                                 absl::UnknownError("not run"));
  std::vector<absl::StatusOr<LinearModel>> outcome(
      num_bags, absl::UnknownError("not run"));
  ParallelFor(num_bags, jobs, [&](size_t index) {
    const int k = static_cast<int>(index) / L;
    const int l = static_cast<int>(index) % L;
    mimic[index] = TrainLinear(data, encoding, mimic_targets,
                               gam::Link::kIdentity, l2,
                               paired.MimicTrainRows(k, l));
    outcome[index] = TrainLinear(data, encoding, outcome_targets,
                                 gam::Link::kLogistic, l2,
                                 paired.OutcomeTrainRows(k, l));
  });
  LinearEnsembles out;
  out.outer_folds = K;
  out.inner_folds = L;
  for (size_t index = 0; index < num_bags; ++index) {
    RETURN_IF_ERROR(mimic[index].status());
    RETURN_IF_ERROR(outcome[index].status());
    out.mimic.push_back(std::move(*mimic[index]));
    out.outcome.push_back(std::move(*outcome[index]));
  }
  return out;
}

absl::StatusOr<distill::FidelityMetrics> LinearFidelity(
    const LinearEnsembles& ensembles, const distill::PairedEnsembles& paired,
    const AuditDataset& data) {
  std::vector<distill::FoldPredictions> folds;
  for (int k = 0; k < ensembles.outer_folds; ++k) {
    distill::FoldPredictions fold;
    fold.fold = k;
    const std::vector<uint32_t> rows = paired.TestRows(k);
    std::vector<double> mimic(rows.size(), 0.0);
    std::vector<double> outcome(rows.size(), 0.0);
    for (int l = 0; l < ensembles.inner_folds; ++l) {
      ASSIGN_OR_RETURN(const std::vector<double> m,
                       PredictLinear(ensembles.mimic_model(k, l), data, rows));
      ASSIGN_OR_RETURN(
          const std::vector<double> o,
          PredictLinear(ensembles.outcome_model(k, l), data, rows));
      for (size_t i = 0; i < rows.size(); ++i) {
        mimic[i] += m[i] / ensembles.inner_folds;
        outcome[i] += o[i] / ensembles.inner_folds;
      }
    }
    for (size_t i = 0; i < rows.size(); ++i) {
      fold.mimic_raw_predictions.push_back(
          paired.calibration.has_value() ? paired.calibration->Invert(mimic[i])
                                         : mimic[i]);
      fold.raw_scores.push_back(data.scores()[rows[i]]);
      fold.outcome_probabilities.push_back(outcome[i]);
      fold.outcomes.push_back(
          data.outcomes()[rows[i]] == Outcome::kPositive ? 1.0 : 0.0);
    }
    folds.push_back(std::move(fold));
  }
  return distill::ScoreFolds(folds);
}

nlohmann::json LinearToJson(const LinearModel& model) {
  nlohmann::json columns = nlohmann::json::array();
  for (size_t c = 0; c < model.weights.size(); ++c) {
    const EncodedColumn& enc = model.encoding.columns[c];
    columns.push_back({{"name", enc.name},
                       {"feature", model.encoding.feature_names[enc.feature]},
                       {"weight", model.weights[c]}});
  }
  return {{"link", gam::LinkName(model.link)},
          {"intercept", model.intercept},
          {"l2", model.l2},
          {"columns", std::move(columns)},
          {"numeric_fill", model.encoding.numeric_fill},
          {"iterations", model.iterations},
          {"gradient_norm", model.gradient_norm},
          {"converged", model.converged}};
}

nlohmann::json LinearEnsemblesToJson(const LinearEnsembles& ensembles) {
  nlohmann::json mimic = nlohmann::json::array();
  nlohmann::json outcome = nlohmann::json::array();
  for (const LinearModel& m : ensembles.mimic) mimic.push_back(LinearToJson(m));
  for (const LinearModel& m : ensembles.outcome) {
    outcome.push_back(LinearToJson(m));
  }
  return {{"format_version", 1},
          {"outer_folds", ensembles.outer_folds},
          {"inner_folds", ensembles.inner_folds},
          {"mimic", std::move(mimic)},
          {"outcome", std::move(outcome)}};
}

}  // namespace dcaudit::baseline
