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

#include "dcaudit/gam.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <utility>

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "dcaudit/status_macros.h"
#include "gam_internal.h"

namespace dcaudit::gam {
namespace internal {
namespace {

struct Segment {
  int begin = 0;  // Positions in the search order, [begin, end).
  int end = 0;
  double gradient = 0;
  double hessian = 0;
  int best_cut = -1;
  double best_gain = 0;
};

double LeafScore(double gradient, double hessian) {
  return hessian > 0 ? gradient * gradient / hessian : 0.0;
}

void FindBestCut(const std::vector<int>& order,
                 std::span<const double> gradient_sums,
                 std::span<const double> hessian_sums, Segment* segment) {
  segment->best_cut = -1;
  segment->best_gain = 0;
  const double parent = LeafScore(segment->gradient, segment->hessian);
  double left_g = 0;
  double left_h = 0;
  for (int cut = segment->begin + 1; cut < segment->end; ++cut) {
    left_g += gradient_sums[order[cut - 1]];
    left_h += hessian_sums[order[cut - 1]];
    const double right_g = segment->gradient - left_g;
    const double right_h = segment->hessian - left_h;
    if (left_h <= 0 || right_h <= 0) continue;
    const double gain =
        LeafScore(left_g, left_h) + LeafScore(right_g, right_h) - parent;
    if (gain > segment->best_gain) {
      segment->best_gain = gain;
      segment->best_cut = cut;
    }
  }
}

// Best single cut of a 1-D profile: returns the summed leaf scores (or the
// unsplit score) and the cut position (-1 when unsplit).
std::pair<double, int> BestProfileSplit(const std::vector<double>& g,
                                        const std::vector<double>& h) {
  double total_g = 0;
  double total_h = 0;
  for (size_t i = 0; i < g.size(); ++i) {
    total_g += g[i];
    total_h += h[i];
  }
  double best = LeafScore(total_g, total_h);
  int best_cut = -1;
  double left_g = 0;
  double left_h = 0;
  for (size_t cut = 1; cut < g.size(); ++cut) {
    left_g += g[cut - 1];
    left_h += h[cut - 1];
    const double right_h = total_h - left_h;
    if (left_h <= 0 || right_h <= 0) continue;
    const double score =
        LeafScore(left_g, left_h) + LeafScore(total_g - left_g, right_h);
    if (score > best) {
      best = score;
      best_cut = static_cast<int>(cut);
    }
  }
  return {best, best_cut};
}

}  // namespace

std::vector<double> FitBinTree(std::span<const double> gradient_sums,
                               std::span<const double> hessian_sums,
                               int max_leaves, bool categorical) {
  const int num_bins = static_cast<int>(gradient_sums.size());
  std::vector<int> order(num_bins);
  std::iota(order.begin(), order.end(), 0);
  if (categorical) {
    // Populated bins by increasing mean gradient, then empty bins.
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
      const bool a_empty = hessian_sums[a] <= 0;
      const bool b_empty = hessian_sums[b] <= 0;
      if (a_empty != b_empty) return b_empty;
      if (a_empty) return false;
      return gradient_sums[a] / hessian_sums[a] <
             gradient_sums[b] / hessian_sums[b];
    });
  }

  std::vector<Segment> leaves(1);
  leaves[0].begin = 0;
  leaves[0].end = num_bins;
  for (int b = 0; b < num_bins; ++b) {
    leaves[0].gradient += gradient_sums[b];
    leaves[0].hessian += hessian_sums[b];
  }
  FindBestCut(order, gradient_sums, hessian_sums, &leaves[0]);

  while (static_cast<int>(leaves.size()) < max_leaves) {
    int chosen = -1;
    for (int i = 0; i < static_cast<int>(leaves.size()); ++i) {
      if (leaves[i].best_cut < 0) continue;
      if (chosen < 0 || leaves[i].best_gain > leaves[chosen].best_gain ||
          (leaves[i].best_gain == leaves[chosen].best_gain &&
           leaves[i].best_cut < leaves[chosen].best_cut)) {
        chosen = i;
      }
    }
    if (chosen < 0) break;
    Segment left = leaves[chosen];
    Segment right = leaves[chosen];
    left.end = right.begin = leaves[chosen].best_cut;
    left.gradient = left.hessian = 0;
    for (int pos = left.begin; pos < left.end; ++pos) {
      left.gradient += gradient_sums[order[pos]];
      left.hessian += hessian_sums[order[pos]];
    }
    right.gradient = leaves[chosen].gradient - left.gradient;
    right.hessian = leaves[chosen].hessian - left.hessian;
    FindBestCut(order, gradient_sums, hessian_sums, &left);
    FindBestCut(order, gradient_sums, hessian_sums, &right);
    leaves[chosen] = left;
    leaves.push_back(right);
  }

  std::vector<double> values(num_bins, 0.0);
  for (const Segment& leaf : leaves) {
    const double value =
        leaf.hessian > 1e-12 ? leaf.gradient / leaf.hessian : 0.0;
    for (int pos = leaf.begin; pos < leaf.end; ++pos) values[order[pos]] = value;
  }
  return values;
}

std::vector<double> FitPairTree(std::span<const double> gradient_sums,
                                std::span<const double> hessian_sums,
                                int first_bins, int second_bins) {
  double total_g = 0;
  double total_h = 0;
  for (size_t i = 0; i < gradient_sums.size(); ++i) {
    total_g += gradient_sums[i];
    total_h += hessian_sums[i];
  }
  std::vector<double> values(gradient_sums.size(), 0.0);
  if (total_h <= 1e-12) return values;

  struct Best {
    double score = -1;
    bool first_axis_outer = true;
    int outer_cut = -1;
    int left_inner_cut = -1;
    int right_inner_cut = -1;
  } best;

  for (const bool first_axis_outer : {true, false}) {
    const int outer_bins = first_axis_outer ? first_bins : second_bins;
    const int inner_bins = first_axis_outer ? second_bins : first_bins;
    const auto cell = [&](int outer, int inner) {
      return first_axis_outer
                 ? static_cast<size_t>(outer) * second_bins + inner
                 : static_cast<size_t>(inner) * second_bins + outer;
    };
    std::vector<double> total_profile_g(inner_bins, 0.0);
    std::vector<double> total_profile_h(inner_bins, 0.0);
    for (int o = 0; o < outer_bins; ++o) {
      for (int i = 0; i < inner_bins; ++i) {
        total_profile_g[i] += gradient_sums[cell(o, i)];
        total_profile_h[i] += hessian_sums[cell(o, i)];
      }
    }
    std::vector<double> left_g(inner_bins, 0.0);
    std::vector<double> left_h(inner_bins, 0.0);
    std::vector<double> right_g(inner_bins);
    std::vector<double> right_h(inner_bins);
    double left_total_h = 0;
    for (int cut = 1; cut < outer_bins; ++cut) {
      for (int i = 0; i < inner_bins; ++i) {
        left_g[i] += gradient_sums[cell(cut - 1, i)];
        left_h[i] += hessian_sums[cell(cut - 1, i)];
        left_total_h += hessian_sums[cell(cut - 1, i)];
      }
      if (left_total_h <= 0 || total_h - left_total_h <= 0) continue;
      for (int i = 0; i < inner_bins; ++i) {
        right_g[i] = total_profile_g[i] - left_g[i];
        right_h[i] = total_profile_h[i] - left_h[i];
      }
      const auto [left_score, left_cut] = BestProfileSplit(left_g, left_h);
      const auto [right_score, right_cut] = BestProfileSplit(right_g, right_h);
      const double score = left_score + right_score;
      if (score > best.score) {
        best = {score, first_axis_outer, cut, left_cut, right_cut};
      }
    }
  }

  if (best.outer_cut < 0 || best.score <= LeafScore(total_g, total_h)) {
    std::fill(values.begin(), values.end(), total_g / total_h);
    return values;
  }

  const int outer_bins = best.first_axis_outer ? first_bins : second_bins;
  const int inner_bins = best.first_axis_outer ? second_bins : first_bins;
  const auto cell = [&](int outer, int inner) {
    return best.first_axis_outer
               ? static_cast<size_t>(outer) * second_bins + inner
               : static_cast<size_t>(inner) * second_bins + outer;
  };
  // Leaf id: 2 * side + (inner position past the side's cut).
  const auto leaf_of = [&](int outer, int inner) {
    const int side = outer < best.outer_cut ? 0 : 1;
    const int inner_cut = side == 0 ? best.left_inner_cut : best.right_inner_cut;
    return 2 * side + (inner_cut >= 0 && inner >= inner_cut ? 1 : 0);
  };
  double leaf_g[4] = {0, 0, 0, 0};
  double leaf_h[4] = {0, 0, 0, 0};
  for (int o = 0; o < outer_bins; ++o) {
    for (int i = 0; i < inner_bins; ++i) {
      const int leaf = leaf_of(o, i);
      leaf_g[leaf] += gradient_sums[cell(o, i)];
      leaf_h[leaf] += hessian_sums[cell(o, i)];
    }
  }
  for (int o = 0; o < outer_bins; ++o) {
    for (int i = 0; i < inner_bins; ++i) {
      const int leaf = leaf_of(o, i);
      values[cell(o, i)] = leaf_h[leaf] > 1e-12 ? leaf_g[leaf] / leaf_h[leaf] : 0.0;
    }
  }
  return values;
}

absl::Status CheckTrainingRows(size_t num_rows,
                               std::span<const uint32_t> train_rows,
                               std::span<const uint32_t> validation_rows) {
  if (train_rows.empty()) {
    return absl::InvalidArgumentError("empty training set");
  }
  std::vector<uint8_t> role(num_rows, 0);
  for (const uint32_t r : train_rows) {
    if (r >= num_rows) {
      return absl::InvalidArgumentError(
          absl::StrFormat("training row %d out of range", r));
    }
    role[r] = 1;
  }
  for (const uint32_t r : validation_rows) {
    if (r >= num_rows) {
      return absl::InvalidArgumentError(
          absl::StrFormat("validation row %d out of range", r));
    }
    if (role[r] == 1) {
      return absl::InvalidArgumentError(absl::StrFormat(
          "row %d is in both the training and validation sets", r));
    }
  }
  return absl::OkStatus();
}

void CenterModel(AdditiveModel* model, const BinnedMatrix& x,
                 std::span<const uint32_t> train_rows, bool shapes_frozen) {
  const double n = static_cast<double>(train_rows.size());
  for (ShapeFunction& shape : model->shapes) {
    if (shapes_frozen) break;
    const auto bins = x.column(shape.feature);
    double sum = 0;
    for (const uint32_t r : train_rows) sum += shape.values[bins[r]];
    const double mean = sum / n;
    for (double& v : shape.values) v -= mean;
    model->intercept += mean;
  }
  for (InteractionSurface& surface : model->interactions) {
    const auto first = x.column(surface.first);
    const auto second = x.column(surface.second);
    double sum = 0;
    for (const uint32_t r : train_rows) sum += surface.at(first[r], second[r]);
    const double mean = sum / n;
    for (double& v : surface.values) v -= mean;
    model->intercept += mean;
  }
}

}  // namespace internal

namespace {

using internal::GradientAndHessian;
using internal::RowLoss;

// Cyclic boosting of main effects on a gathered copy of the training and
// validation rows.
class MainEffectBooster {
 public:
  MainEffectBooster(const BinnedMatrix& x, Link link,
                    std::span<const double> targets, const TrainConfig& config,
                    std::span<const uint32_t> train_rows,
                    std::span<const uint32_t> validation_rows)
      : x_(x), link_(link), config_(config) {
    const int p = x.num_features();
    train_bins_.resize(p);
    validation_bins_.resize(p);
    for (int f = 0; f < p; ++f) {
      const auto column = x.column(f);
      train_bins_[f].reserve(train_rows.size());
      for (const uint32_t r : train_rows) train_bins_[f].push_back(column[r]);
      validation_bins_[f].reserve(validation_rows.size());
      for (const uint32_t r : validation_rows) {
        validation_bins_[f].push_back(column[r]);
      }
    }
    train_counts_.resize(p);
    for (int f = 0; f < p; ++f) {
      train_counts_[f].assign(x.schema().features[f].num_bins(), 0.0);
      for (const uint16_t b : train_bins_[f]) train_counts_[f][b] += 1;
    }
    for (const uint32_t r : train_rows) train_targets_.push_back(targets[r]);
    for (const uint32_t r : validation_rows) {
      validation_targets_.push_back(targets[r]);
    }
  }

  AdditiveModel Run(double intercept) {
    const FeatureSchema& schema = x_.schema();
    AdditiveModel model = MakeInterceptOnlyModel(schema, link_, intercept);
    model.metadata.learning_rate = config_.learning_rate;
    std::vector<double> train_f(train_targets_.size(), intercept);
    std::vector<double> validation_f(validation_targets_.size(), intercept);
    const bool early_stopping =
        config_.early_stopping && !validation_targets_.empty();

    model.metadata.training_loss.push_back(Loss(train_targets_, train_f));
    double best_loss = Loss(validation_targets_, validation_f);
    if (early_stopping) model.metadata.validation_loss.push_back(best_loss);
    const double tolerance = config_.min_relative_improvement * best_loss;
    std::vector<ShapeFunction> best_shapes = model.shapes;
    int best_round = 0;

    const int p = x_.num_features();
    const bool logistic = link_ == Link::kLogistic;
    // exp(f) per training row, updated multiplicatively inside a round and
    // recomputed at the start of each round.
    std::vector<double> train_exp;
    std::vector<double> gradient_sums;
    std::vector<double> hessian_sums;
    std::vector<double> step_exp;
    int round = 0;
    while (round < config_.max_rounds) {
      ++round;
      if (logistic) {
        train_exp.resize(train_f.size());
        for (size_t i = 0; i < train_f.size(); ++i) {
          train_exp[i] = std::exp(std::clamp(train_f[i], -700.0, 700.0));
        }
      }
      for (int f = 0; f < p; ++f) {
        const int num_bins = schema.features[f].num_bins();
        gradient_sums.assign(num_bins, 0.0);
        const std::vector<uint16_t>& bins = train_bins_[f];
        if (logistic) {
          hessian_sums.assign(num_bins, 0.0);
          for (size_t i = 0; i < bins.size(); ++i) {
            const double prob = train_exp[i] / (1.0 + train_exp[i]);
            gradient_sums[bins[i]] += train_targets_[i] - prob;
            hessian_sums[bins[i]] += prob * (1.0 - prob);
          }
        } else {
          for (size_t i = 0; i < bins.size(); ++i) {
            gradient_sums[bins[i]] += train_targets_[i] - train_f[i];
          }
          hessian_sums = train_counts_[f];
        }
        std::vector<double> step = internal::FitBinTree(
            gradient_sums, hessian_sums, config_.max_leaves,
            schema.features[f].kind == FeatureKind::kCategorical);
        std::vector<double>& shape = model.shapes[f].values;
        for (int b = 0; b < num_bins; ++b) {
          step[b] *= config_.learning_rate;
          shape[b] += step[b];
        }
        for (size_t i = 0; i < bins.size(); ++i) train_f[i] += step[bins[i]];
        if (logistic) {
          step_exp.resize(num_bins);
          for (int b = 0; b < num_bins; ++b) step_exp[b] = std::exp(step[b]);
          for (size_t i = 0; i < bins.size(); ++i) {
            train_exp[i] *= step_exp[bins[i]];
          }
        }
        const std::vector<uint16_t>& vbins = validation_bins_[f];
        for (size_t i = 0; i < vbins.size(); ++i) {
          validation_f[i] += step[vbins[i]];
        }
      }
      model.metadata.training_loss.push_back(Loss(train_targets_, train_f));
      if (!early_stopping) continue;
      const double validation_loss = Loss(validation_targets_, validation_f);
      model.metadata.validation_loss.push_back(validation_loss);
      if (validation_loss < best_loss - tolerance) {
        best_loss = validation_loss;
        best_round = round;
        best_shapes = model.shapes;
      } else if (round - best_round >= config_.patience) {
        break;
      }
    }
    model.metadata.rounds_run = round;
    if (early_stopping) {
      model.shapes = std::move(best_shapes);
      model.metadata.best_round = best_round;
    } else {
      model.metadata.best_round = round;
    }
    return model;
  }

 private:
  double Loss(const std::vector<double>& targets,
              const std::vector<double>& f) const {
    if (targets.empty()) return 0;
    double sum = 0;
    for (size_t i = 0; i < targets.size(); ++i) {
      sum += RowLoss(link_, targets[i], f[i]);
    }
    return sum / static_cast<double>(targets.size());
  }

  const BinnedMatrix& x_;
  Link link_;
  TrainConfig config_;
  std::vector<std::vector<uint16_t>> train_bins_;
  std::vector<std::vector<uint16_t>> validation_bins_;
  std::vector<std::vector<double>> train_counts_;
  std::vector<double> train_targets_;
  std::vector<double> validation_targets_;
};

absl::Status CheckTargets(const BinnedMatrix& x,
                          std::span<const double> targets) {
  if (targets.size() != x.num_rows()) {
    return absl::InvalidArgumentError(
        absl::StrFormat("%d targets for %d rows", targets.size(), x.num_rows()));
  }
  return absl::OkStatus();
}

}  // namespace

std::string LinkName(Link link) {
  return link == Link::kIdentity ? "identity" : "logistic";
}

absl::Status ValidateConfig(const TrainConfig& config) {
  if (!(config.learning_rate > 0 && config.learning_rate <= 1)) {
    return absl::InvalidArgumentError("learning rate must be in (0, 1]");
  }
  if (config.max_rounds < 1) {
    return absl::InvalidArgumentError("max rounds must be at least 1");
  }
  if (config.max_leaves < 2) {
    return absl::InvalidArgumentError("leaves per tree must be at least 2");
  }
  if (!(config.min_relative_improvement >= 0)) {
    return absl::InvalidArgumentError("min relative improvement must be >= 0");
  }
  if (config.patience < 1) {
    return absl::InvalidArgumentError("patience must be at least 1");
  }
  if (config.interaction_pairs < 0) {
    return absl::InvalidArgumentError("interaction pairs must be >= 0");
  }
  return absl::OkStatus();
}

double Sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

AdditiveModel MakeInterceptOnlyModel(const FeatureSchema& schema, Link link,
                                     double intercept) {
  AdditiveModel model;
  model.link = link;
  model.intercept = intercept;
  for (int f = 0; f < schema.num_features(); ++f) {
    model.feature_names.push_back(schema.features[f].name);
    model.shapes.push_back(
        {f, std::vector<double>(schema.features[f].num_bins(), 0.0)});
  }
  return model;
}

std::vector<uint32_t> AllRows(size_t num_rows) {
  std::vector<uint32_t> rows(num_rows);
  std::iota(rows.begin(), rows.end(), 0u);
  return rows;
}

absl::StatusOr<AdditiveModel> TrainRegressor(
    const BinnedMatrix& x, std::span<const double> targets,
    const TrainConfig& config, std::span<const uint32_t> train_rows,
    std::span<const uint32_t> validation_rows) {
  RETURN_IF_ERROR(ValidateConfig(config));
  RETURN_IF_ERROR(CheckTargets(x, targets));
  RETURN_IF_ERROR(
      internal::CheckTrainingRows(x.num_rows(), train_rows, validation_rows));
  double sum = 0;
  double min_target = std::numeric_limits<double>::infinity();
  double max_target = -std::numeric_limits<double>::infinity();
  for (const uint32_t r : train_rows) {
    if (!std::isfinite(targets[r])) {
      return absl::InvalidArgumentError(
          absl::StrFormat("non-finite target at row %d", r));
    }
    sum += targets[r];
    min_target = std::min(min_target, targets[r]);
    max_target = std::max(max_target, targets[r]);
  }
  const double mean = sum / static_cast<double>(train_rows.size());
  if (min_target == max_target) {
    AdditiveModel model =
        MakeInterceptOnlyModel(x.schema(), Link::kIdentity, min_target);
    model.metadata.constant_target = true;
    model.metadata.learning_rate = config.learning_rate;
    return model;
  }
  MainEffectBooster booster(x, Link::kIdentity, targets, config, train_rows,
                            validation_rows);
  AdditiveModel model = booster.Run(mean);
  internal::CenterModel(&model, x, train_rows);
  return model;
}

absl::StatusOr<AdditiveModel> TrainClassifier(
    const BinnedMatrix& x, std::span<const double> outcomes,
    const TrainConfig& config, std::span<const uint32_t> train_rows,
    std::span<const uint32_t> validation_rows) {
  RETURN_IF_ERROR(ValidateConfig(config));
  RETURN_IF_ERROR(CheckTargets(x, outcomes));
  RETURN_IF_ERROR(
      internal::CheckTrainingRows(x.num_rows(), train_rows, validation_rows));
  for (const auto rows : {train_rows, validation_rows}) {
    for (const uint32_t r : rows) {
      if (outcomes[r] != 0.0 && outcomes[r] != 1.0) {
        return absl::InvalidArgumentError(
            absl::StrFormat("non-binary outcome at row %d", r));
      }
    }
  }
  double positives = 0;
  for (const uint32_t r : train_rows) positives += outcomes[r];
  if (positives == 0 || positives == static_cast<double>(train_rows.size())) {
    return absl::InvalidArgumentError("single-class training data");
  }
  const double rate = positives / static_cast<double>(train_rows.size());
  MainEffectBooster booster(x, Link::kLogistic, outcomes, config, train_rows,
                            validation_rows);
  AdditiveModel model = booster.Run(std::log(rate / (1.0 - rate)));
  internal::CenterModel(&model, x, train_rows);
  return model;
}

absl::Status CheckCompatible(const AdditiveModel& model, const BinnedMatrix& x) {
  const FeatureSchema& schema = x.schema();
  if (schema.num_features() != model.num_features()) {
    return absl::InvalidArgumentError(absl::StrFormat(
        "schema mismatch: model has %d features, data has %d",
        model.num_features(), schema.num_features()));
  }
  for (int f = 0; f < model.num_features(); ++f) {
    if (model.feature_names[f] != schema.features[f].name ||
        static_cast<int>(model.shapes[f].values.size()) !=
            schema.features[f].num_bins()) {
      return absl::InvalidArgumentError(absl::StrCat(
          "schema mismatch on feature '", schema.features[f].name, "'"));
    }
  }
  return absl::OkStatus();
}

double LinkScore(const AdditiveModel& model, const BinnedMatrix& x,
                 size_t row) {
  double score = model.intercept;
  for (const ShapeFunction& shape : model.shapes) {
    score += shape.values[x.at(row, shape.feature)];
  }
  for (const InteractionSurface& surface : model.interactions) {
    score += surface.at(x.at(row, surface.first), x.at(row, surface.second));
  }
  return score;
}

std::vector<double> LinkTerms(const AdditiveModel& model, const BinnedMatrix& x,
                              size_t row) {
  std::vector<double> terms;
  terms.reserve(1 + model.shapes.size() + model.interactions.size());
  terms.push_back(model.intercept);
  for (const ShapeFunction& shape : model.shapes) {
    terms.push_back(shape.values[x.at(row, shape.feature)]);
  }
  for (const InteractionSurface& surface : model.interactions) {
    terms.push_back(
        surface.at(x.at(row, surface.first), x.at(row, surface.second)));
  }
  return terms;
}

absl::StatusOr<std::vector<double>> PredictLink(const AdditiveModel& model,
                                                const BinnedMatrix& x,
                                                std::span<const uint32_t> rows) {
  RETURN_IF_ERROR(CheckCompatible(model, x));
  std::vector<double> out;
  if (rows.empty()) {
    out.reserve(x.num_rows());
    for (size_t r = 0; r < x.num_rows(); ++r) out.push_back(LinkScore(model, x, r));
  } else {
    out.reserve(rows.size());
    for (const uint32_t r : rows) out.push_back(LinkScore(model, x, r));
  }
  return out;
}

absl::StatusOr<std::vector<double>> Predict(const AdditiveModel& model,
                                            const BinnedMatrix& x,
                                            std::span<const uint32_t> rows) {
  ASSIGN_OR_RETURN(std::vector<double> out, PredictLink(model, x, rows));
  if (model.link == Link::kLogistic) {
    for (double& v : out) v = Sigmoid(v);
  }
  return out;
}

absl::StatusOr<ShapeFunction> Contribution(const AdditiveModel& model,
                                           int feature) {
  if (feature < 0 || feature >= model.num_features()) {
    return absl::InvalidArgumentError(
        absl::StrFormat("unknown feature id %d (model has %d features)",
                        feature, model.num_features()));
  }
  return model.shapes[feature];
}

std::vector<double> PseudoResiduals(Link link, std::span<const double> targets,
                                    std::span<const double> link_scores) {
  std::vector<double> residuals(targets.size());
  for (size_t i = 0; i < targets.size(); ++i) {
    double hessian;
    GradientAndHessian(link, targets[i], link_scores[i], &residuals[i],
                       &hessian);
  }
  return residuals;
}

double MeanLoss(Link link, std::span<const double> targets,
                std::span<const double> link_scores) {
  if (targets.empty()) return 0;
  double sum = 0;
  for (size_t i = 0; i < targets.size(); ++i) {
    sum += RowLoss(link, targets[i], link_scores[i]);
  }
  return sum / static_cast<double>(targets.size());
}

nlohmann::json ModelToJson(const AdditiveModel& model) {
  nlohmann::json json;
  json["format_version"] = 1;
  json["link"] = LinkName(model.link);
  json["intercept"] = model.intercept;
  json["features"] = nlohmann::json::array();
  for (int f = 0; f < model.num_features(); ++f) {
    json["features"].push_back(
        {{"name", model.feature_names[f]}, {"values", model.shapes[f].values}});
  }
  json["interactions"] = nlohmann::json::array();
  for (const InteractionSurface& s : model.interactions) {
    json["interactions"].push_back({{"first", s.first},
                                    {"second", s.second},
                                    {"first_bins", s.first_bins},
                                    {"second_bins", s.second_bins},
                                    {"values", s.values}});
  }
  const TrainingMetadata& m = model.metadata;
  json["metadata"] = {{"rounds_run", m.rounds_run},
                      {"best_round", m.best_round},
                      {"learning_rate", m.learning_rate},
                      {"constant_target", m.constant_target},
                      {"interaction_rounds", m.interaction_rounds},
                      {"training_loss", m.training_loss},
                      {"validation_loss", m.validation_loss}};
  return json;
}

absl::StatusOr<AdditiveModel> ModelFromJson(const nlohmann::json& json) {
  AdditiveModel model;
  try {
    if (json.at("format_version").get<int>() != 1) {
      return absl::InvalidArgumentError("unsupported model format_version");
    }
    const std::string link = json.at("link").get<std::string>();
    if (link == "identity") {
      model.link = Link::kIdentity;
    } else if (link == "logistic") {
      model.link = Link::kLogistic;
    } else {
      return absl::InvalidArgumentError(absl::StrCat("unknown link ", link));
    }
    model.intercept = json.at("intercept").get<double>();
    int f = 0;
    for (const auto& entry : json.at("features")) {
      model.feature_names.push_back(entry.at("name").get<std::string>());
      model.shapes.push_back(
          {f++, entry.at("values").get<std::vector<double>>()});
    }
    for (const auto& entry : json.at("interactions")) {
      InteractionSurface s;
      s.first = entry.at("first").get<int>();
      s.second = entry.at("second").get<int>();
      s.first_bins = entry.at("first_bins").get<int>();
      s.second_bins = entry.at("second_bins").get<int>();
      s.values = entry.at("values").get<std::vector<double>>();
      if (s.values.size() !=
          static_cast<size_t>(s.first_bins) * s.second_bins) {
        return absl::InvalidArgumentError("interaction surface size mismatch");
      }
      model.interactions.push_back(std::move(s));
    }
    if (json.contains("metadata")) {
      const auto& m = json.at("metadata");
      model.metadata.rounds_run = m.value("rounds_run", 0);
      model.metadata.best_round = m.value("best_round", 0);
      model.metadata.learning_rate = m.value("learning_rate", 0.0);
      model.metadata.constant_target = m.value("constant_target", false);
      model.metadata.interaction_rounds = m.value("interaction_rounds", 0);
      model.metadata.training_loss =
          m.value("training_loss", std::vector<double>{});
      model.metadata.validation_loss =
          m.value("validation_loss", std::vector<double>{});
    }
  } catch (const nlohmann::json::exception& e) {
    return absl::InvalidArgumentError(
        absl::StrCat("malformed model JSON: ", e.what()));
  }
  return model;
}

}  // namespace dcaudit::gam
