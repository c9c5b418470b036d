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

// Pairwise interaction terms. Candidate pairs are screened exhaustively on a
// coarse grid, then the selected surfaces are boosted on the residuals of the
// frozen main-effect model.

#include <algorithm>
#include <utility>

#include "absl/status/status.h"
#include "absl/strings/str_format.h"
#include "dcaudit/gam.h"
#include "dcaudit/status_macros.h"
#include "gam_internal.h"

namespace dcaudit::gam {
namespace {

constexpr int kCoarseGridSize = 16;

// Maps each bin of a feature to one of at most kCoarseGridSize groups of
// roughly equal training mass, preserving bin order.
std::vector<int> CoarseGroups(std::span<const double> bin_counts, double total,
                              int* num_groups) {
  std::vector<int> group(bin_counts.size(), 0);
  int current = 0;
  double cumulative = 0;
  for (size_t b = 0; b < bin_counts.size(); ++b) {
    group[b] = current;
    cumulative += bin_counts[b];
    if (current + 1 < kCoarseGridSize &&
        cumulative >= total * (current + 1) / kCoarseGridSize &&
        b + 1 < bin_counts.size()) {
      ++current;
    }
  }
  *num_groups = current + 1;
  return group;
}

}  // namespace

std::vector<PairScore> RankInteractionPairs(
    const AdditiveModel& model, const BinnedMatrix& x,
    std::span<const double> targets, std::span<const uint32_t> train_rows) {
  const int p = x.num_features();
  const size_t n = train_rows.size();
  std::vector<double> residuals(n);
  for (size_t i = 0; i < n; ++i) {
    double hessian;
    internal::GradientAndHessian(model.link, targets[train_rows[i]],
                                 LinkScore(model, x, train_rows[i]),
                                 &residuals[i], &hessian);
  }
  double residual_sum = 0;
  for (const double r : residuals) residual_sum += r;

  std::vector<std::vector<uint8_t>> coarse(p, std::vector<uint8_t>(n));
  std::vector<int> groups(p);
  for (int f = 0; f < p; ++f) {
    const std::vector<double> counts = x.BinCounts(f, train_rows);
    const std::vector<int> map =
        CoarseGroups(counts, static_cast<double>(n), &groups[f]);
    const auto bins = x.column(f);
    for (size_t i = 0; i < n; ++i) {
      coarse[f][i] = static_cast<uint8_t>(map[bins[train_rows[i]]]);
    }
  }

  const double baseline = residual_sum * residual_sum / static_cast<double>(n);
  std::vector<PairScore> scores;
  std::vector<double> cell_sum;
  std::vector<double> cell_count;
  for (int a = 0; a < p; ++a) {
    for (int b = a + 1; b < p; ++b) {
      const int cells = groups[a] * groups[b];
      cell_sum.assign(cells, 0.0);
      cell_count.assign(cells, 0.0);
      for (size_t i = 0; i < n; ++i) {
        const int c = coarse[a][i] * groups[b] + coarse[b][i];
        cell_sum[c] += residuals[i];
        cell_count[c] += 1.0;
      }
      double explained = 0;
      for (int c = 0; c < cells; ++c) {
        if (cell_count[c] > 0) explained += cell_sum[c] * cell_sum[c] / cell_count[c];
      }
      scores.push_back({a, b, explained - baseline});
    }
  }
  std::stable_sort(scores.begin(), scores.end(),
                   [](const PairScore& l, const PairScore& r) {
                     return l.gain > r.gain;
                   });
  return scores;
}

absl::StatusOr<AdditiveModel> FitInteractions(
    const AdditiveModel& model, const BinnedMatrix& x,
    std::span<const double> targets, int n_pairs, const TrainConfig& config,
    std::span<const uint32_t> train_rows,
    std::span<const uint32_t> validation_rows) {
  RETURN_IF_ERROR(ValidateConfig(config));
  RETURN_IF_ERROR(CheckCompatible(model, x));
  const int p = x.num_features();
  const int available = p * (p - 1) / 2;
  if (n_pairs < 0 || n_pairs > available) {
    return absl::InvalidArgumentError(absl::StrFormat(
        "n_pairs %d exceeds the %d available feature pairs", n_pairs,
        available));
  }
  if (n_pairs == 0) return model;
  if (targets.size() != x.num_rows()) {
    return absl::InvalidArgumentError("target count does not match rows");
  }
  RETURN_IF_ERROR(
      internal::CheckTrainingRows(x.num_rows(), train_rows, validation_rows));

  const std::vector<PairScore> ranking =
      RankInteractionPairs(model, x, targets, train_rows);
  AdditiveModel result = model;
  result.interactions.clear();
  const FeatureSchema& schema = x.schema();
  for (int k = 0; k < n_pairs; ++k) {
    InteractionSurface surface;
    surface.first = ranking[k].first;
    surface.second = ranking[k].second;
    surface.first_bins = schema.features[surface.first].num_bins();
    surface.second_bins = schema.features[surface.second].num_bins();
    surface.values.assign(
        static_cast<size_t>(surface.first_bins) * surface.second_bins, 0.0);
    result.interactions.push_back(std::move(surface));
  }

  // Gathered cell indices per surface.
  const auto gather_cells = [&](std::span<const uint32_t> rows) {
    std::vector<std::vector<uint32_t>> cells(n_pairs);
    for (int k = 0; k < n_pairs; ++k) {
      const InteractionSurface& s = result.interactions[k];
      const auto first = x.column(s.first);
      const auto second = x.column(s.second);
      cells[k].reserve(rows.size());
      for (const uint32_t r : rows) {
        cells[k].push_back(static_cast<uint32_t>(first[r]) * s.second_bins +
                           second[r]);
      }
    }
    return cells;
  };
  const auto train_cells = gather_cells(train_rows);
  const auto validation_cells = gather_cells(validation_rows);

  std::vector<double> train_targets;
  std::vector<double> train_f;
  for (const uint32_t r : train_rows) {
    train_targets.push_back(targets[r]);
    train_f.push_back(LinkScore(model, x, r));
  }
  std::vector<double> validation_targets;
  std::vector<double> validation_f;
  for (const uint32_t r : validation_rows) {
    validation_targets.push_back(targets[r]);
    validation_f.push_back(LinkScore(model, x, r));
  }

  const bool early_stopping =
      config.early_stopping && !validation_rows.empty();
  double best_loss = MeanLoss(result.link, validation_targets, validation_f);
  const double tolerance = config.min_relative_improvement * best_loss;
  std::vector<InteractionSurface> best_surfaces = result.interactions;
  int best_round = 0;
  int round = 0;
  std::vector<double> gradient_sums;
  std::vector<double> hessian_sums;
  while (round < config.max_rounds) {
    ++round;
    for (int k = 0; k < n_pairs; ++k) {
      InteractionSurface& s = result.interactions[k];
      gradient_sums.assign(s.values.size(), 0.0);
      hessian_sums.assign(s.values.size(), 0.0);
      const std::vector<uint32_t>& cells = train_cells[k];
      for (size_t i = 0; i < cells.size(); ++i) {
        double g;
        double h;
        internal::GradientAndHessian(result.link, train_targets[i], train_f[i],
                                     &g, &h);
        gradient_sums[cells[i]] += g;
        hessian_sums[cells[i]] += h;
      }
      std::vector<double> step = internal::FitPairTree(
          gradient_sums, hessian_sums, s.first_bins, s.second_bins);
      for (size_t c = 0; c < step.size(); ++c) {
        step[c] *= config.learning_rate;
        s.values[c] += step[c];
      }
      for (size_t i = 0; i < cells.size(); ++i) train_f[i] += step[cells[i]];
      const std::vector<uint32_t>& vcells = validation_cells[k];
      for (size_t i = 0; i < vcells.size(); ++i) {
        validation_f[i] += step[vcells[i]];
      }
    }
    if (!early_stopping) continue;
    const double loss = MeanLoss(result.link, validation_targets, validation_f);
    if (loss < best_loss - tolerance) {
      best_loss = loss;
      best_round = round;
      best_surfaces = result.interactions;
    } else if (round - best_round >= config.patience) {
      break;
    }
  }
  if (early_stopping) result.interactions = std::move(best_surfaces);
  result.metadata.interaction_rounds = early_stopping ? best_round : round;

  internal::CenterModel(&result, x, train_rows, /*shapes_frozen=*/true);
  return result;
}

}  // namespace dcaudit::gam
