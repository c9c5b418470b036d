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

// Mimic versus outcome contribution curves with pointwise 95% bands from the
// bootstrap of little bags.
//
// For bag values v[k][l] of one bin, the band is built from
//   mean     = (1 / KL) sum_{k,l} v[k][l]
//   variance = (1 / K) sum_k (mean_l v[k][l] - mean)^2.

#ifndef DCAUDIT_COMPARE_H_
#define DCAUDIT_COMPARE_H_

#include <span>
#include <string>
#include <vector>

#include "absl/status/statusor.h"
#include "dcaudit/binning.h"
#include "dcaudit/distill.h"
#include "json.hpp"

namespace dcaudit::compare {

inline constexpr double kZ95 = 1.96;

// `values` holds one entry per bag at index k * inner_folds + l.
double LittleBagsMean(std::span<const double> values);
double LittleBagsVariance(std::span<const double> values, int outer_folds,
                          int inner_folds);
double LittleBagsCovariance(std::span<const double> a,
                            std::span<const double> b, int outer_folds,
                            int inner_folds);

struct ContributionCurve {
  int feature = 0;
  std::string name;
  std::vector<double> mean;
  std::vector<double> variance;
  std::vector<double> lower;
  std::vector<double> upper;

  int num_bins() const { return static_cast<int>(mean.size()); }
};

struct DifferenceCurve {
  int feature = 0;
  std::string name;
  std::vector<double> mean;
  std::vector<double> variance;
  std::vector<double> lower;
  std::vector<double> upper;
  std::vector<bool> significant;
  // Bins whose plug-in variance came out negative and was set to 0.
  std::vector<bool> floored;

  int num_bins() const { return static_cast<int>(mean.size()); }
  bool any_floored() const;
};

absl::StatusOr<ContributionCurve> Curve(const distill::BagEnsemble& ensemble,
                                        int feature);

// Bin-wise first minus second, with the covariance of bag-paired values.
absl::StatusOr<DifferenceCurve> Difference(const distill::BagEnsemble& first,
                                           const distill::BagEnsemble& second,
                                           int feature);
absl::StatusOr<DifferenceCurve> Difference(
    const distill::PairedEnsembles& paired, int feature);

struct FeatureComparison {
  ContributionCurve mimic;
  ContributionCurve outcome;
  DifferenceCurve difference;
  // Share of the audit rows falling in each bin.
  std::vector<double> bin_mass;
  // Mass-weighted mean of |difference| over significant bins.
  double discrepancy = 0;
};

struct ComparisonSummary {
  std::vector<FeatureComparison> features;
  // Feature indices by decreasing discrepancy, ties by index.
  std::vector<int> ranking;
};

double Discrepancy(const DifferenceCurve& difference,
                   std::span<const double> bin_mass);

absl::StatusOr<ComparisonSummary> Summarize(
    const distill::PairedEnsembles& paired, const BinnedMatrix& x);

// One row per (feature, bin).
std::string CurvesToCsv(const ComparisonSummary& summary,
                        const FeatureSchema& schema);
nlohmann::json SummaryToJson(const ComparisonSummary& summary,
                             const FeatureSchema& schema);

// Bag-averaged interaction surfaces of one ensemble as long-format CSV
// (first, second, first_bin, second_bin, labels, value). Surfaces are
// averaged over the bags that selected the pair.
std::string SurfacesToCsv(const distill::BagEnsemble& ensemble,
                          const FeatureSchema& schema);

}  // namespace dcaudit::compare

#endif  // DCAUDIT_COMPARE_H_
