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

#include "dcaudit/compare.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <utility>

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "dcaudit/status_macros.h"

namespace dcaudit::compare {
namespace {

std::vector<double> InnerMeans(std::span<const double> values, int outer_folds,
                               int inner_folds) {
  std::vector<double> means(outer_folds, 0.0);
  for (int k = 0; k < outer_folds; ++k) {
    for (int l = 0; l < inner_folds; ++l) {
      means[k] += values[static_cast<size_t>(k) * inner_folds + l];
    }
    means[k] /= inner_folds;
  }
  return means;
}

absl::Status CheckEnsemble(const distill::BagEnsemble& ensemble, int feature) {
  if (ensemble.outer_folds < 2 || ensemble.inner_folds < 2) {
    return absl::FailedPreconditionError(
        "little-bags bands need at least 2 outer and 2 inner folds");
  }
  if (ensemble.models.size() !=
      static_cast<size_t>(ensemble.outer_folds) * ensemble.inner_folds) {
    return absl::FailedPreconditionError("ensemble model count is not K*L");
  }
  if (feature < 0 || feature >= ensemble.num_features()) {
    return absl::NotFoundError(absl::StrFormat("unknown feature %d", feature));
  }
  return absl::OkStatus();
}

// values[bin][bag] for one feature.
std::vector<std::vector<double>> BagValues(const distill::BagEnsemble& ensemble,
                                           int feature) {
  const size_t num_bins = ensemble.models.front().shapes[feature].values.size();
  std::vector<std::vector<double>> out(
      num_bins, std::vector<double>(ensemble.models.size()));
  for (size_t m = 0; m < ensemble.models.size(); ++m) {
    const std::vector<double>& shape = ensemble.models[m].shapes[feature].values;
    for (size_t b = 0; b < num_bins; ++b) out[b][m] = shape[b];
  }
  return out;
}

std::string CsvField(const std::string& text) {
  if (text.find_first_of(",\"\n") == std::string::npos) return text;
  std::string out = "\"";
  for (const char c : text) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string Num(double v) { return absl::StrFormat("%.10g", v); }

}  // namespace

double LittleBagsMean(std::span<const double> values) {
  if (values.empty()) return 0;
  return std::accumulate(values.begin(), values.end(), 0.0) /
         static_cast<double>(values.size());
}

double LittleBagsVariance(std::span<const double> values, int outer_folds,
                          int inner_folds) {
  return LittleBagsCovariance(values, values, outer_folds, inner_folds);
}

double LittleBagsCovariance(std::span<const double> a,
                            std::span<const double> b, int outer_folds,
                            int inner_folds) {
  const std::vector<double> a_means = InnerMeans(a, outer_folds, inner_folds);
  const std::vector<double> b_means = InnerMeans(b, outer_folds, inner_folds);
  const double a_grand = LittleBagsMean(a);
  const double b_grand = LittleBagsMean(b);
  double sum = 0;
  for (int k = 0; k < outer_folds; ++k) {
    sum += (a_means[k] - a_grand) * (b_means[k] - b_grand);
  }
  return sum / outer_folds;
}

bool DifferenceCurve::any_floored() const {
  return std::find(floored.begin(), floored.end(), true) != floored.end();
}

absl::StatusOr<ContributionCurve> Curve(const distill::BagEnsemble& ensemble,
                                        int feature) {
  RETURN_IF_ERROR(CheckEnsemble(ensemble, feature));
  ContributionCurve curve;
  curve.feature = feature;
  curve.name = ensemble.models.front().feature_names[feature];
  for (const std::vector<double>& values : BagValues(ensemble, feature)) {
    const double mean = LittleBagsMean(values);
    const double variance = std::max(
        0.0, LittleBagsVariance(values, ensemble.outer_folds,
                                ensemble.inner_folds));
    const double half_width = kZ95 * std::sqrt(variance);
    curve.mean.push_back(mean);
    curve.variance.push_back(variance);
    curve.lower.push_back(mean - half_width);
    curve.upper.push_back(mean + half_width);
  }
  return curve;
}

absl::StatusOr<DifferenceCurve> Difference(const distill::BagEnsemble& first,
                                           const distill::BagEnsemble& second,
                                           int feature) {
  RETURN_IF_ERROR(CheckEnsemble(first, feature));
  RETURN_IF_ERROR(CheckEnsemble(second, feature));
  if (first.outer_folds != second.outer_folds ||
      first.inner_folds != second.inner_folds) {
    return absl::FailedPreconditionError("mismatched bag plans");
  }
  const std::vector<std::vector<double>> a = BagValues(first, feature);
  const std::vector<std::vector<double>> b = BagValues(second, feature);
  if (a.size() != b.size()) {
    return absl::FailedPreconditionError(
        "ensembles disagree on the number of bins");
  }
  const int K = first.outer_folds;
  const int L = first.inner_folds;
  DifferenceCurve curve;
  curve.feature = feature;
  curve.name = first.models.front().feature_names[feature];
  for (size_t bin = 0; bin < a.size(); ++bin) {
    const double mean = LittleBagsMean(a[bin]) - LittleBagsMean(b[bin]);
    double variance = LittleBagsVariance(a[bin], K, L) +
                      LittleBagsVariance(b[bin], K, L) -
                      2 * LittleBagsCovariance(a[bin], b[bin], K, L);
    const bool floored = variance < 0;
    if (floored) variance = 0;
    const double half_width = kZ95 * std::sqrt(variance);
    const double lower = mean - half_width;
    const double upper = mean + half_width;
    curve.mean.push_back(mean);
    curve.variance.push_back(variance);
    curve.lower.push_back(lower);
    curve.upper.push_back(upper);
    curve.significant.push_back(lower > 0 || upper < 0);
    curve.floored.push_back(floored);
  }
  return curve;
}

absl::StatusOr<DifferenceCurve> Difference(
    const distill::PairedEnsembles& paired, int feature) {
  return Difference(paired.mimic, paired.outcome, feature);
}

double Discrepancy(const DifferenceCurve& difference,
                   std::span<const double> bin_mass) {
  double weighted = 0;
  double total = 0;
  for (int b = 0; b < difference.num_bins(); ++b) {
    total += bin_mass[b];
    if (difference.significant[b]) {
      weighted += bin_mass[b] * std::abs(difference.mean[b]);
    }
  }
  return total > 0 ? weighted / total : 0;
}

absl::StatusOr<ComparisonSummary> Summarize(
    const distill::PairedEnsembles& paired, const BinnedMatrix& x) {
  ComparisonSummary summary;
  const int num_features = paired.mimic.num_features();
  if (num_features != x.num_features()) {
    return absl::FailedPreconditionError(
        "ensembles and binned matrix disagree on the feature count");
  }
  for (int f = 0; f < num_features; ++f) {
    FeatureComparison comparison;
    ASSIGN_OR_RETURN(comparison.mimic, Curve(paired.mimic, f));
    ASSIGN_OR_RETURN(comparison.outcome, Curve(paired.outcome, f));
    ASSIGN_OR_RETURN(comparison.difference, Difference(paired, f));
    comparison.bin_mass = x.BinCounts(f);
    const double n = static_cast<double>(x.num_rows());
    for (double& m : comparison.bin_mass) m /= n;
    comparison.discrepancy =
        Discrepancy(comparison.difference, comparison.bin_mass);
    summary.features.push_back(std::move(comparison));
  }
  summary.ranking.resize(num_features);
  std::iota(summary.ranking.begin(), summary.ranking.end(), 0);
  std::stable_sort(summary.ranking.begin(), summary.ranking.end(),
                   [&](int a, int b) {
                     return summary.features[a].discrepancy >
                            summary.features[b].discrepancy;
                   });
  return summary;
}

std::string CurvesToCsv(const ComparisonSummary& summary,
                        const FeatureSchema& schema) {
  std::string out =
      "feature,bin,bin_label,mass,mimic_mean,mimic_lo,mimic_hi,outcome_mean,"
      "outcome_lo,outcome_hi,difference,diff_lo,diff_hi,significant\n";
  for (const FeatureComparison& c : summary.features) {
    const FeatureBinning& binning = schema.features[c.mimic.feature];
    for (int b = 0; b < c.mimic.num_bins(); ++b) {
      absl::StrAppend(
          &out, CsvField(c.mimic.name), ",", b, ",",
          CsvField(binning.BinLabel(b)), ",", Num(c.bin_mass[b]), ",",
          Num(c.mimic.mean[b]), ",", Num(c.mimic.lower[b]), ",",
          Num(c.mimic.upper[b]), ",", Num(c.outcome.mean[b]), ",",
          Num(c.outcome.lower[b]), ",", Num(c.outcome.upper[b]), ",",
          Num(c.difference.mean[b]), ",", Num(c.difference.lower[b]), ",",
          Num(c.difference.upper[b]), ",",
          c.difference.significant[b] ? "1" : "0", "\n");
    }
  }
  return out;
}

nlohmann::json SummaryToJson(const ComparisonSummary& summary,
                             const FeatureSchema& schema) {
  nlohmann::json features = nlohmann::json::array();
  for (const FeatureComparison& c : summary.features) {
    const FeatureBinning& binning = schema.features[c.mimic.feature];
    nlohmann::json bins = nlohmann::json::array();
    int significant_bins = 0;
    for (int b = 0; b < c.mimic.num_bins(); ++b) {
      significant_bins += c.difference.significant[b] ? 1 : 0;
      bins.push_back({
          {"bin", b},
          {"label", binning.BinLabel(b)},
          {"mass", c.bin_mass[b]},
          {"mimic", {c.mimic.mean[b], c.mimic.lower[b], c.mimic.upper[b]}},
          {"outcome",
           {c.outcome.mean[b], c.outcome.lower[b], c.outcome.upper[b]}},
          {"difference",
           {c.difference.mean[b], c.difference.lower[b],
            c.difference.upper[b]}},
          {"significant", static_cast<bool>(c.difference.significant[b])},
      });
    }
    features.push_back({{"feature", c.mimic.name},
                        {"discrepancy", c.discrepancy},
                        {"significant_bins", significant_bins},
                        {"variance_floored", c.difference.any_floored()},
                        {"bins", std::move(bins)}});
  }
  nlohmann::json ranking = nlohmann::json::array();
  for (const int f : summary.ranking) {
    ranking.push_back({{"feature", summary.features[f].mimic.name},
                       {"discrepancy", summary.features[f].discrepancy}});
  }
  return {{"features", std::move(features)}, {"ranking", std::move(ranking)}};
}

std::string SurfacesToCsv(const distill::BagEnsemble& ensemble,
                          const FeatureSchema& schema) {
  struct Accumulator {
    const gam::InteractionSurface* shape = nullptr;
    std::vector<double> sum;
    int bags = 0;
  };
  std::map<std::pair<int, int>, Accumulator> surfaces;
  for (const gam::AdditiveModel& model : ensemble.models) {
    for (const gam::InteractionSurface& s : model.interactions) {
      Accumulator& acc = surfaces[{s.first, s.second}];
      if (acc.shape == nullptr) {
        acc.shape = &s;
        acc.sum.assign(s.values.size(), 0.0);
      }
      for (size_t i = 0; i < s.values.size(); ++i) acc.sum[i] += s.values[i];
      ++acc.bags;
    }
  }
  std::string out =
      "first,second,first_bin,second_bin,first_label,second_label,bags,"
      "value\n";
  for (const auto& [pair, acc] : surfaces) {
    const FeatureBinning& first = schema.features[pair.first];
    const FeatureBinning& second = schema.features[pair.second];
    for (int i = 0; i < acc.shape->first_bins; ++i) {
      for (int j = 0; j < acc.shape->second_bins; ++j) {
        const double value =
            acc.sum[static_cast<size_t>(i) * acc.shape->second_bins + j] /
            acc.bags;
        absl::StrAppend(&out, CsvField(first.name), ",",
                        CsvField(second.name), ",", i, ",", j, ",",
                        CsvField(first.BinLabel(i)), ",",
                        CsvField(second.BinLabel(j)), ",", acc.bags, ",",
                        Num(value), "\n");
      }
    }
  }
  return out;
}

}  // namespace dcaudit::compare
