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

// Quantile binning of audit features. Every model in the library works on
// the bin indices produced here.
//
// Numeric bins are half-open intervals [edge_i, edge_{i+1}); the last bin is
// closed and values outside the fitted range clamp to the extreme bins.
// Categorical bins hold one category each, sorted lexicographically. Every
// feature has one extra bin, after the value bins, for missing values (and
// unseen categories).

#ifndef DCAUDIT_BINNING_H_
#define DCAUDIT_BINNING_H_

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "absl/status/statusor.h"
#include "dcaudit/dataset.h"
#include "json.hpp"

namespace dcaudit {

inline constexpr int kDefaultMaxBins = 256;

struct FeatureBinning {
  std::string name;
  FeatureKind kind = FeatureKind::kNumeric;
  // Numeric: lower edge of each value bin, strictly increasing.
  std::vector<double> lower_edges;
  // Categorical: one entry per value bin.
  std::vector<std::string> categories;

  int num_value_bins() const {
    return static_cast<int>(kind == FeatureKind::kNumeric ? lower_edges.size()
                                                          : categories.size());
  }
  int missing_bin() const { return num_value_bins(); }
  int num_bins() const { return num_value_bins() + 1; }

  int BinOfNumeric(double value) const;
  int BinOfCategory(const std::optional<std::string>& value) const;
  // Human readable bin description, e.g. "[2, 5)" or "female".
  std::string BinLabel(int bin) const;
  // Representative x position for plotting (lower edge, or bin index).
  double BinPosition(int bin) const;
};

struct FeatureSchema {
  std::vector<FeatureBinning> features;
  int max_bins = kDefaultMaxBins;

  int num_features() const { return static_cast<int>(features.size()); }
  // Index of the named feature, or -1.
  int FindFeature(const std::string& name) const;
};

absl::StatusOr<FeatureSchema> FitSchema(const AuditDataset& data,
                                        int max_bins = kDefaultMaxBins);

// Quantile lower edges for a numeric column. Missing (NaN) entries are
// ignored. Exposed for testing.
absl::StatusOr<std::vector<double>> QuantileLowerEdges(
    std::span<const double> values, int max_bins);

// Column-major matrix of bin indices.
class BinnedMatrix {
 public:
  BinnedMatrix(std::shared_ptr<const FeatureSchema> schema, size_t num_rows);

  size_t num_rows() const { return num_rows_; }
  int num_features() const { return schema_->num_features(); }
  const FeatureSchema& schema() const { return *schema_; }
  const std::shared_ptr<const FeatureSchema>& schema_ptr() const {
    return schema_;
  }

  std::span<const uint16_t> column(int feature) const {
    return {bins_.data() + static_cast<size_t>(feature) * num_rows_, num_rows_};
  }
  std::span<uint16_t> mutable_column(int feature) {
    return {bins_.data() + static_cast<size_t>(feature) * num_rows_, num_rows_};
  }
  uint16_t at(size_t row, int feature) const {
    return bins_[static_cast<size_t>(feature) * num_rows_ + row];
  }

  // Number of rows per bin of a feature, over the given rows (all rows when
  // empty).
  std::vector<double> BinCounts(int feature,
                                std::span<const uint32_t> rows = {}) const;

 private:
  std::shared_ptr<const FeatureSchema> schema_;
  size_t num_rows_;
  std::vector<uint16_t> bins_;
};

absl::StatusOr<BinnedMatrix> Bin(const AuditDataset& data,
                                 std::shared_ptr<const FeatureSchema> schema);

nlohmann::json SchemaToJson(const FeatureSchema& schema);
absl::StatusOr<FeatureSchema> SchemaFromJson(const nlohmann::json& json);

}  // namespace dcaudit

#endif  // DCAUDIT_BINNING_H_
