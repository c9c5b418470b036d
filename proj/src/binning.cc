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

#include "dcaudit/binning.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <utility>

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "dcaudit/status_macros.h"

namespace dcaudit {
namespace {

constexpr int kMaxSupportedBins = std::numeric_limits<uint16_t>::max() - 1;

}  // namespace

int FeatureBinning::BinOfNumeric(double value) const {
  if (std::isnan(value)) return missing_bin();
  const auto it = std::upper_bound(lower_edges.begin(), lower_edges.end(), value);
  if (it == lower_edges.begin()) return 0;
  return static_cast<int>(it - lower_edges.begin()) - 1;
}

int FeatureBinning::BinOfCategory(const std::optional<std::string>& value) const {
  if (!value.has_value()) return missing_bin();
  const auto it = std::lower_bound(categories.begin(), categories.end(), *value);
  if (it == categories.end() || *it != *value) return missing_bin();
  return static_cast<int>(it - categories.begin());
}

std::string FeatureBinning::BinLabel(int bin) const {
  if (bin == missing_bin()) return "missing";
  if (kind == FeatureKind::kCategorical) return categories[bin];
  if (bin + 1 < num_value_bins()) {
    return absl::StrFormat("[%g, %g)", lower_edges[bin], lower_edges[bin + 1]);
  }
  return absl::StrFormat("[%g, +inf)", lower_edges[bin]);
}

double FeatureBinning::BinPosition(int bin) const {
  if (kind == FeatureKind::kNumeric && bin < num_value_bins()) {
    return lower_edges[bin];
  }
  return bin;
}

int FeatureSchema::FindFeature(const std::string& name) const {
  for (int i = 0; i < num_features(); ++i) {
    if (features[i].name == name) return i;
  }
  return -1;
}

absl::StatusOr<std::vector<double>> QuantileLowerEdges(
    std::span<const double> values, int max_bins) {
  std::vector<double> sorted;
  sorted.reserve(values.size());
  for (const double v : values) {
    if (!std::isnan(v)) sorted.push_back(v);
  }
  if (sorted.empty()) {
    return absl::InvalidArgumentError("feature has no non-missing values");
  }
  std::sort(sorted.begin(), sorted.end());
  std::vector<double> distinct = sorted;
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  if (static_cast<int>(distinct.size()) <= max_bins) return distinct;

  // Cut at the order statistics i*n/max_bins. Duplicate cuts collapse, so
  // heavy ties yield fewer bins.
  const size_t n = sorted.size();
  std::vector<double> edges = {sorted.front()};
  for (int i = 1; i < max_bins; ++i) {
    const double cut = sorted[static_cast<size_t>(i) * n / max_bins];
    if (cut > edges.back()) edges.push_back(cut);
  }
  return edges;
}

absl::StatusOr<FeatureSchema> FitSchema(const AuditDataset& data, int max_bins) {
  if (max_bins < 2 || max_bins > kMaxSupportedBins) {
    return absl::InvalidArgumentError(
        absl::StrFormat("max_bins must be in [2, %d], got %d",
                        kMaxSupportedBins, max_bins));
  }
  FeatureSchema schema;
  schema.max_bins = max_bins;
  for (const FeatureColumn& column : data.features()) {
    FeatureBinning binning;
    binning.name = column.name;
    binning.kind = column.kind;
    if (column.kind == FeatureKind::kNumeric) {
      auto edges = QuantileLowerEdges(column.numeric, max_bins);
      if (!edges.ok()) {
        return absl::InvalidArgumentError(absl::StrCat(
            "feature '", column.name, "': ", edges.status().message()));
      }
      binning.lower_edges = *std::move(edges);
    } else {
      std::set<std::string> categories;
      for (const auto& value : column.categorical) {
        if (value.has_value()) categories.insert(*value);
      }
      if (categories.empty()) {
        return absl::InvalidArgumentError(absl::StrCat(
            "feature '", column.name, "': feature has no non-missing values"));
      }
      if (static_cast<int>(categories.size()) > kMaxSupportedBins) {
        return absl::InvalidArgumentError(absl::StrCat(
            "feature '", column.name, "' has too many categories"));
      }
      binning.categories.assign(categories.begin(), categories.end());
    }
    schema.features.push_back(std::move(binning));
  }
  return schema;
}

BinnedMatrix::BinnedMatrix(std::shared_ptr<const FeatureSchema> schema,
                           size_t num_rows)
    : schema_(std::move(schema)),
      num_rows_(num_rows),
      bins_(static_cast<size_t>(schema_->num_features()) * num_rows, 0) {}

std::vector<double> BinnedMatrix::BinCounts(
    int feature, std::span<const uint32_t> rows) const {
  std::vector<double> counts(schema_->features[feature].num_bins(), 0.0);
  const auto bins = column(feature);
  if (rows.empty()) {
    for (const uint16_t b : bins) counts[b] += 1.0;
  } else {
    for (const uint32_t r : rows) counts[bins[r]] += 1.0;
  }
  return counts;
}

absl::StatusOr<BinnedMatrix> Bin(const AuditDataset& data,
                                 std::shared_ptr<const FeatureSchema> schema) {
  for (const FeatureColumn& column : data.features()) {
    if (schema->FindFeature(column.name) < 0) {
      return absl::InvalidArgumentError(absl::StrCat(
          "feature '", column.name, "' is present in data but not in schema"));
    }
  }
  BinnedMatrix matrix(schema, data.num_rows());
  for (int f = 0; f < schema->num_features(); ++f) {
    const FeatureBinning& binning = schema->features[f];
    const auto it = std::find_if(
        data.features().begin(), data.features().end(),
        [&](const FeatureColumn& c) { return c.name == binning.name; });
    if (it == data.features().end()) {
      return absl::InvalidArgumentError(absl::StrCat(
          "schema feature '", binning.name, "' is absent from data"));
    }
    if (it->kind != binning.kind) {
      return absl::InvalidArgumentError(absl::StrCat(
          "feature '", binning.name, "' kind differs between data and schema"));
    }
    auto out = matrix.mutable_column(f);
    for (size_t row = 0; row < data.num_rows(); ++row) {
      out[row] = static_cast<uint16_t>(
          binning.kind == FeatureKind::kNumeric
              ? binning.BinOfNumeric(it->numeric[row])
              : binning.BinOfCategory(it->categorical[row]));
    }
  }
  return matrix;
}

nlohmann::json SchemaToJson(const FeatureSchema& schema) {
  nlohmann::json json;
  json["format_version"] = 1;
  json["max_bins"] = schema.max_bins;
  json["features"] = nlohmann::json::array();
  for (const FeatureBinning& f : schema.features) {
    nlohmann::json entry;
    entry["name"] = f.name;
    if (f.kind == FeatureKind::kNumeric) {
      entry["kind"] = "numeric";
      entry["lower_edges"] = f.lower_edges;
    } else {
      entry["kind"] = "categorical";
      entry["categories"] = f.categories;
    }
    entry["missing_bin"] = f.missing_bin();
    json["features"].push_back(std::move(entry));
  }
  return json;
}

absl::StatusOr<FeatureSchema> SchemaFromJson(const nlohmann::json& json) {
  FeatureSchema schema;
  try {
    if (json.at("format_version").get<int>() != 1) {
      return absl::InvalidArgumentError("unsupported schema format_version");
    }
    schema.max_bins = json.at("max_bins").get<int>();
    for (const auto& entry : json.at("features")) {
      FeatureBinning f;
      f.name = entry.at("name").get<std::string>();
      const std::string kind = entry.at("kind").get<std::string>();
      if (kind == "numeric") {
        f.kind = FeatureKind::kNumeric;
        f.lower_edges = entry.at("lower_edges").get<std::vector<double>>();
        if (!std::is_sorted(f.lower_edges.begin(), f.lower_edges.end()) ||
            std::adjacent_find(f.lower_edges.begin(), f.lower_edges.end()) !=
                f.lower_edges.end()) {
          return absl::InvalidArgumentError(absl::StrCat(
              "feature '", f.name, "': bin edges not strictly increasing"));
        }
      } else if (kind == "categorical") {
        f.kind = FeatureKind::kCategorical;
        f.categories = entry.at("categories").get<std::vector<std::string>>();
      } else {
        return absl::InvalidArgumentError(
            absl::StrCat("unknown feature kind '", kind, "'"));
      }
      schema.features.push_back(std::move(f));
    }
  } catch (const nlohmann::json::exception& e) {
    return absl::InvalidArgumentError(
        absl::StrCat("malformed schema JSON: ", e.what()));
  }
  return schema;
}

}  // namespace dcaudit
