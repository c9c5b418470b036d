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

// Audit datasets: feature columns plus the black-box score and the
// ground-truth outcome of every row.

#ifndef DCAUDIT_DATASET_H_
#define DCAUDIT_DATASET_H_

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "absl/status/statusor.h"

namespace dcaudit {

enum class FeatureKind { kNumeric, kCategorical };

// Ground-truth label of a row. kAbsent marks score-only rows, which are only
// used to train mimic models.
enum class Outcome : int8_t { kAbsent = -1, kNegative = 0, kPositive = 1 };

// A single feature column. Numeric missing values are NaN; categorical
// missing values are std::nullopt.
struct FeatureColumn {
  std::string name;
  FeatureKind kind = FeatureKind::kNumeric;
  std::vector<double> numeric;
  std::vector<std::optional<std::string>> categorical;

  size_t size() const {
    return kind == FeatureKind::kNumeric ? numeric.size() : categorical.size();
  }
  bool IsMissing(size_t row) const;
};

class AuditDataset {
 public:
  // Validates the column invariants: at least one row, equal column lengths,
  // finite scores, unique feature names.
  static absl::StatusOr<AuditDataset> Create(std::vector<FeatureColumn> features,
                                             std::vector<double> scores,
                                             std::vector<Outcome> outcomes);

  size_t num_rows() const { return scores_.size(); }
  size_t num_features() const { return features_.size(); }
  const FeatureColumn& feature(size_t index) const { return features_[index]; }
  const std::vector<FeatureColumn>& features() const { return features_; }
  std::span<const double> scores() const { return scores_; }
  std::span<const Outcome> outcomes() const { return outcomes_; }
  bool has_outcome(size_t row) const {
    return outcomes_[row] != Outcome::kAbsent;
  }

  // Rows carrying a ground-truth outcome, ascending.
  std::vector<uint32_t> LabeledRows() const;
  // Rows without an outcome, ascending.
  std::vector<uint32_t> ScoreOnlyRows() const;
  size_t num_score_only() const;

  // 0/1 outcome values of the given rows. All rows must be labeled.
  std::vector<double> OutcomeValues(std::span<const uint32_t> rows) const;

  // Rows rejected at load time because the score did not parse.
  size_t rejected_rows() const { return rejected_rows_; }
  void set_rejected_rows(size_t n) { rejected_rows_ = n; }

  // FNV-1a digest of the source bytes (0 for in-memory datasets).
  uint64_t fingerprint() const { return fingerprint_; }
  void set_fingerprint(uint64_t f) { fingerprint_ = f; }

 private:
  std::vector<FeatureColumn> features_;
  std::vector<double> scores_;
  std::vector<Outcome> outcomes_;
  size_t rejected_rows_ = 0;
  uint64_t fingerprint_ = 0;
};

// How a delimited file maps onto an audit dataset. Loaded from a JSON config
// of the form
//   {"delimiter": ",", "score_column": "score", "outcome_column": "outcome",
//    "feature_types": {"race": "categorical"}, "ignore_columns": ["id"],
//    "missing_markers": ["", "NA"]}
struct SchemaConfig {
  char delimiter = ',';
  std::string score_column = "score";
  std::string outcome_column = "outcome";
  std::map<std::string, FeatureKind> feature_types;
  std::vector<std::string> ignore_columns;
  std::vector<std::string> missing_markers = {"", "NA", "NaN", "nan", "?"};
};

absl::StatusOr<SchemaConfig> LoadSchemaConfig(const std::string& path);
absl::StatusOr<SchemaConfig> ParseSchemaConfig(const std::string& json_text);

// Parses delimited text with a header row. Columns whose non-missing values
// all parse as numbers are numeric unless overridden. Rows whose score does
// not parse are dropped and counted; empty outcome cells produce score-only
// rows.
absl::StatusOr<AuditDataset> LoadCsv(const std::string& path,
                                     const SchemaConfig& config);
absl::StatusOr<AuditDataset> ParseCsv(const std::string& text,
                                      const SchemaConfig& config);

// Writes the dataset back as delimited text (features, score, outcome).
std::string DatasetToCsv(const AuditDataset& data, const SchemaConfig& config);

// Splits one line of delimited text, honoring double quotes.
std::vector<std::string> SplitDelimitedLine(const std::string& line,
                                            char delimiter);

uint64_t Fnv1a64(std::string_view bytes);

}  // namespace dcaudit

#endif  // DCAUDIT_DATASET_H_
