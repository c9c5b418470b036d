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

#include "dcaudit/dataset.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <utility>

#include "absl/status/status.h"
#include "absl/strings/ascii.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "absl/strings/str_join.h"
#include "absl/strings/strip.h"
#include "dcaudit/status_macros.h"
#include "json.hpp"

namespace dcaudit {
namespace {

absl::StatusOr<std::string> ReadFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return absl::NotFoundError(absl::StrCat("cannot open ", path));
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

std::string_view StripWhitespace(std::string_view text) {
  const absl::string_view stripped =
      absl::StripAsciiWhitespace(absl::string_view(text.data(), text.size()));
  return std::string_view(stripped.data(), stripped.size());
}

std::optional<double> ParseNumber(std::string_view text) {
  text = StripWhitespace(text);
  if (text.empty()) return std::nullopt;
  if (text.front() == '+') text.remove_prefix(1);
  double value = 0;
  const auto [ptr, ec] =
      std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    return std::nullopt;
  }
  if (!std::isfinite(value)) return std::nullopt;
  return value;
}

// Splits text into logical records, keeping newlines inside quotes.
std::vector<std::string> SplitRecords(const std::string& text) {
  std::vector<std::string> records;
  std::string current;
  bool in_quotes = false;
  for (const char c : text) {
    if (c == '"') in_quotes = !in_quotes;
    if (!in_quotes && (c == '\n' || c == '\r')) {
      if (!current.empty()) records.push_back(std::move(current));
      current.clear();
      continue;
    }
    current.push_back(c);
  }
  if (!current.empty()) records.push_back(std::move(current));
  return records;
}

std::string QuoteIfNeeded(const std::string& cell, char delimiter) {
  if (cell.find_first_of(std::string{delimiter, '"', '\n', '\r'}) ==
      std::string::npos) {
    return cell;
  }
  std::string quoted = "\"";
  for (const char c : cell) {
    if (c == '"') quoted.push_back('"');
    quoted.push_back(c);
  }
  quoted.push_back('"');
  return quoted;
}

}  // namespace

bool FeatureColumn::IsMissing(size_t row) const {
  if (kind == FeatureKind::kNumeric) return std::isnan(numeric[row]);
  return !categorical[row].has_value();
}

absl::StatusOr<AuditDataset> AuditDataset::Create(
    std::vector<FeatureColumn> features, std::vector<double> scores,
    std::vector<Outcome> outcomes) {
  if (scores.empty()) {
    return absl::InvalidArgumentError("empty dataset: no rows");
  }
  if (outcomes.size() != scores.size()) {
    return absl::InvalidArgumentError(
        absl::StrFormat("outcome column has %d rows, score column has %d",
                        outcomes.size(), scores.size()));
  }
  std::set<std::string> names;
  for (const auto& column : features) {
    if (column.size() != scores.size()) {
      return absl::InvalidArgumentError(absl::StrFormat(
          "feature '%s' has %d rows, expected %d", column.name, column.size(),
          scores.size()));
    }
    if (!names.insert(column.name).second) {
      return absl::InvalidArgumentError(
          absl::StrCat("duplicate feature name '", column.name, "'"));
    }
  }
  for (size_t row = 0; row < scores.size(); ++row) {
    if (!std::isfinite(scores[row])) {
      return absl::InvalidArgumentError(
          absl::StrFormat("non-finite score at row %d", row));
    }
  }
  AuditDataset data;
  data.features_ = std::move(features);
  data.scores_ = std::move(scores);
  data.outcomes_ = std::move(outcomes);
  return data;
}

std::vector<uint32_t> AuditDataset::LabeledRows() const {
  std::vector<uint32_t> rows;
  rows.reserve(num_rows());
  for (size_t row = 0; row < num_rows(); ++row) {
    if (has_outcome(row)) rows.push_back(static_cast<uint32_t>(row));
  }
  return rows;
}

std::vector<uint32_t> AuditDataset::ScoreOnlyRows() const {
  std::vector<uint32_t> rows;
  for (size_t row = 0; row < num_rows(); ++row) {
    if (!has_outcome(row)) rows.push_back(static_cast<uint32_t>(row));
  }
  return rows;
}

size_t AuditDataset::num_score_only() const {
  return static_cast<size_t>(
      std::count(outcomes_.begin(), outcomes_.end(), Outcome::kAbsent));
}

std::vector<double> AuditDataset::OutcomeValues(
    std::span<const uint32_t> rows) const {
  std::vector<double> values;
  values.reserve(rows.size());
  for (const uint32_t row : rows) {
    values.push_back(outcomes_[row] == Outcome::kPositive ? 1.0 : 0.0);
  }
  return values;
}

std::vector<std::string> SplitDelimitedLine(const std::string& line,
                                            char delimiter) {
  std::vector<std::string> cells;
  std::string cell;
  bool in_quotes = false;
  for (size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cell.push_back('"');
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        cell.push_back(c);
      }
    } else if (c == '"') {
      in_quotes = true;
    } else if (c == delimiter) {
      cells.push_back(std::move(cell));
      cell.clear();
    } else {
      cell.push_back(c);
    }
  }
  cells.push_back(std::move(cell));
  return cells;
}

uint64_t Fnv1a64(std::string_view bytes) {
  uint64_t hash = 0xCBF29CE484222325ULL;
  for (const unsigned char c : bytes) {
    hash ^= c;
    hash *= 0x100000001B3ULL;
  }
  return hash;
}

absl::StatusOr<SchemaConfig> ParseSchemaConfig(const std::string& json_text) {
  nlohmann::json json;
  try {
    json = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    return absl::InvalidArgumentError(
        absl::StrCat("schema config is not valid JSON: ", e.what()));
  }
  if (!json.is_object()) {
    return absl::InvalidArgumentError("schema config must be a JSON object");
  }
  SchemaConfig config;
  try {
    if (json.contains("delimiter")) {
      const std::string delimiter = json.at("delimiter").get<std::string>();
      if (delimiter.size() != 1) {
        return absl::InvalidArgumentError(
            "delimiter must be a single character");
      }
      config.delimiter = delimiter[0];
    }
    if (json.contains("score_column")) {
      config.score_column = json.at("score_column").get<std::string>();
    }
    if (json.contains("outcome_column")) {
      config.outcome_column = json.at("outcome_column").get<std::string>();
    }
    if (json.contains("feature_types")) {
      for (const auto& [name, type] : json.at("feature_types").items()) {
        const std::string kind = type.get<std::string>();
        if (kind == "numeric") {
          config.feature_types[name] = FeatureKind::kNumeric;
        } else if (kind == "categorical") {
          config.feature_types[name] = FeatureKind::kCategorical;
        } else {
          return absl::InvalidArgumentError(absl::StrCat(
              "feature type for '", name, "' must be numeric or categorical"));
        }
      }
    }
    if (json.contains("ignore_columns")) {
      config.ignore_columns =
          json.at("ignore_columns").get<std::vector<std::string>>();
    }
    if (json.contains("missing_markers")) {
      config.missing_markers =
          json.at("missing_markers").get<std::vector<std::string>>();
    }
  } catch (const nlohmann::json::exception& e) {
    return absl::InvalidArgumentError(
        absl::StrCat("malformed schema config: ", e.what()));
  }
  return config;
}

absl::StatusOr<SchemaConfig> LoadSchemaConfig(const std::string& path) {
  ASSIGN_OR_RETURN(const std::string text, ReadFile(path));
  return ParseSchemaConfig(text);
}

absl::StatusOr<AuditDataset> ParseCsv(const std::string& text,
                                      const SchemaConfig& config) {
  const std::vector<std::string> records = SplitRecords(text);
  if (records.empty()) return absl::InvalidArgumentError("empty file");
  std::vector<std::string> header =
      SplitDelimitedLine(records[0], config.delimiter);
  for (auto& name : header) name = std::string(absl::StripAsciiWhitespace(name));

  const auto find_column = [&](const std::string& name) -> int {
    const auto it = std::find(header.begin(), header.end(), name);
    return it == header.end() ? -1 : static_cast<int>(it - header.begin());
  };
  const int score_index = find_column(config.score_column);
  if (score_index < 0) {
    return absl::InvalidArgumentError(
        absl::StrCat("missing score column '", config.score_column, "'"));
  }
  const int outcome_index = find_column(config.outcome_column);
  if (outcome_index < 0) {
    return absl::InvalidArgumentError(
        absl::StrCat("missing outcome column '", config.outcome_column, "'"));
  }
  if (records.size() < 2) return absl::InvalidArgumentError("empty file");

  const auto is_missing = [&](std::string_view cell) {
    cell = StripWhitespace(cell);
    return std::find(config.missing_markers.begin(),
                     config.missing_markers.end(),
                     cell) != config.missing_markers.end();
  };

  std::vector<int> feature_columns;
  for (int c = 0; c < static_cast<int>(header.size()); ++c) {
    if (c == score_index || c == outcome_index) continue;
    if (std::find(config.ignore_columns.begin(), config.ignore_columns.end(),
                  header[c]) != config.ignore_columns.end()) {
      continue;
    }
    feature_columns.push_back(c);
  }

  // First pass: tokenize rows, reject unparseable scores.
  std::vector<std::vector<std::string>> rows;
  std::vector<double> scores;
  std::vector<Outcome> outcomes;
  size_t rejected = 0;
  for (size_t r = 1; r < records.size(); ++r) {
    std::vector<std::string> cells =
        SplitDelimitedLine(records[r], config.delimiter);
    if (cells.size() != header.size()) {
      return absl::InvalidArgumentError(absl::StrFormat(
          "line %d has %d fields, header has %d", r + 1, cells.size(),
          header.size()));
    }
    const std::optional<double> score = ParseNumber(cells[score_index]);
    if (!score.has_value()) {
      ++rejected;
      continue;
    }
    Outcome outcome = Outcome::kAbsent;
    if (!is_missing(cells[outcome_index])) {
      const std::optional<double> value = ParseNumber(cells[outcome_index]);
      if (value == 0.0) {
        outcome = Outcome::kNegative;
      } else if (value == 1.0) {
        outcome = Outcome::kPositive;
      } else {
        return absl::InvalidArgumentError(
            absl::StrFormat("non-binary outcome '%s' on line %d",
                            cells[outcome_index], r + 1));
      }
    }
    scores.push_back(*score);
    outcomes.push_back(outcome);
    rows.push_back(std::move(cells));
  }
  if (rows.empty()) {
    return absl::InvalidArgumentError("no rows with a parseable score");
  }

  std::vector<FeatureColumn> features;
  for (const int c : feature_columns) {
    FeatureColumn column;
    column.name = header[c];
    const auto override_it = config.feature_types.find(column.name);
    bool numeric = true;
    if (override_it != config.feature_types.end()) {
      numeric = override_it->second == FeatureKind::kNumeric;
    } else {
      for (const auto& row : rows) {
        if (!is_missing(row[c]) && !ParseNumber(row[c]).has_value()) {
          numeric = false;
          break;
        }
      }
    }
    if (numeric) {
      column.kind = FeatureKind::kNumeric;
      column.numeric.reserve(rows.size());
      for (size_t r = 0; r < rows.size(); ++r) {
        if (is_missing(rows[r][c])) {
          column.numeric.push_back(std::nan(""));
          continue;
        }
        const std::optional<double> value = ParseNumber(rows[r][c]);
        if (!value.has_value()) {
          return absl::InvalidArgumentError(absl::StrFormat(
              "feature '%s' is declared numeric but has value '%s'",
              column.name, rows[r][c]));
        }
        column.numeric.push_back(*value);
      }
    } else {
      column.kind = FeatureKind::kCategorical;
      column.categorical.reserve(rows.size());
      for (const auto& row : rows) {
        if (is_missing(row[c])) {
          column.categorical.push_back(std::nullopt);
        } else {
          column.categorical.push_back(
              std::string(absl::StripAsciiWhitespace(row[c])));
        }
      }
    }
    features.push_back(std::move(column));
  }

  ASSIGN_OR_RETURN(AuditDataset data,
                   AuditDataset::Create(std::move(features), std::move(scores),
                                        std::move(outcomes)));
  data.set_rejected_rows(rejected);
  data.set_fingerprint(Fnv1a64(text));
  return data;
}

absl::StatusOr<AuditDataset> LoadCsv(const std::string& path,
                                     const SchemaConfig& config) {
  ASSIGN_OR_RETURN(const std::string text, ReadFile(path));
  return ParseCsv(text, config);
}

std::string DatasetToCsv(const AuditDataset& data, const SchemaConfig& config) {
  const std::string delimiter(1, config.delimiter);
  std::string out;
  std::vector<std::string> header;
  for (const auto& column : data.features()) {
    header.push_back(QuoteIfNeeded(column.name, config.delimiter));
  }
  header.push_back(config.score_column);
  header.push_back(config.outcome_column);
  absl::StrAppend(&out, absl::StrJoin(header, delimiter), "\n");
  std::vector<std::string> cells;
  for (size_t row = 0; row < data.num_rows(); ++row) {
    cells.clear();
    for (const auto& column : data.features()) {
      if (column.IsMissing(row)) {
        cells.emplace_back();
      } else if (column.kind == FeatureKind::kNumeric) {
        cells.push_back(absl::StrFormat("%.17g", column.numeric[row]));
      } else {
        cells.push_back(QuoteIfNeeded(*column.categorical[row], config.delimiter));
      }
    }
    cells.push_back(absl::StrFormat("%.17g", data.scores()[row]));
    switch (data.outcomes()[row]) {
      case Outcome::kAbsent:
        cells.emplace_back();
        break;
      case Outcome::kNegative:
        cells.emplace_back("0");
        break;
      case Outcome::kPositive:
        cells.emplace_back("1");
        break;
    }
    absl::StrAppend(&out, absl::StrJoin(cells, delimiter), "\n");
  }
  return out;
}

}  // namespace dcaudit
