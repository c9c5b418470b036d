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


#include "dcaudit/synthetic.h"

#include <cmath>
#include <numbers>
#include <random>
#include <utility>

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "dcaudit/random.h"

namespace dcaudit::synthetic {
namespace {

constexpr double kPi = std::numbers::pi;

double Logistic(double z) { return 1.0 / (1.0 + std::exp(-z)); }

FeatureColumn NumericColumn(std::string name, size_t rows) {
  FeatureColumn column;
  column.name = std::move(name);
  column.kind = FeatureKind::kNumeric;
  column.numeric.resize(rows);
  return column;
}

Outcome Draw(Rng& rng, double probability) {
  std::bernoulli_distribution coin(probability);
  return coin(rng) ? Outcome::kPositive : Outcome::kNegative;
}

absl::Status CheckRows(size_t rows) {
  if (rows == 0) return absl::InvalidArgumentError("rows must be positive");
  return absl::OkStatus();
}

}  // namespace

absl::StatusOr<AuditDataset> StopAndFrisk(size_t rows, uint64_t seed,
                                          int num_features) {
  if (auto status = CheckRows(rows); !status.ok()) return status;
  if (num_features < 4) {
    return absl::InvalidArgumentError("need at least 4 features");
  }
  Rng rng(DeriveSeed(seed, {1}));
  std::bernoulli_distribution present(0.3);
  std::vector<FeatureColumn> features;
  for (int f = 0; f < num_features; ++f) {
    std::string name = f == 0   ? "PS"
                       : f == 1 ? "AS"
                       : f == 2 ? "Bulge"
                                : absl::StrFormat("f%02d", f);
    features.push_back(NumericColumn(std::move(name), rows));
  }
  std::vector<double> scores(rows);
  std::vector<Outcome> outcomes(rows);
  for (size_t r = 0; r < rows; ++r) {
    for (FeatureColumn& column : features) {
      column.numeric[r] = present(rng) ? 1.0 : 0.0;
    }
    scores[r] = 3 * features[0].numeric[r] + features[1].numeric[r] +
                features[2].numeric[r];
    outcomes[r] =
        Draw(rng, Logistic(-2.5 + 0.8 * scores[r] + 0.3 * features[3].numeric[r]));
  }
  return AuditDataset::Create(std::move(features), std::move(scores),
                              std::move(outcomes));
}

double UsedUnusedShape(int feature, double x) {
  switch (feature) {
    case 0:
      return 1.5 * std::sin(kPi * x);
    case 1:
      return 2 * (x * x - 1.0 / 3);
    case 2:
      return 1.5 * x;
    case 3:
      return 1.5 * ((x > 0.3 ? 1.0 : 0.0) - 0.35);
    case 4:
      return -1.2 * x;
    case 5:
      return std::cos(kPi * x);
    case 6:
      return 1.5 * ((x < -0.5 ? 1.0 : 0.0) - 0.25);
    case 7:
      return 2 * x * x * x;
    case 8:
      return 1.5 * x;
    case 9:
      return -1.5 * std::sin(kPi * x);
    case 10:
      return -2 * (x * x - 1.0 / 3);
    case 11:
      return 1.5 * ((x > 0 ? 1.0 : 0.0) - 0.5);
    case 12:
      return 1.2 * std::cos(kPi * x);
    case 13:
      return -1.5 * x;
    case 14:
      return 2 * x * x * x;
    case 15:
      return 1.5 * ((x < 0.2 ? 1.0 : 0.0) - 0.6);
    default:
      return 0;
  }
}

absl::StatusOr<AuditDataset> UsedUnused(size_t rows, uint64_t seed,
                                        double score_noise) {
  if (auto status = CheckRows(rows); !status.ok()) return status;
  Rng rng(DeriveSeed(seed, {2}));
  std::uniform_real_distribution<double> uniform(-1.0, 1.0);
  std::normal_distribution<double> noise(0.0, 1.0);
  std::vector<FeatureColumn> features;
  for (int f = 0; f < kUsedUnusedFeatures; ++f) {
    features.push_back(NumericColumn(absl::StrFormat("x%02d", f), rows));
  }
  std::vector<double> scores(rows);
  std::vector<Outcome> outcomes(rows);
  for (size_t r = 0; r < rows; ++r) {
    double used = 0;
    double unused = 0;
    for (int f = 0; f < kUsedUnusedFeatures; ++f) {
      const double x = uniform(rng);
      features[f].numeric[r] = x;
      (f < kUsedFeatures ? used : unused) += UsedUnusedShape(f, x);
    }
    scores[r] = used + score_noise * noise(rng);
    outcomes[r] = Draw(rng, Logistic(-0.3 + used + unused));
  }
  return AuditDataset::Create(std::move(features), std::move(scores),
                              std::move(outcomes));
}

absl::StatusOr<AuditDataset> HiddenFeature(size_t rows, uint64_t seed,
                                           double strength,
                                           bool include_hidden) {
  if (auto status = CheckRows(rows); !status.ok()) return status;
  Rng rng(DeriveSeed(seed, {3}));
  std::uniform_real_distribution<double> uniform(-1.0, 1.0);
  std::normal_distribution<double> noise(0.0, 0.3);
  std::bernoulli_distribution hidden(0.25);
  std::vector<FeatureColumn> features;
  for (int f = 0; f < 5; ++f) {
    features.push_back(NumericColumn(absl::StrFormat("x%d", f), rows));
  }
  FeatureColumn z = NumericColumn("z", rows);
  std::vector<double> scores(rows);
  std::vector<Outcome> outcomes(rows);
  for (size_t r = 0; r < rows; ++r) {
    for (FeatureColumn& column : features) column.numeric[r] = uniform(rng);
    const double x0 = features[0].numeric[r];
    const double x1 = features[1].numeric[r];
    const double x2 = features[2].numeric[r];
    const double x3 = features[3].numeric[r];
    z.numeric[r] = hidden(rng) ? 1.0 : 0.0;
    const double base =
        x0 + 0.8 * std::sin(kPi * x1) - 0.6 * x2 + 0.5 * x3 * x3;
    scores[r] = base + 1.5 * z.numeric[r] + noise(rng);
    outcomes[r] = Draw(rng, Logistic(-1.0 + base + strength * z.numeric[r]));
  }
  if (include_hidden) features.push_back(std::move(z));
  return AuditDataset::Create(std::move(features), std::move(scores),
                              std::move(outcomes));
}

double KinkedProbability(double score) {
  if (score < 350) return 0.3;
  return 0.3 + 0.6 * (score - 350) / 150;
}

absl::StatusOr<AuditDataset> Kinked(size_t rows, uint64_t seed) {
  if (auto status = CheckRows(rows); !status.ok()) return status;
  Rng rng(DeriveSeed(seed, {4}));
  std::uniform_int_distribution<int> level(0, 500);
  std::normal_distribution<double> noise(0.0, 1.0);
  FeatureColumn x0 = NumericColumn("x0", rows);
  FeatureColumn x1 = NumericColumn("x1", rows);
  std::vector<double> scores(rows);
  std::vector<Outcome> outcomes(rows);
  for (size_t r = 0; r < rows; ++r) {
    scores[r] = level(rng);
    x0.numeric[r] = scores[r] / 100 + 0.5 * noise(rng);
    x1.numeric[r] = noise(rng);
    outcomes[r] = Draw(rng, KinkedProbability(scores[r]));
  }
  std::vector<FeatureColumn> features;
  features.push_back(std::move(x0));
  features.push_back(std::move(x1));
  return AuditDataset::Create(std::move(features), std::move(scores),
                              std::move(outcomes));
}

absl::StatusOr<AuditDataset> LogitLinear(size_t rows, uint64_t seed) {
  if (auto status = CheckRows(rows); !status.ok()) return status;
  Rng rng(DeriveSeed(seed, {5}));
  std::uniform_int_distribution<int> decile(1, 10);
  std::normal_distribution<double> noise(0.0, 1.0);
  FeatureColumn x0 = NumericColumn("x0", rows);
  FeatureColumn x1 = NumericColumn("x1", rows);
  std::vector<double> scores(rows);
  std::vector<Outcome> outcomes(rows);
  for (size_t r = 0; r < rows; ++r) {
    scores[r] = decile(rng);
    x0.numeric[r] = scores[r] + noise(rng);
    x1.numeric[r] = noise(rng);
    outcomes[r] = Draw(rng, Logistic(-2.75 + 0.5 * scores[r]));
  }
  std::vector<FeatureColumn> features;
  features.push_back(std::move(x0));
  features.push_back(std::move(x1));
  return AuditDataset::Create(std::move(features), std::move(scores),
                              std::move(outcomes));
}

absl::StatusOr<AuditDataset> Interaction(size_t rows, uint64_t seed,
                                         double noise_sd) {
  if (auto status = CheckRows(rows); !status.ok()) return status;
  Rng rng(DeriveSeed(seed, {6}));
  std::uniform_real_distribution<double> uniform(-1.0, 1.0);
  std::normal_distribution<double> noise(0.0, noise_sd);
  std::vector<FeatureColumn> features;
  for (int f = 0; f < 6; ++f) {
    features.push_back(NumericColumn(absl::StrFormat("x%d", f), rows));
  }
  std::vector<double> scores(rows);
  std::vector<Outcome> outcomes(rows);
  for (size_t r = 0; r < rows; ++r) {
    double x[6];
    for (int f = 0; f < 6; ++f) x[f] = features[f].numeric[r] = uniform(rng);
    const double signal = 0.8 * x[0] + 0.5 * x[1] - 0.5 * x[2] -
                          0.5 * std::sin(kPi * x[3]) + 0.6 * x[4] * x[4] +
                          2.0 * (x[1] > 0 ? 1 : 0) * (x[2] > 0 ? 1 : 0);
    scores[r] = signal + noise(rng);
    outcomes[r] = Draw(rng, Logistic(signal - 1.0));
  }
  return AuditDataset::Create(std::move(features), std::move(scores),
                              std::move(outcomes));
}

absl::StatusOr<AuditDataset> GenderFlip(size_t rows, uint64_t seed,
                                        double delta) {
  if (auto status = CheckRows(rows); !status.ok()) return status;
  Rng rng(DeriveSeed(seed, {7}));
  std::uniform_real_distribution<double> uniform(-1.0, 1.0);
  std::normal_distribution<double> noise(0.0, 0.1);
  std::bernoulli_distribution group_a(0.5);
  FeatureColumn group;
  group.name = "group";
  group.kind = FeatureKind::kCategorical;
  group.categorical.resize(rows);
  FeatureColumn x0 = NumericColumn("x0", rows);
  FeatureColumn x1 = NumericColumn("x1", rows);
  std::vector<double> scores(rows);
  std::vector<Outcome> outcomes(rows);
  for (size_t r = 0; r < rows; ++r) {
    const bool a = group_a(rng);
    group.categorical[r] = a ? "A" : "B";
    x0.numeric[r] = uniform(rng);
    x1.numeric[r] = uniform(rng);
    const double base = 0.8 * x0.numeric[r] - 0.5 * x1.numeric[r];
    scores[r] = base + (a ? delta : 0.0) + noise(rng);
    outcomes[r] = Draw(rng, Logistic(-0.5 + base - (a ? delta : 0.0)));
  }
  std::vector<FeatureColumn> features;
  features.push_back(std::move(group));
  features.push_back(std::move(x0));
  features.push_back(std::move(x1));
  return AuditDataset::Create(std::move(features), std::move(scores),
                              std::move(outcomes));
}

absl::StatusOr<AuditDataset> PureNoise(size_t rows, uint64_t seed,
                                       int num_features) {
  if (auto status = CheckRows(rows); !status.ok()) return status;
  if (num_features < 1) return absl::InvalidArgumentError("need a feature");
  Rng rng(DeriveSeed(seed, {8}));
  std::uniform_real_distribution<double> uniform(-1.0, 1.0);
  std::normal_distribution<double> noise(0.0, 1.0);
  std::vector<FeatureColumn> features;
  for (int f = 0; f < num_features; ++f) {
    features.push_back(NumericColumn(absl::StrFormat("x%d", f), rows));
  }
  std::vector<double> scores(rows);
  std::vector<Outcome> outcomes(rows);
  for (size_t r = 0; r < rows; ++r) {
    for (FeatureColumn& column : features) column.numeric[r] = uniform(rng);
    scores[r] = noise(rng);
    outcomes[r] = Draw(rng, 0.5);
  }
  return AuditDataset::Create(std::move(features), std::move(scores),
                              std::move(outcomes));
}

std::vector<std::string> GeneratorNames() {
  return {"stop-and-frisk", "used-unused", "hidden-feature", "kinked",
          "logit-linear",   "interaction", "gender-flip",    "noise"};
}

absl::StatusOr<AuditDataset> Generate(const std::string& name,
                                      const GeneratorOptions& options) {
  const size_t rows = options.rows;
  const uint64_t seed = options.seed;
  if (name == "stop-and-frisk") return StopAndFrisk(rows, seed);
  if (name == "used-unused") return UsedUnused(rows, seed);
  if (name == "hidden-feature") {
    return HiddenFeature(rows, seed, options.strength.value_or(1.5),
                         options.include_hidden);
  }
  if (name == "kinked") return Kinked(rows, seed);
  if (name == "logit-linear") return LogitLinear(rows, seed);
  if (name == "interaction") return Interaction(rows, seed);
  if (name == "gender-flip") {
    return GenderFlip(rows, seed, options.strength.value_or(0.5));
  }
  if (name == "noise") return PureNoise(rows, seed);
  return absl::InvalidArgumentError(absl::StrCat("unknown generator '", name, "'"));
}

}  // namespace dcaudit::synthetic
