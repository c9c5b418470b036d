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

#ifndef DCAUDIT_METRICS_H_
#define DCAUDIT_METRICS_H_

#include <optional>
#include <span>
#include <vector>

namespace dcaudit {

double Rmse(std::span<const double> predictions, std::span<const double> targets);

// Area under the ROC curve with ties counted as one half. std::nullopt when
// only one class is present.
std::optional<double> Auc(std::span<const double> scores,
                          std::span<const double> labels);

// 1-based ranks, ties receiving their average rank.
std::vector<double> AverageRanks(std::span<const double> values);

struct MeanAndSpread {
  double mean = 0;
  // Sample standard deviation (n - 1 denominator); 0 for a single value.
  double stddev = 0;
  int count = 0;
};

MeanAndSpread Summarize(std::span<const double> values);

}  // namespace dcaudit

#endif  // DCAUDIT_METRICS_H_
