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


// Synthetic audit datasets with known ground truth.

#ifndef DCAUDIT_SYNTHETIC_H_
#define DCAUDIT_SYNTHETIC_H_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "absl/status/statusor.h"
#include "dcaudit/dataset.h"

namespace dcaudit::synthetic {

// Binary features PS, AS, Bulge, f03, ...; score = 3 PS + AS + Bulge exactly.
absl::StatusOr<AuditDataset> StopAndFrisk(size_t rows, uint64_t seed,
                                          int num_features = 40);

inline constexpr int kUsedFeatures = 8;
inline constexpr int kUsedUnusedFeatures = 16;

// Features x00..x15 uniform on [-1, 1]. The score depends on x00..x07 only;
// the outcome depends on all sixteen.
absl::StatusOr<AuditDataset> UsedUnused(size_t rows, uint64_t seed,
                                        double score_noise = 0.05);
// Shape of feature j in the used/unused generator, centered over [-1, 1].
double UsedUnusedShape(int feature, double x);

// Score and outcome share a binary signal z. When `include_hidden` is false z
// is dropped from the audit features; `strength` scales its effect on the
// outcome logit.
absl::StatusOr<AuditDataset> HiddenFeature(size_t rows, uint64_t seed,
                                           double strength = 1.5,
                                           bool include_hidden = false);

// Integer scores on [0, 500]; outcome probability flat at 0.3 up to 350 and
// rising linearly to 0.9 at 500.
absl::StatusOr<AuditDataset> Kinked(size_t rows, uint64_t seed);
double KinkedProbability(double score);

// Decile scores 1..10 with outcome log-odds linear in the score.
absl::StatusOr<AuditDataset> LogitLinear(size_t rows, uint64_t seed);

// Six features; the score adds 2 * [x1 > 0] * [x2 > 0] to an additive part.
absl::StatusOr<AuditDataset> Interaction(size_t rows, uint64_t seed,
                                         double noise = 0.3);

// Categorical `group` (A or B): the score adds `delta` for A while the outcome
// log-odds subtract it.
absl::StatusOr<AuditDataset> GenderFlip(size_t rows, uint64_t seed,
                                        double delta = 0.5);

// Score and outcome independent of the features.
absl::StatusOr<AuditDataset> PureNoise(size_t rows, uint64_t seed,
                                       int num_features = 3);

struct GeneratorOptions {
  size_t rows = 10000;
  uint64_t seed = 0;
  // Generator specific: hidden-feature outcome strength or gender-flip delta.
  std::optional<double> strength;
  // Hidden-feature generator: keep z among the audit features.
  bool include_hidden = false;
};

std::vector<std::string> GeneratorNames();
absl::StatusOr<AuditDataset> Generate(const std::string& name,
                                      const GeneratorOptions& options);

}  // namespace dcaudit::synthetic

#endif  // DCAUDIT_SYNTHETIC_H_
