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

#ifndef DCAUDIT_SRC_GAM_INTERNAL_H_
#define DCAUDIT_SRC_GAM_INTERNAL_H_

#include <cmath>
#include <span>
#include <vector>

#include "absl/status/status.h"
#include "dcaudit/gam.h"

namespace dcaudit::gam::internal {

// Per-row negative gradient and hessian of the loss at link score f.
inline void GradientAndHessian(Link link, double target, double f,
                               double* gradient, double* hessian) {
  if (link == Link::kIdentity) {
    *gradient = target - f;
    *hessian = 1.0;
  } else {
    const double p = Sigmoid(f);
    *gradient = target - p;
    *hessian = p * (1.0 - p);
  }
}

inline double RowLoss(Link link, double target, double f) {
  if (link == Link::kIdentity) {
    const double r = target - f;
    return r * r;
  }
  // log(1 + e^f) - y f, computed without overflow.
  const double softplus = f > 0 ? f + std::log1p(std::exp(-f))
                                : std::log1p(std::exp(f));
  return softplus - target * f;
}

// Fits a best-first tree with at most `max_leaves` leaves over ordered bins
// given per-bin gradient and hessian sums. Returns the unscaled leaf value of
// every bin (sum gradient / sum hessian of its leaf). Categorical features
// order their bins by gradient ratio before searching for cuts. Equal gains
// resolve to the lowest cut position.
std::vector<double> FitBinTree(std::span<const double> gradient_sums,
                               std::span<const double> hessian_sums,
                               int max_leaves, bool categorical);

// Fits a four-leaf tree on a pair grid: one cut on either axis, then an
// independent cut along the other axis on each side. Input and output are
// row-major first_bins x second_bins.
std::vector<double> FitPairTree(std::span<const double> gradient_sums,
                                std::span<const double> hessian_sums,
                                int first_bins, int second_bins);

absl::Status CheckTrainingRows(size_t num_rows,
                               std::span<const uint32_t> train_rows,
                               std::span<const uint32_t> validation_rows);

// Shifts surfaces (and shapes, unless frozen) to zero mean over the training
// rows and folds the means into the intercept.
void CenterModel(AdditiveModel* model, const BinnedMatrix& x,
                 std::span<const uint32_t> train_rows, bool shapes_frozen = false);

}  // namespace dcaudit::gam::internal

#endif  // DCAUDIT_SRC_GAM_INTERNAL_H_
