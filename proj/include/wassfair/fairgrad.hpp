/*
 * Copyright 2026 The wassfair authors
 *
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

#ifndef WASSFAIR_FAIRGRAD_HPP_
#define WASSFAIR_FAIRGRAD_HPP_

#include <optional>
#include <span>
#include <vector>

#include "wassfair/empirical.hpp"

namespace wassfair {

// Frozen per-batch state for the penalty gradients: the two group CDFs on a
// shared grid (raw scores for the prediction penalties, squared errors for
// the error penalty), the quadrature step, and the batch size entering the
// batch-mean factor. Group counts are those of the (sub)sampled population
// the CDFs were built from, not of the batch.
struct PenaltyContext {
  std::optional<DiscreteCdf> cdf0;
  std::optional<DiscreteCdf> cdf1;
  double dtau = 0.0;   // 1/J
  int batch_size = 1;  // #B
};

// Builds a context with a shared grid spanning both groups' values.
// Throws std::invalid_argument("empty group") if either group is empty.
PenaltyContext make_penalty_context(std::span<const double> values0,
                                    std::span<const double> values1, int grid_bins,
                                    int batch_size, double pad = kDefaultGridPad);

struct ScoredSample {
  double score;
  int group;
};

struct ScoredLabeledSample {
  double score;
  int target;
  int group;
};

// The inverse-CDF sensitivity underlying the gradients is a finite-difference
// estimate; its coupling term can be evaluated two ways.
enum class GradForm {
  Refined,  // raw value and linearly interpolated coupling (default)
  Coarse,   // nearest-grid-edge value and nearest-level coupling
};

// Per-sample gradient of the squared W2 distance between the two groups'
// score distributions with respect to each batch score. For a sample of
// group s with bin j in its own CDF:
//   g = +- (2*dtau/#B) * (f - cor_other(f)) / (n_s * (H_s^{j+1} - H_s^j))
// with the group-1 sum entering negatively, the bin-mass difference floored
// at 1/n_s, and j+1 clamped to J at the top bin.
// Throws std::invalid_argument("missing group CDF") when the batch contains a
// group the context has no CDF for.
std::vector<double> grad_w2_prediction(const PenaltyContext& ctx,
                                       std::span<const ScoredSample> batch,
                                       GradForm form = GradForm::Refined);

// Per-sample gradient of the squared W2 distance between the two groups'
// squared-error distributions, with respect to each score. Exactly the
// W2 gradient on the error values e = (f - y)^2 times the chain factor
// 2*(f - y); the context CDFs must be built on squared errors.
std::vector<double> grad_w2_error(const PenaltyContext& ctx,
                                  std::span<const ScoredLabeledSample> batch,
                                  GradForm form = GradForm::Refined);

// W1 variant: only the sign of the gap between a sample's bin edge and its
// nearest-level edge in the other group enters, scaled by (dtau/#B)/(n_s*mass).
std::vector<double> grad_w1_prediction(const PenaltyContext& ctx,
                                       std::span<const ScoredSample> batch);

}  // namespace wassfair

#endif  // WASSFAIR_FAIRGRAD_HPP_
