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

#include "wassfair/fairgrad.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace wassfair {

PenaltyContext make_penalty_context(std::span<const double> values0,
                                    std::span<const double> values1, int grid_bins,
                                    int batch_size, double pad) {
  if (values0.empty() || values1.empty()) throw std::invalid_argument("empty group");
  std::vector<double> all;
  all.reserve(values0.size() + values1.size());
  all.insert(all.end(), values0.begin(), values0.end());
  all.insert(all.end(), values1.begin(), values1.end());
  const ValueGrid grid = make_grid(all, grid_bins, pad);

  PenaltyContext ctx;
  ctx.cdf0 = build_cdf(values0, grid);
  ctx.cdf1 = build_cdf(values1, grid);
  ctx.dtau = 1.0 / grid_bins;
  ctx.batch_size = batch_size;
  return ctx;
}

namespace {

const DiscreteCdf& own_cdf(const PenaltyContext& ctx, int group) {
  const std::optional<DiscreteCdf>& c = group == 0 ? ctx.cdf0 : ctx.cdf1;
  if (!c.has_value()) throw std::invalid_argument("missing group CDF");
  return *c;
}

// H_s^{j+1} - H_s^j with the top bin reusing H^J - H^{J-1} and empty bins
// floored at the one-sample mass 1/n_s.
double floored_bin_mass(const DiscreteCdf& cdf, int j) {
  const int jn = std::min(j + 1, cdf.grid.bins);
  const double mass = cdf.level(jn) - cdf.level(jn - 1);
  return std::max(mass, 1.0 / static_cast<double>(cdf.group_count));
}

// Index j' whose level in `other` is nearest to `level`; ties take the
// smaller index.
int nearest_level_index(const DiscreteCdf& other, double level) {
  const auto it = std::lower_bound(other.values.begin(), other.values.end(), level);
  int j_hi = static_cast<int>(it - other.values.begin()) + 1;  // first level >= tau
  if (j_hi > other.grid.bins) j_hi = other.grid.bins;
  const int j_lo = std::max(j_hi - 1, 1);
  const double d_lo = std::fabs(other.level(j_lo) - level);
  const double d_hi = std::fabs(other.level(j_hi) - level);
  return d_lo <= d_hi ? j_lo : j_hi;
}

// Shared core of the W2 gradients: derivative of the squared distance with
// respect to one group-s value v, without the batch-mean factor.
double w2_value_grad(const PenaltyContext& ctx, double v, int group, GradForm form) {
  const DiscreteCdf& own = own_cdf(ctx, group);
  const DiscreteCdf& other = own_cdf(ctx, 1 - group);
  const int j = locate_bin(own, v).index;
  const double denom = static_cast<double>(own.group_count) * floored_bin_mass(own, j);

  double gap;  // own-side value minus its coupling in the other group
  if (form == GradForm::Refined) {
    gap = v - cor(own, other, v);
  } else {
    const int jp = nearest_level_index(other, own.level(j));
    gap = own.grid.edge(j) - other.grid.edge(jp);
  }

  // Group 0 enters the distance estimate positively, group 1 negatively.
  if (group == 0) return 2.0 * ctx.dtau * gap / denom;
  return -2.0 * ctx.dtau * (-gap) / denom;
}

}  // namespace

std::vector<double> grad_w2_prediction(const PenaltyContext& ctx,
                                       std::span<const ScoredSample> batch,
                                       GradForm form) {
  std::vector<double> grads(batch.size());
  const double batch_mean = 1.0 / static_cast<double>(ctx.batch_size);
  for (std::size_t i = 0; i < batch.size(); ++i) {
    grads[i] = batch_mean * w2_value_grad(ctx, batch[i].score, batch[i].group, form);
  }
  return grads;
}

std::vector<double> grad_w2_error(const PenaltyContext& ctx,
                                  std::span<const ScoredLabeledSample> batch,
                                  GradForm form) {
  std::vector<double> grads(batch.size());
  const double batch_mean = 1.0 / static_cast<double>(ctx.batch_size);
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const double residual = batch[i].score - batch[i].target;
    const double err = residual * residual;
    const double on_error = batch_mean * w2_value_grad(ctx, err, batch[i].group, form);
    grads[i] = on_error * 2.0 * residual;
  }
  return grads;
}

std::vector<double> grad_w1_prediction(const PenaltyContext& ctx,
                                       std::span<const ScoredSample> batch) {
  std::vector<double> grads(batch.size());
  const double batch_mean = 1.0 / static_cast<double>(ctx.batch_size);
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const int group = batch[i].group;
    const DiscreteCdf& own = own_cdf(ctx, group);
    const DiscreteCdf& other = own_cdf(ctx, 1 - group);
    const int j = locate_bin(own, batch[i].score).index;
    const int jp = nearest_level_index(other, own.level(j));
    const double denom = static_cast<double>(own.group_count) * floored_bin_mass(own, j);
    const double sgn = j == jp ? 0.0 : (j > jp ? 1.0 : -1.0);
    const double g = group == 0 ? ctx.dtau * sgn / denom : -ctx.dtau * (-sgn) / denom;
    grads[i] = batch_mean * g;
  }
  return grads;
}

}  // namespace wassfair
