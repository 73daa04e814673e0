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

#ifndef WASSFAIR_TRAINER_HPP_
#define WASSFAIR_TRAINER_HPP_

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "wassfair/dataset.hpp"
#include "wassfair/metrics.hpp"
#include "wassfair/model.hpp"

namespace wassfair {

// State of the automatic penalty-weight tuner. During the warming phase the
// weight is 0 while the mean absolute per-sample magnitudes of the loss and
// penalty gradients (d_r, d_w2) are measured; afterwards
// lambda = alpha * d_r / d_w2.
struct AutoLambdaState {
  double alpha = 0.5;
  double d_r = 0.0;
  double d_w2 = 0.0;
  int warm_epochs = 3;
  double acc_floor = 0.75;
  double di_floor = 0.85;
};

struct EpochMetrics {
  double accuracy = 0.0;
  // Disparate impact for the prediction penalties, DMSE for the error penalty.
  double fairness = 0.0;
};

// The two-rule weight update: accuracy below the floor shrinks alpha by 0.9;
// otherwise a fairness value below its floor grows alpha by 1.1.
AutoLambdaState auto_lambda_update(AutoLambdaState state, const EpochMetrics& metrics);

struct EpochRecord {
  int epoch = 0;
  double lambda = 0.0;
  double alpha = 0.0;
  double train_loss = 0.0;     // mean square loss over the epoch's batches
  double penalty_value = 0.0;  // active penalty distance on the train split
  FairnessReport train_report;
  std::optional<FairnessReport> eval_report;
};

struct RunHistory {
  std::vector<EpochRecord> epochs;
  // Number of per-batch CDF table builds; equals epochs * batches whenever a
  // penalty is active.
  std::uint64_t cdf_rebuilds = 0;

  std::string csv() const;  // one epoch per row
};

void sgd_step(std::span<double> params, std::span<const double> grads, double step);

struct AdamState {
  double step = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  std::int64_t t = 0;
  std::vector<double> m;
  std::vector<double> v;

  static AdamState init(const OptimizerConfig& cfg, std::size_t param_count);
};

void adam_step(std::span<double> params, std::span<const double> grads, AdamState& state);

using EpochCallback = std::function<void(const EpochRecord&)>;

// Mini-batch training with the combined loss + lambda * penalty gradient
// backprojected through the model. Per epoch and batch: rebuild the two group
// CDFs from the current parameters (full set, or a uniform subsample capped
// at penalty.subsample_cap), draw the batch, forward, form the per-sample
// loss and penalty gradients, backproject their sum, update the parameters.
// Audits run on frozen parameters at every epoch end; on_epoch (when set)
// sees each record as it is produced.
// Throws on single-group datasets and on NaN in any gradient.
RunHistory train(const Dataset& train_set, const TrainConfig& cfg, Mlp& model,
                 const Dataset* eval_set = nullptr,
                 const EpochCallback& on_epoch = nullptr);

}  // namespace wassfair

#endif  // WASSFAIR_TRAINER_HPP_
