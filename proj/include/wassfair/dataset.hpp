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

#ifndef WASSFAIR_DATASET_HPP_
#define WASSFAIR_DATASET_HPP_

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace wassfair {

// One observation: standardized feature vector, binary target, binary group
// membership (group 0 is the potentially disadvantaged group).
struct Sample {
  std::vector<double> features;
  int target = 0;
  int group = 0;
};

struct Dataset {
  std::vector<Sample> samples;
  std::size_t p = 0;   // feature dimension
  std::size_t n0 = 0;  // samples with group == 0
  std::size_t n1 = 0;  // samples with group == 1

  std::size_t n() const { return samples.size(); }

  // Builds a dataset and derives p (from the first row) and the group counts.
  static Dataset from_samples(std::vector<Sample> rows);

  std::vector<std::size_t> group_rows(int group) const;
};

struct Violation {
  std::size_t row;
  std::string rule;
};

// Empty iff every row satisfies the datamodel invariants. Pure; violations
// are data, not errors.
std::vector<Violation> validate(const Dataset& ds);

enum class PenaltyKind { None, PredictionW2, ErrorW2, PredictionW1 };

struct PenaltySpec {
  PenaltyKind kind = PenaltyKind::None;
  double lambda = 0.0;
  bool auto_tune = false;
  int grid_size = 100;       // discretization steps J of the score CDFs
  int subsample_cap = 1000;  // n_sub; CDFs use the full set when n <= n_sub
  // The population behind the CDFs is redrawn per batch by default; set to
  // reuse one draw across a whole epoch.
  bool subsample_per_epoch = false;
};

enum class OptimizerKind { Sgd, Adam };

struct OptimizerConfig {
  OptimizerKind kind = OptimizerKind::Adam;
  double step = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct TrainConfig {
  int epochs = 100;
  int batch_size = 50;
  OptimizerConfig optimizer;
  std::uint64_t seed = 0;
  PenaltySpec penalty;
  // Auto-tuning knobs; active only when penalty.auto_tune is set.
  int warm_epochs = 3;
  double alpha0 = 0.5;
  double acc_floor = 0.75;
  double di_floor = 0.85;
};

}  // namespace wassfair

#endif  // WASSFAIR_DATASET_HPP_
