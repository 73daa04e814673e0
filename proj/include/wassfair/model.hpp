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

#ifndef WASSFAIR_MODEL_HPP_
#define WASSFAIR_MODEL_HPP_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "wassfair/dataset.hpp"

namespace wassfair {

double sigmoid(double z);

// Fully-connected net with ReLU hidden activations and a sigmoid output
// producing a score in (0,1). Parameters live in one flat vector, per layer
// [W row-major (out x in), b], so the optimizers can treat the model as a
// single parameter array.
class Mlp {
 public:
  Mlp() = default;
  // dims = [input, hidden..., 1]
  explicit Mlp(std::vector<std::size_t> dims);

  // Weights uniform in +-1/sqrt(fan_in), biases zero.
  static Mlp random(std::size_t input_dim, std::span<const std::size_t> hidden,
                    std::uint64_t seed);

  const std::vector<std::size_t>& dims() const { return dims_; }
  std::size_t input_dim() const { return dims_.front(); }
  std::size_t layer_count() const { return dims_.size() - 1; }
  std::size_t param_count() const { return params_.size(); }
  std::span<double> params() { return params_; }
  std::span<const double> params() const { return params_; }

  std::span<const double> weights(std::size_t layer) const;
  std::span<const double> bias(std::size_t layer) const;

  // Per-sample activation storage, reusable across forward calls.
  struct Workspace {
    std::vector<std::vector<double>> pre;  // pre-activations per layer
    std::vector<std::vector<double>> act;  // act[0] = input, act[l+1] = layer output
  };

  double forward(std::span<const double> x, Workspace& ws) const;
  double forward(std::span<const double> x) const;

  // Accumulates into grad (same layout as params) the gradient of
  // upstream * score(x), given the workspace of a forward pass on x.
  void backward(const Workspace& ws, double upstream, std::span<double> grad) const;

 private:
  std::span<double> weights_mut(std::size_t layer);
  std::vector<std::size_t> dims_;
  std::vector<double> params_;
  std::vector<std::size_t> offsets_;  // per layer, start of [W, b] block
};

// Scores for a list of dataset rows.
std::vector<double> forward_rows(const Mlp& model, const Dataset& ds,
                                 std::span<const std::size_t> rows);
std::vector<double> forward_all(const Mlp& model, const Dataset& ds);

// Per-sample derivative of the batch-mean square loss with respect to each
// score: 2*(f_i - y_i)/#B with #B = scores.size().
std::vector<double> loss_grad(std::span<const double> scores, std::span<const int> targets);

// Versioned little-endian binary checkpoint; exact round-trip.
void save_checkpoint(const Mlp& model, const std::string& path);
Mlp load_checkpoint(const std::string& path);

// Logistic regression scorer: sigmoid(theta0 + theta . x).
struct LogisticModel {
  double theta0 = 0.0;
  std::vector<double> theta;

  static LogisticModel zeros(std::size_t p);
  double forward(std::span<const double> x) const;
};

// Negative mean log-likelihood plus the weighted distribution penalty from
// `penalty` (grid of penalty.grid_size bins, built fresh on the current
// scores). Scores are clamped away from 0/1 inside the logs.
double logistic_energy(const LogisticModel& model, const Dataset& ds,
                       const PenaltySpec& penalty);

// One full-batch descent step where each of the p+1 partial derivatives of
// the energy is a central finite difference (2(p+1) energy evaluations).
LogisticModel logistic_fd_step(const LogisticModel& model, const Dataset& ds,
                               const PenaltySpec& penalty, double learning_rate,
                               double fd_step = 1e-5);

}  // namespace wassfair

#endif  // WASSFAIR_MODEL_HPP_
