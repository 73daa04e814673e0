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

#include "wassfair/model.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include "wassfair/empirical.hpp"
#include "wassfair/kernels.hpp"
#include "wassfair/rng.hpp"

namespace wassfair {

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

Mlp::Mlp(std::vector<std::size_t> dims) : dims_(std::move(dims)) {
  if (dims_.size() < 2) throw std::invalid_argument("model needs at least one layer");
  if (dims_.back() != 1) throw std::invalid_argument("output dimension must be 1");
  std::size_t total = 0;
  offsets_.resize(layer_count());
  for (std::size_t l = 0; l < layer_count(); ++l) {
    offsets_[l] = total;
    total += dims_[l + 1] * dims_[l] + dims_[l + 1];
  }
  params_.assign(total, 0.0);
}

Mlp Mlp::random(std::size_t input_dim, std::span<const std::size_t> hidden,
                std::uint64_t seed) {
  std::vector<std::size_t> dims;
  dims.push_back(input_dim);
  dims.insert(dims.end(), hidden.begin(), hidden.end());
  dims.push_back(1);
  Mlp m(std::move(dims));
  Rng rng(seed);
  for (std::size_t l = 0; l < m.layer_count(); ++l) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(m.dims_[l]));
    std::span<double> w = m.weights_mut(l);
    for (double& v : w) v = rng.uniform(-bound, bound);
  }
  return m;
}

std::span<const double> Mlp::weights(std::size_t layer) const {
  return {params_.data() + offsets_[layer], dims_[layer + 1] * dims_[layer]};
}

std::span<double> Mlp::weights_mut(std::size_t layer) {
  return {params_.data() + offsets_[layer], dims_[layer + 1] * dims_[layer]};
}

std::span<const double> Mlp::bias(std::size_t layer) const {
  return {params_.data() + offsets_[layer] + dims_[layer + 1] * dims_[layer],
          dims_[layer + 1]};
}

double Mlp::forward(std::span<const double> x, Workspace& ws) const {
  if (x.size() != input_dim()) throw std::invalid_argument("feature dimension mismatch");
  const std::size_t layers = layer_count();
  ws.pre.resize(layers);
  ws.act.resize(layers + 1);
  ws.act[0].assign(x.begin(), x.end());

  for (std::size_t l = 0; l < layers; ++l) {
    const std::size_t in = dims_[l];
    const std::size_t out = dims_[l + 1];
    const double* w = params_.data() + offsets_[l];
    const double* b = w + out * in;
    ws.pre[l].resize(out);
    ws.act[l + 1].resize(out);
    const double* src = ws.act[l].data();
    for (std::size_t r = 0; r < out; ++r) {
      ws.pre[l][r] = kernels::dot(w + r * in, src, in) + b[r];
    }
    if (l + 1 < layers) {
      kernels::relu(ws.pre[l].data(), ws.act[l + 1].data(), out);
    } else {
      ws.act[l + 1][0] = sigmoid(ws.pre[l][0]);
    }
  }
  return ws.act[layers][0];
}

double Mlp::forward(std::span<const double> x) const {
  Workspace ws;
  return forward(x, ws);
}

void Mlp::backward(const Workspace& ws, double upstream, std::span<double> grad) const {
  if (grad.size() != params_.size()) throw std::invalid_argument("gradient size mismatch");
  const std::size_t layers = layer_count();
  const double out = ws.act[layers][0];
  std::vector<double> delta{upstream * out * (1.0 - out)};

  for (std::size_t l = layers; l-- > 0;) {
    const std::size_t in = dims_[l];
    const std::size_t rows = dims_[l + 1];
    double* gw = grad.data() + offsets_[l];
    double* gb = gw + rows * in;
    const double* w = params_.data() + offsets_[l];
    const double* act = ws.act[l].data();

    std::vector<double> dact;
    if (l > 0) dact.assign(in, 0.0);
    for (std::size_t r = 0; r < rows; ++r) {
      const double d = delta[r];
      if (d != 0.0) {
        kernels::axpy(d, act, gw + r * in, in);
        if (l > 0) kernels::axpy(d, w + r * in, dact.data(), in);
      }
      gb[r] += d;
    }
    if (l > 0) {
      // ReLU mask of the previous layer's pre-activations.
      delta.resize(in);
      for (std::size_t k = 0; k < in; ++k) {
        delta[k] = ws.pre[l - 1][k] > 0.0 ? dact[k] : 0.0;
      }
    }
  }
}

std::vector<double> forward_rows(const Mlp& model, const Dataset& ds,
                                 std::span<const std::size_t> rows) {
  std::vector<double> scores(rows.size());
  Mlp::Workspace ws;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    scores[i] = model.forward(ds.samples[rows[i]].features, ws);
  }
  return scores;
}

std::vector<double> forward_all(const Mlp& model, const Dataset& ds) {
  std::vector<double> scores(ds.n());
  Mlp::Workspace ws;
  for (std::size_t i = 0; i < ds.n(); ++i) {
    scores[i] = model.forward(ds.samples[i].features, ws);
  }
  return scores;
}

std::vector<double> loss_grad(std::span<const double> scores, std::span<const int> targets) {
  if (scores.size() != targets.size()) throw std::invalid_argument("length mismatch");
  std::vector<double> g(scores.size());
  const double inv_b = scores.empty() ? 0.0 : 1.0 / static_cast<double>(scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i) {
    g[i] = 2.0 * (scores[i] - targets[i]) * inv_b;
  }
  return g;
}

namespace {

constexpr char kCheckpointMagic[8] = {'W', 'F', 'C', 'K', 'P', 'T', '0', '1'};

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

void put_f64(std::string& out, double v) {
  const std::uint64_t bits = std::bit_cast<std::uint64_t>(v);
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((bits >> (8 * i)) & 0xFF));
}

std::uint32_t get_u32(const unsigned char* p) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(p[i]) << (8 * i);
  return v;
}

double get_f64(const unsigned char* p) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(p[i]) << (8 * i);
  return std::bit_cast<double>(v);
}

}  // namespace

void save_checkpoint(const Mlp& model, const std::string& path) {
  std::string blob;
  blob.append(kCheckpointMagic, sizeof(kCheckpointMagic));
  put_u32(blob, static_cast<std::uint32_t>(model.dims().size()));
  for (std::size_t d : model.dims()) put_u32(blob, static_cast<std::uint32_t>(d));
  for (double v : model.params()) put_f64(blob, v);

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open checkpoint for writing: " + path);
  out.write(blob.data(), static_cast<std::streamsize>(blob.size()));
  if (!out) throw std::runtime_error("checkpoint write failed: " + path);
}

Mlp load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open checkpoint: " + path);
  std::string blob((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  const auto* p = reinterpret_cast<const unsigned char*>(blob.data());
  if (blob.size() < sizeof(kCheckpointMagic) + 4 ||
      std::memcmp(blob.data(), kCheckpointMagic, sizeof(kCheckpointMagic)) != 0) {
    throw std::runtime_error("not a checkpoint file: " + path);
  }
  std::size_t pos = sizeof(kCheckpointMagic);
  const std::uint32_t dim_count = get_u32(p + pos);
  pos += 4;
  if (dim_count < 2 || blob.size() < pos + 4ull * dim_count) {
    throw std::runtime_error("truncated checkpoint: " + path);
  }
  std::vector<std::size_t> dims(dim_count);
  for (std::uint32_t i = 0; i < dim_count; ++i) {
    dims[i] = get_u32(p + pos);
    pos += 4;
  }
  Mlp model(dims);
  if (blob.size() != pos + 8ull * model.param_count()) {
    throw std::runtime_error("truncated checkpoint: " + path);
  }
  for (double& v : model.params()) {
    v = get_f64(p + pos);
    pos += 8;
  }
  return model;
}

LogisticModel LogisticModel::zeros(std::size_t p) {
  LogisticModel m;
  m.theta.assign(p, 0.0);
  return m;
}

double LogisticModel::forward(std::span<const double> x) const {
  if (x.size() != theta.size()) throw std::invalid_argument("feature dimension mismatch");
  return sigmoid(theta0 + kernels::dot(theta.data(), x.data(), x.size()));
}

namespace {

double penalty_distance(std::span<const double> scores, const Dataset& ds,
                        const PenaltySpec& penalty) {
  if (penalty.kind == PenaltyKind::None || penalty.lambda == 0.0) return 0.0;
  std::vector<double> v0, v1;
  v0.reserve(ds.n0);
  v1.reserve(ds.n1);
  for (std::size_t i = 0; i < ds.n(); ++i) {
    double v = scores[i];
    if (penalty.kind == PenaltyKind::ErrorW2) {
      const double r = scores[i] - ds.samples[i].target;
      v = r * r;
    }
    (ds.samples[i].group == 0 ? v0 : v1).push_back(v);
  }
  if (v0.empty() || v1.empty()) throw std::invalid_argument("empty group");
  std::vector<double> all(scores.begin(), scores.end());
  if (penalty.kind == PenaltyKind::ErrorW2) {
    all.clear();
    all.insert(all.end(), v0.begin(), v0.end());
    all.insert(all.end(), v1.begin(), v1.end());
  }
  const ValueGrid grid = make_grid(all, penalty.grid_size);
  const DiscreteCdf c0 = build_cdf(v0, grid);
  const DiscreteCdf c1 = build_cdf(v1, grid);
  return penalty.kind == PenaltyKind::PredictionW1 ? w1_distance(c0, c1)
                                                   : w2_distance(c0, c1);
}

}  // namespace

double logistic_energy(const LogisticModel& model, const Dataset& ds,
                       const PenaltySpec& penalty) {
  if (ds.n() == 0) throw std::invalid_argument("empty dataset");
  std::vector<double> scores(ds.n());
  double nll = 0.0;
  for (std::size_t i = 0; i < ds.n(); ++i) {
    scores[i] = model.forward(ds.samples[i].features);
    const double f = std::clamp(scores[i], 1e-12, 1.0 - 1e-12);
    nll -= ds.samples[i].target == 1 ? std::log(f) : std::log(1.0 - f);
  }
  nll /= static_cast<double>(ds.n());
  return nll + penalty.lambda * penalty_distance(scores, ds, penalty);
}

LogisticModel logistic_fd_step(const LogisticModel& model, const Dataset& ds,
                               const PenaltySpec& penalty, double learning_rate,
                               double fd_step) {
  if (ds.p != model.theta.size()) throw std::invalid_argument("feature dimension mismatch");
  LogisticModel probe = model;
  std::vector<double> grad(model.theta.size() + 1);

  auto central = [&](double* param) {
    const double saved = *param;
    *param = saved + fd_step;
    const double up = logistic_energy(probe, ds, penalty);
    *param = saved - fd_step;
    const double down = logistic_energy(probe, ds, penalty);
    *param = saved;
    return (up - down) / (2.0 * fd_step);
  };

  grad[0] = central(&probe.theta0);
  for (std::size_t k = 0; k < model.theta.size(); ++k) {
    grad[k + 1] = central(&probe.theta[k]);
  }

  LogisticModel next = model;
  next.theta0 -= learning_rate * grad[0];
  for (std::size_t k = 0; k < model.theta.size(); ++k) {
    next.theta[k] -= learning_rate * grad[k + 1];
  }
  return next;
}

}  // namespace wassfair
