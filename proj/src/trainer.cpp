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

#include "wassfair/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "wassfair/fairgrad.hpp"
#include "wassfair/kernels.hpp"
#include "wassfair/rng.hpp"
#include "wassfair/strfmt.hpp"

namespace wassfair {

AutoLambdaState auto_lambda_update(AutoLambdaState state, const EpochMetrics& metrics) {
  if (metrics.accuracy < state.acc_floor) {
    state.alpha *= 0.9;
  } else if (metrics.fairness < state.di_floor) {
    state.alpha *= 1.1;
  }
  return state;
}

void sgd_step(std::span<double> params, std::span<const double> grads, double step) {
  kernels::axpy(-step, grads.data(), params.data(), params.size());
}

AdamState AdamState::init(const OptimizerConfig& cfg, std::size_t param_count) {
  AdamState s;
  s.step = cfg.step;
  s.beta1 = cfg.beta1;
  s.beta2 = cfg.beta2;
  s.eps = cfg.eps;
  s.m.assign(param_count, 0.0);
  s.v.assign(param_count, 0.0);
  return s;
}

void adam_step(std::span<double> params, std::span<const double> grads, AdamState& state) {
  if (params.size() != state.m.size() || params.size() != grads.size()) {
    throw std::invalid_argument("optimizer state size mismatch");
  }
  ++state.t;
  const double c1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.t));
  const double c2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.t));
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double g = grads[i];
    state.m[i] = state.beta1 * state.m[i] + (1.0 - state.beta1) * g;
    state.v[i] = state.beta2 * state.v[i] + (1.0 - state.beta2) * g * g;
    const double mhat = state.m[i] / c1;
    const double vhat = state.v[i] / c2;
    params[i] -= state.step * mhat / (std::sqrt(vhat) + state.eps);
  }
}

std::string RunHistory::csv() const {
  std::string s = "epoch,lambda,alpha,train_loss,penalty_value,";
  s += FairnessReport::csv_header("train_") + "," + FairnessReport::csv_header("eval_");
  s += "\n";
  for (const EpochRecord& r : epochs) {
    s += std::to_string(r.epoch) + "," + fmt_g17(r.lambda) + "," + fmt_g17(r.alpha) + ",";
    s += fmt_g17(r.train_loss) + "," + fmt_g17(r.penalty_value) + ",";
    s += r.train_report.csv_row() + ",";
    if (r.eval_report.has_value()) {
      s += r.eval_report->csv_row();
    } else {
      s += "nan,nan,nan,nan,nan,nan,nan,nan,nan,nan";
    }
    s += "\n";
  }
  return s;
}

namespace {

void check_finite(std::span<const double> values, const char* term, int epoch, int batch) {
  for (double v : values) {
    if (std::isnan(v)) {
      throw std::runtime_error("NaN in " + std::string(term) + " at epoch " +
                               std::to_string(epoch) + " batch " + std::to_string(batch));
    }
  }
}

struct Optimizer {
  OptimizerConfig cfg;
  AdamState adam;

  Optimizer(const OptimizerConfig& c, std::size_t param_count) : cfg(c) {
    if (cfg.kind == OptimizerKind::Adam) adam = AdamState::init(cfg, param_count);
  }

  void step(std::span<double> params, std::span<const double> grads) {
    if (cfg.kind == OptimizerKind::Sgd) {
      sgd_step(params, grads, cfg.step);
    } else {
      adam_step(params, grads, adam);
    }
  }
};

// Values entering the penalty CDFs: raw scores for the prediction penalties,
// squared errors for the error penalty.
double penalty_value_of(PenaltyKind kind, double score, int target) {
  if (kind == PenaltyKind::ErrorW2) {
    const double r = score - target;
    return r * r;
  }
  return score;
}

struct ContextBuilder {
  const Dataset& ds;
  const PenaltySpec& spec;
  const Mlp& model;
  std::uint64_t* rebuilds;

  // Rows backing the CDFs for one batch. Uniform over all rows; on the rare
  // draw that misses a group entirely, redraw.
  std::vector<std::size_t> draw_rows(Rng& rng) const {
    const std::size_t cap = static_cast<std::size_t>(spec.subsample_cap);
    if (ds.n() <= cap) {
      std::vector<std::size_t> all(ds.n());
      for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
      return all;
    }
    for (int attempt = 0; attempt < 8; ++attempt) {
      std::vector<std::size_t> rows = rng.sample_without_replacement(ds.n(), cap);
      bool has0 = false, has1 = false;
      for (std::size_t r : rows) {
        (ds.samples[r].group == 0 ? has0 : has1) = true;
        if (has0 && has1) break;
      }
      if (has0 && has1) return rows;
    }
    std::vector<std::size_t> all(ds.n());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    return all;
  }

  PenaltyContext build(std::span<const std::size_t> rows, int batch_size) const {
    std::vector<double> v0, v1;
    v0.reserve(rows.size());
    v1.reserve(rows.size());
    Mlp::Workspace ws;
    for (std::size_t r : rows) {
      const Sample& s = ds.samples[r];
      const double f = model.forward(s.features, ws);
      (s.group == 0 ? v0 : v1).push_back(penalty_value_of(spec.kind, f, s.target));
    }
    ++*rebuilds;
    return make_penalty_context(v0, v1, spec.grid_size, batch_size);
  }
};

FairnessReport report_on(const Mlp& model, const Dataset& ds) {
  return audit(model, ds).report;
}

// Distance reported in the history: the active penalty's measure on the full
// split (prediction-space W2 when no penalty is active).
double penalty_distance_on(const Mlp& model, const Dataset& ds, const PenaltySpec& spec) {
  std::vector<double> v0, v1;
  v0.reserve(ds.n0);
  v1.reserve(ds.n1);
  Mlp::Workspace ws;
  for (const Sample& s : ds.samples) {
    const double f = model.forward(s.features, ws);
    (s.group == 0 ? v0 : v1).push_back(penalty_value_of(spec.kind, f, s.target));
  }
  std::vector<double> all;
  all.reserve(v0.size() + v1.size());
  all.insert(all.end(), v0.begin(), v0.end());
  all.insert(all.end(), v1.begin(), v1.end());
  const ValueGrid grid = make_grid(all, spec.grid_size);
  const DiscreteCdf c0 = build_cdf(v0, grid);
  const DiscreteCdf c1 = build_cdf(v1, grid);
  return spec.kind == PenaltyKind::PredictionW1 ? w1_distance(c0, c1) : w2_distance(c0, c1);
}

}  // namespace

RunHistory train(const Dataset& train_set, const TrainConfig& cfg, Mlp& model,
                 const Dataset* eval_set, const EpochCallback& on_epoch) {
  const std::size_t n = train_set.n();
  if (n == 0) throw std::invalid_argument("empty dataset");
  if (train_set.n0 == 0 || train_set.n1 == 0) {
    throw std::invalid_argument("single-group dataset");
  }
  if (cfg.batch_size <= 0 || static_cast<std::size_t>(cfg.batch_size) > n) {
    throw std::invalid_argument("batch size must be in [1, n]");
  }
  if (cfg.epochs < 0) throw std::invalid_argument("negative epoch count");
  const PenaltySpec& pen = cfg.penalty;
  if (pen.lambda < 0.0) throw std::invalid_argument("negative penalty weight");
  if (pen.kind != PenaltyKind::None) {
    if (pen.grid_size < 2) throw std::invalid_argument("grid_size must be >= 2");
    if (pen.subsample_cap < pen.grid_size) {
      throw std::invalid_argument("subsample_cap must be >= grid_size");
    }
  }
  if (model.input_dim() != train_set.p) {
    throw std::invalid_argument("model input dimension does not match dataset");
  }

  const bool penalty_active = pen.kind != PenaltyKind::None;
  const bool auto_tune = penalty_active && pen.auto_tune;

  Rng rng(cfg.seed);
  Optimizer opt(cfg.optimizer, model.param_count());
  RunHistory history;
  ContextBuilder ctx_builder{train_set, pen, model, &history.cdf_rebuilds};

  AutoLambdaState als;
  als.alpha = cfg.alpha0;
  als.warm_epochs = cfg.warm_epochs;
  als.acc_floor = cfg.acc_floor;
  als.di_floor = cfg.di_floor;

  double lambda = auto_tune ? 0.0 : pen.lambda;
  double warm_loss_sum = 0.0, warm_pen_sum = 0.0;
  std::uint64_t warm_count = 0;
  EpochMetrics prev_metrics;

  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;

  std::vector<double> grads(model.param_count());
  std::vector<Mlp::Workspace> batch_ws;

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    if (auto_tune && epoch >= als.warm_epochs) {
      if (epoch == als.warm_epochs) {
        als.d_r = warm_count > 0 ? warm_loss_sum / static_cast<double>(warm_count) : 0.0;
        als.d_w2 = warm_count > 0 ? warm_pen_sum / static_cast<double>(warm_count) : 0.0;
      } else {
        // First regularized epoch runs on the initial alpha; later epochs
        // adapt it from the previous epoch's train metrics.
        als = auto_lambda_update(als, prev_metrics);
      }
      lambda = als.d_w2 > 0.0 ? als.alpha * als.d_r / als.d_w2 : 0.0;
    }

    rng.shuffle(order);
    std::vector<std::size_t> epoch_ctx_rows;
    if (penalty_active && pen.subsample_per_epoch) {
      epoch_ctx_rows = ctx_builder.draw_rows(rng);
    }

    double epoch_loss_sum = 0.0;
    int batch_count = 0;
    const int warming = auto_tune && epoch < als.warm_epochs;

    for (std::size_t start = 0; start < n; start += cfg.batch_size) {
      const std::size_t stop = std::min(n, start + cfg.batch_size);
      const std::size_t bsize = stop - start;
      const int batch_index = batch_count;

      PenaltyContext ctx;
      if (penalty_active) {
        if (pen.subsample_per_epoch) {
          ctx = ctx_builder.build(epoch_ctx_rows, static_cast<int>(bsize));
        } else {
          const std::vector<std::size_t> rows = ctx_builder.draw_rows(rng);
          ctx = ctx_builder.build(rows, static_cast<int>(bsize));
        }
      }

      batch_ws.resize(bsize);
      std::vector<double> scores(bsize);
      std::vector<int> targets(bsize);
      for (std::size_t i = 0; i < bsize; ++i) {
        const Sample& s = train_set.samples[order[start + i]];
        scores[i] = model.forward(s.features, batch_ws[i]);
        targets[i] = s.target;
      }

      const std::vector<double> loss_g = loss_grad(scores, targets);
      check_finite(loss_g, "loss gradient", epoch, batch_index);

      std::vector<double> pen_g;
      if (penalty_active) {
        if (pen.kind == PenaltyKind::ErrorW2) {
          std::vector<ScoredLabeledSample> batch(bsize);
          for (std::size_t i = 0; i < bsize; ++i) {
            const Sample& s = train_set.samples[order[start + i]];
            batch[i] = {scores[i], s.target, s.group};
          }
          pen_g = grad_w2_error(ctx, batch);
        } else {
          std::vector<ScoredSample> batch(bsize);
          for (std::size_t i = 0; i < bsize; ++i) {
            batch[i] = {scores[i], train_set.samples[order[start + i]].group};
          }
          pen_g = pen.kind == PenaltyKind::PredictionW1 ? grad_w1_prediction(ctx, batch)
                                                        : grad_w2_prediction(ctx, batch);
        }
        check_finite(pen_g, "penalty gradient", epoch, batch_index);
        if (warming) {
          for (std::size_t i = 0; i < bsize; ++i) {
            warm_loss_sum += std::fabs(loss_g[i]);
            warm_pen_sum += std::fabs(pen_g[i]);
          }
          warm_count += bsize;
        }
      }

      std::fill(grads.begin(), grads.end(), 0.0);
      for (std::size_t i = 0; i < bsize; ++i) {
        double upstream = loss_g[i];
        if (penalty_active && lambda != 0.0) upstream += lambda * pen_g[i];
        model.backward(batch_ws[i], upstream, grads);
      }
      check_finite(grads, "parameter gradient", epoch, batch_index);
      opt.step(model.params(), grads);

      double batch_loss = 0.0;
      for (std::size_t i = 0; i < bsize; ++i) {
        const double d = scores[i] - targets[i];
        batch_loss += d * d;
      }
      epoch_loss_sum += batch_loss / static_cast<double>(bsize);
      ++batch_count;
    }

    EpochRecord rec;
    rec.epoch = epoch;
    rec.lambda = lambda;
    rec.alpha = als.alpha;
    rec.train_loss = batch_count > 0 ? epoch_loss_sum / batch_count : 0.0;
    rec.penalty_value = penalty_distance_on(model, train_set, pen);
    rec.train_report = report_on(model, train_set);
    if (eval_set != nullptr) rec.eval_report = report_on(model, *eval_set);
    if (on_epoch) on_epoch(rec);
    history.epochs.push_back(std::move(rec));

    prev_metrics.accuracy = history.epochs.back().train_report.accuracy;
    prev_metrics.fairness = pen.kind == PenaltyKind::ErrorW2
                                ? history.epochs.back().train_report.dmse
                                : history.epochs.back().train_report.di;
  }

  return history;
}

}  // namespace wassfair
