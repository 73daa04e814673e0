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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <vector>

#include "testutil.hpp"
#include "wassfair/empirical.hpp"
#include "wassfair/model.hpp"
#include "wassfair/rng.hpp"

using namespace wassfair;

namespace {

// Straight-line re-evaluation of the net, no shared code with Mlp::forward.
double reference_forward(const Mlp& m, const std::vector<double>& x) {
  std::vector<double> cur = x;
  for (std::size_t l = 0; l < m.layer_count(); ++l) {
    const std::size_t in = m.dims()[l];
    const std::size_t out = m.dims()[l + 1];
    const auto w = m.weights(l);
    const auto b = m.bias(l);
    std::vector<double> next(out);
    for (std::size_t r = 0; r < out; ++r) {
      double z = b[r];
      for (std::size_t c = 0; c < in; ++c) z += w[r * in + c] * cur[c];
      next[r] = l + 1 < m.layer_count() ? std::max(z, 0.0) : 1.0 / (1.0 + std::exp(-z));
    }
    cur = std::move(next);
  }
  return cur[0];
}

std::vector<double> random_input(std::size_t p, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> x(p);
  for (double& v : x) v = rng.normal();
  return x;
}

}  // namespace

TEST_CASE("zero parameters score one half") {
  Mlp m(std::vector<std::size_t>{3, 4, 1});
  const std::vector<double> x = {0.3, -1.0, 2.0};
  CHECK(m.forward(x) == doctest::Approx(0.5));
}

TEST_CASE("single linear layer matches the closed form") {
  Mlp m(std::vector<std::size_t>{2, 1});
  m.params()[0] = 0.8;   // w0
  m.params()[1] = -0.4;  // w1
  m.params()[2] = 0.1;   // b
  const std::vector<double> x = {1.5, 2.0};
  const double z = 0.8 * 1.5 - 0.4 * 2.0 + 0.1;
  CHECK(m.forward(x) == doctest::Approx(1.0 / (1.0 + std::exp(-z))));
}

TEST_CASE("forward matches an independent re-evaluation") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const std::vector<std::size_t> hidden = {7, 5};
    const Mlp m = Mlp::random(6, hidden, 100 + seed);
    const auto x = random_input(6, 200 + seed);
    CHECK(std::fabs(m.forward(x) - reference_forward(m, x)) < 1e-12);
  }
}

TEST_CASE("forward rejects wrong input dimension") {
  const Mlp m = Mlp::random(4, std::vector<std::size_t>{3}, 1);
  CHECK_THROWS(m.forward(std::vector<double>{1.0, 2.0}));
}

TEST_CASE("loss_grad closed form and finite differences") {
  const std::vector<double> f = {0.9};
  const std::vector<int> y = {0};
  CHECK(loss_grad(f, y)[0] == doctest::Approx(1.8));

  const std::vector<int> equal_y = {1};
  const std::vector<double> equal_f = {1.0};
  CHECK(loss_grad(equal_f, equal_y)[0] == 0.0);

  // FD of the batch-mean square loss.
  Rng rng(9);
  std::vector<double> scores(32);
  std::vector<int> targets(32);
  for (std::size_t i = 0; i < scores.size(); ++i) {
    scores[i] = rng.uniform();
    targets[i] = rng.bernoulli(0.5) ? 1 : 0;
  }
  const auto g = loss_grad(scores, targets);
  auto mean_loss = [&](const std::vector<double>& f_vec) {
    double acc = 0.0;
    for (std::size_t i = 0; i < f_vec.size(); ++i) {
      acc += (f_vec[i] - targets[i]) * (f_vec[i] - targets[i]);
    }
    return acc / static_cast<double>(f_vec.size());
  };
  const double h = 1e-5;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    auto up = scores, down = scores;
    up[i] += h;
    down[i] -= h;
    const double fd = (mean_loss(up) - mean_loss(down)) / (2.0 * h);
    CHECK(std::fabs(g[i] - fd) < 1e-6);
  }
}

TEST_CASE("backward: zero upstream gives zero gradients") {
  const Mlp m = Mlp::random(5, std::vector<std::size_t>{4}, 3);
  Mlp::Workspace ws;
  m.forward(random_input(5, 77), ws);
  std::vector<double> grad(m.param_count(), 0.0);
  m.backward(ws, 0.0, grad);
  for (double g : grad) CHECK(g == 0.0);
}

TEST_CASE("backward: one-layer chain rule by hand") {
  Mlp m(std::vector<std::size_t>{1, 1});
  m.params()[0] = 0.7;  // w
  m.params()[1] = 0.2;  // b
  const std::vector<double> x = {1.3};
  Mlp::Workspace ws;
  const double f = m.forward(x, ws);
  std::vector<double> grad(2, 0.0);
  m.backward(ws, 1.0, grad);
  const double sig_prime = f * (1.0 - f);
  CHECK(grad[0] == doctest::Approx(sig_prime * 1.3));
  CHECK(grad[1] == doctest::Approx(sig_prime));
}

TEST_CASE("backward matches parameter-space finite differences") {
  Rng cfg_rng(5150);
  std::size_t total_checked = 0, total_skipped = 0;
  for (int net = 0; net < 50; ++net) {
    const std::size_t p = 2 + cfg_rng.below(5);
    std::vector<std::size_t> hidden;
    const std::size_t depth = cfg_rng.below(4);  // up to 3 hidden layers
    for (std::size_t l = 0; l < depth; ++l) hidden.push_back(2 + cfg_rng.below(31));
    Mlp m = Mlp::random(p, hidden, 9000 + net);

    const std::size_t batch = 1 + cfg_rng.below(6);
    std::vector<std::vector<double>> xs;
    std::vector<double> upstream;
    for (std::size_t i = 0; i < batch; ++i) {
      xs.push_back(random_input(p, 500 * net + i));
      upstream.push_back(cfg_rng.uniform(-1.0, 1.0));
    }

    std::vector<double> grad(m.param_count(), 0.0);
    Mlp::Workspace ws;
    for (std::size_t i = 0; i < batch; ++i) {
      m.forward(xs[i], ws);
      m.backward(ws, upstream[i], grad);
    }

    // Objective plus the sign pattern of every hidden pre-activation; a sign
    // flip between the two probe points means the perturbation stepped across
    // a ReLU kink, where a finite difference does not estimate the one-sided
    // derivative backprop computes.
    std::vector<int> signs;
    auto objective = [&]() {
      double acc = 0.0;
      signs.clear();
      Mlp::Workspace probe_ws;
      for (std::size_t i = 0; i < batch; ++i) {
        acc += upstream[i] * m.forward(xs[i], probe_ws);
        for (std::size_t l = 0; l + 1 < m.layer_count() + 0u; ++l) {
          for (double z : probe_ws.pre[l]) signs.push_back(z > 0.0);
        }
      }
      return acc;
    };
    const double h = 1e-5;
    std::size_t checked = 0, skipped = 0;
    // Spot-check a third of the parameters per net; still thousands overall.
    for (std::size_t k = 0; k < m.param_count(); k += 3) {
      const double saved = m.params()[k];
      m.params()[k] = saved + h;
      const double up = objective();
      const std::vector<int> up_signs = signs;
      m.params()[k] = saved - h;
      const double down = objective();
      m.params()[k] = saved;
      if (signs != up_signs) {
        ++skipped;
        continue;
      }
      ++checked;
      const double fd = (up - down) / (2.0 * h);
      CHECK(std::fabs(fd - grad[k]) <= 1e-4 * (1.0 + std::fabs(grad[k])));
    }
    CHECK(checked > 0);
    total_checked += checked;
    total_skipped += skipped;
  }
  // Kink crossings must stay a rare exception, not the rule.
  CHECK(total_skipped * 10 <= total_checked);
}

TEST_CASE("checkpoint round-trips exactly") {
  const Mlp m = Mlp::random(9, std::vector<std::size_t>{6, 3}, 321);
  const std::string path =
      (std::filesystem::temp_directory_path() / "wassfair_ckpt_test.bin").string();
  save_checkpoint(m, path);
  const Mlp back = load_checkpoint(path);
  CHECK(back.dims() == m.dims());
  REQUIRE(back.param_count() == m.param_count());
  for (std::size_t i = 0; i < m.param_count(); ++i) {
    CHECK(back.params()[i] == m.params()[i]);
  }
  std::filesystem::remove(path);
}

TEST_CASE("loading garbage fails cleanly") {
  const std::string path =
      (std::filesystem::temp_directory_path() / "wassfair_bad_ckpt.bin").string();
  FILE* f = std::fopen(path.c_str(), "wb");
  std::fputs("not a checkpoint", f);
  std::fclose(f);
  CHECK_THROWS(load_checkpoint(path));
  std::filesystem::remove(path);
  CHECK_THROWS(load_checkpoint("/nonexistent/path/x.bin"));
}

TEST_CASE("zero-initialized logistic model scores one half") {
  const LogisticModel m = LogisticModel::zeros(3);
  CHECK(m.forward(std::vector<double>{1.0, -2.0, 0.5}) == 0.5);
}

TEST_CASE("logistic descent reduces the unpenalized loss on separable data") {
  // 1-D separable: y = 1 iff x > 0, margin 0.2.
  Rng rng(246);
  std::vector<Sample> rows;
  for (int i = 0; i < 400; ++i) {
    const int y = rng.bernoulli(0.5) ? 1 : 0;
    const double x = (y == 1 ? 1.0 : -1.0) * rng.uniform(0.2, 1.2);
    rows.push_back({{x}, y, rng.bernoulli(0.5) ? 1 : 0});
  }
  const Dataset ds = Dataset::from_samples(std::move(rows));

  PenaltySpec none;
  LogisticModel m = LogisticModel::zeros(1);
  double prev = logistic_energy(m, ds, none);
  CHECK(prev == doctest::Approx(-std::log(0.5)));  // all scores 0.5 initially
  int monotone = 0;
  for (int it = 0; it < 40; ++it) {
    m = logistic_fd_step(m, ds, none, 0.5);
    const double cur = logistic_energy(m, ds, none);
    monotone += cur <= prev + 1e-12;
    prev = cur;
  }
  CHECK(monotone == 40);
  CHECK(m.theta[0] > 0.0);  // boundary oriented with the separator
}

TEST_CASE("strong penalty weight pulls the group distance down") {
  // Group-separable scores: feature 1 drives the score apart by group.
  Rng rng(135);
  std::vector<Sample> rows;
  for (int i = 0; i < 300; ++i) {
    const int y = rng.bernoulli(0.5) ? 1 : 0;
    const int s = rng.bernoulli(0.5) ? 1 : 0;
    const double x0 = (y == 1 ? 0.8 : -0.8) + 0.3 * rng.normal();
    const double x1 = (s == 1 ? 1.0 : -1.0) + 0.3 * rng.normal();
    rows.push_back({{x0, x1}, y, s});
  }
  const Dataset ds = Dataset::from_samples(std::move(rows));

  PenaltySpec pen;
  pen.kind = PenaltyKind::PredictionW2;
  pen.lambda = 0.0;
  LogisticModel m = LogisticModel::zeros(2);
  // Bias the model toward using the group-aligned feature.
  m.theta = {0.5, 1.5};

  auto distance = [&](const LogisticModel& model) {
    std::vector<double> v0, v1;
    for (const Sample& s : ds.samples) {
      (s.group == 0 ? v0 : v1).push_back(model.forward(s.features));
    }
    std::vector<double> all = v0;
    all.insert(all.end(), v1.begin(), v1.end());
    const ValueGrid g = make_grid(all, 100);
    return w2_distance(build_cdf(v0, g), build_cdf(v1, g));
  };

  const double before = distance(m);
  pen.lambda = 50.0;
  for (int it = 0; it < 50; ++it) m = logistic_fd_step(m, ds, pen, 0.5);
  CHECK(distance(m) < before);
}
