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

#include "wassfair/metrics.hpp"

#include <algorithm>
#include <stdexcept>

#include "wassfair/model.hpp"
#include "wassfair/strfmt.hpp"

namespace wassfair {

namespace {

using wassfair::fmt_g17;

std::string fmt(double v) { return fmt_g17(v); }

std::vector<int> targets_of(const Dataset& ds) {
  std::vector<int> t(ds.n());
  for (std::size_t i = 0; i < ds.n(); ++i) t[i] = ds.samples[i].target;
  return t;
}

std::vector<int> groups_of(const Dataset& ds) {
  std::vector<int> g(ds.n());
  for (std::size_t i = 0; i < ds.n(); ++i) g[i] = ds.samples[i].group;
  return g;
}

}  // namespace

double disparate_impact(std::span<const int> preds, std::span<const int> groups) {
  if (preds.size() != groups.size()) throw std::invalid_argument("length mismatch");
  double pos[2] = {0.0, 0.0};
  double count[2] = {0.0, 0.0};
  for (std::size_t i = 0; i < preds.size(); ++i) {
    const int s = groups[i] == 0 ? 0 : 1;
    count[s] += 1.0;
    if (preds[i] == 1) pos[s] += 1.0;
  }
  if (count[0] == 0.0 || count[1] == 0.0) throw std::invalid_argument("empty group");
  const double r0 = pos[0] / count[0];
  const double r1 = pos[1] / count[1];
  const double hi = std::max(r0, r1);
  if (hi == 0.0) return 1.0;  // nobody predicted positive in either group
  return std::min(r0, r1) / hi;
}

std::array<std::array<std::optional<double>, 2>, 2> equalized_odds(
    std::span<const int> preds, std::span<const int> targets,
    std::span<const int> groups) {
  if (preds.size() != targets.size() || preds.size() != groups.size()) {
    throw std::invalid_argument("length mismatch");
  }
  double pos[2][2] = {{0.0, 0.0}, {0.0, 0.0}};
  double count[2][2] = {{0.0, 0.0}, {0.0, 0.0}};
  for (std::size_t i = 0; i < preds.size(); ++i) {
    const int s = groups[i] == 0 ? 0 : 1;
    const int y = targets[i] == 0 ? 0 : 1;
    count[s][y] += 1.0;
    if (preds[i] == 1) pos[s][y] += 1.0;
  }
  std::array<std::array<std::optional<double>, 2>, 2> odds;
  for (int s = 0; s < 2; ++s) {
    for (int y = 0; y < 2; ++y) {
      if (count[s][y] > 0.0) odds[s][y] = pos[s][y] / count[s][y];
    }
  }
  return odds;
}

double dmse_index(std::span<const double> scores, std::span<const int> targets,
                  std::span<const int> groups, bool continuous) {
  if (scores.size() != targets.size() || scores.size() != groups.size()) {
    throw std::invalid_argument("length mismatch");
  }
  double err[2] = {0.0, 0.0};
  double count[2] = {0.0, 0.0};
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const int s = groups[i] == 0 ? 0 : 1;
    const double value = continuous ? scores[i] : static_cast<double>(binarize(scores[i]));
    const double d = value - targets[i];
    err[s] += d * d;
    count[s] += 1.0;
  }
  if (count[0] == 0.0 || count[1] == 0.0) throw std::invalid_argument("empty group");
  const double m0 = err[0] / count[0];
  const double m1 = err[1] / count[1];
  const double hi = std::max(m0, m1);
  if (hi == 0.0) return 1.0;  // both groups error-free
  return std::min(m0, m1) / hi;
}

FairnessReport report_from_scores(std::span<const double> scores,
                                  std::span<const int> targets,
                                  std::span<const int> groups) {
  if (scores.size() != targets.size() || scores.size() != groups.size()) {
    throw std::invalid_argument("length mismatch");
  }
  if (scores.empty()) throw std::invalid_argument("empty sample set");

  std::vector<int> preds(scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i) preds[i] = binarize(scores[i]);

  FairnessReport r;
  double good[2] = {0.0, 0.0};
  double count[2] = {0.0, 0.0};
  double good_total = 0.0;
  double mse_sum = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const int s = groups[i] == 0 ? 0 : 1;
    const double d = scores[i] - targets[i];
    mse_sum += d * d;
    count[s] += 1.0;
    if (preds[i] == targets[i]) {
      good[s] += 1.0;
      good_total += 1.0;
    }
  }
  if (count[0] == 0.0 || count[1] == 0.0) throw std::invalid_argument("empty group");

  r.accuracy = good_total / static_cast<double>(scores.size());
  r.di = disparate_impact(preds, groups);
  r.odds = equalized_odds(preds, targets, groups);
  r.dmse = dmse_index(scores, targets, groups, /*continuous=*/false);
  r.mse = mse_sum / static_cast<double>(scores.size());
  r.gp0 = good[0] / count[0];
  r.gp1 = good[1] / count[1];
  return r;
}

AuditResult audit_scores(std::span<const double> scores, std::span<const int> targets,
                         std::span<const int> groups, double tau0) {
  AuditResult out;
  out.report = report_from_scores(scores, targets, groups);
  out.pass = out.report.di >= tau0;
  return out;
}

AuditResult audit(const Mlp& model, const Dataset& ds, double tau0) {
  return audit_scores(forward_all(model, ds), targets_of(ds), groups_of(ds), tau0);
}

AuditResult audit(const LogisticModel& model, const Dataset& ds, double tau0) {
  std::vector<double> scores(ds.n());
  for (std::size_t i = 0; i < ds.n(); ++i) scores[i] = model.forward(ds.samples[i].features);
  return audit_scores(scores, targets_of(ds), groups_of(ds), tau0);
}

std::string FairnessReport::to_kv() const {
  std::string s;
  s += "accuracy=" + fmt(accuracy) + "\n";
  s += "di=" + fmt(di) + "\n";
  for (int g = 0; g < 2; ++g) {
    for (int y = 0; y < 2; ++y) {
      s += "o_" + std::to_string(g) + "_" + std::to_string(y) + "=";
      s += odds[g][y].has_value() ? fmt(*odds[g][y]) : std::string("undefined");
      s += "\n";
    }
  }
  s += "dmse=" + fmt(dmse) + "\n";
  s += "mse=" + fmt(mse) + "\n";
  s += "gp0=" + fmt(gp0) + "\n";
  s += "gp1=" + fmt(gp1) + "\n";
  return s;
}

std::string FairnessReport::csv_header(const std::string& prefix) {
  std::string s;
  const char* names[] = {"acc", "di",  "o00", "o01", "o10",
                         "o11", "dmse", "mse", "gp0", "gp1"};
  for (std::size_t i = 0; i < 10; ++i) {
    if (i > 0) s += ",";
    s += prefix + names[i];
  }
  return s;
}

std::string FairnessReport::csv_row() const {
  auto cell = [](const std::optional<double>& v) {
    return v.has_value() ? fmt(*v) : std::string("nan");
  };
  std::string s = fmt(accuracy) + "," + fmt(di);
  s += "," + cell(odds[0][0]) + "," + cell(odds[0][1]);
  s += "," + cell(odds[1][0]) + "," + cell(odds[1][1]);
  s += "," + fmt(dmse) + "," + fmt(mse) + "," + fmt(gp0) + "," + fmt(gp1);
  return s;
}

}  // namespace wassfair
