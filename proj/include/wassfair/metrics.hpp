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

#ifndef WASSFAIR_METRICS_HPP_
#define WASSFAIR_METRICS_HPP_

#include <array>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace wassfair {

// Scores binarize at a fixed 0.5 everywhere so disparate-impact and odds
// numbers stay comparable across runs.
inline constexpr double kDecisionThreshold = 0.5;

inline int binarize(double score) { return score > kDecisionThreshold ? 1 : 0; }

// Conventional disparate-impact acceptability threshold.
inline constexpr double kDefaultDiThreshold = 0.8;

// Full audit of one model's scores on one labeled, grouped sample set.
// odds[s][y] is the empirical P(pred=1 | group=s, target=y); a cell with no
// members is reported as absent rather than 0.
struct FairnessReport {
  double accuracy = 0.0;
  double di = 0.0;
  std::array<std::array<std::optional<double>, 2>, 2> odds;
  double dmse = 0.0;  // min/max ratio of group MSEs on binarized predictions
  double mse = 0.0;   // mean squared error of the raw scores
  double gp0 = 0.0;   // portion of good predictions in group 0
  double gp1 = 0.0;

  // One metric per line, "name=value"; absent odds cells print "undefined".
  std::string to_kv() const;
  static std::string csv_header(const std::string& prefix);
  std::string csv_row() const;  // absent odds cells print "nan"
};

// min over groups of the positive-prediction rate divided by the max.
// Returns 1 when neither group predicts positive. Throws
// std::invalid_argument("empty group") when a group has no members.
double disparate_impact(std::span<const int> preds, std::span<const int> groups);

// The four empirical probabilities P(pred=1 | group=s, target=y), indexed
// [s][y]; empty cells come back absent.
std::array<std::array<std::optional<double>, 2>, 2> equalized_odds(
    std::span<const int> preds, std::span<const int> targets, std::span<const int> groups);

// min/max ratio of the two group mean squared errors. With continuous=false
// the scores are binarized first; with continuous=true the raw scores enter.
// Both group errors zero -> 1; exactly one zero -> 0.
double dmse_index(std::span<const double> scores, std::span<const int> targets,
                  std::span<const int> groups, bool continuous);

FairnessReport report_from_scores(std::span<const double> scores,
                                  std::span<const int> targets,
                                  std::span<const int> groups);

struct AuditResult {
  FairnessReport report;
  bool pass = false;  // di >= tau0
};

AuditResult audit_scores(std::span<const double> scores, std::span<const int> targets,
                         std::span<const int> groups, double tau0 = kDefaultDiThreshold);

class Mlp;
struct LogisticModel;
struct Dataset;

AuditResult audit(const Mlp& model, const Dataset& ds, double tau0 = kDefaultDiThreshold);
AuditResult audit(const LogisticModel& model, const Dataset& ds,
                  double tau0 = kDefaultDiThreshold);

}  // namespace wassfair

#endif  // WASSFAIR_METRICS_HPP_
