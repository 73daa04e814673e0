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

#include "wassfair/empirical.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "wassfair/kernels.hpp"

namespace wassfair {

ValueGrid make_grid(std::span<const double> scores, int bins, double pad) {
  if (scores.empty()) throw std::invalid_argument("empty score set");
  if (bins < 2) throw std::invalid_argument("grid needs at least 2 bins");
  const auto [min_it, max_it] = std::minmax_element(scores.begin(), scores.end());
  const double min = *min_it;
  const double max = *max_it;

  ValueGrid g;
  g.bins = bins;
  if (min == max) {
    // Degenerate spread: use [0,1] for sigmoid-like values, else a unit
    // window around the common value.
    if (min >= 0.0 && max <= 1.0) {
      g.lo = 0.0;
      g.hi = 1.0;
    } else {
      g.lo = min - 0.5;
      g.hi = min + 0.5;
    }
  } else {
    const double range = max - min;
    g.lo = min - pad * range;
    g.hi = max + pad * range;
  }
  // The CDF counts with strict "< edge"; nudge hi so the max score is
  // captured by the top edge even with pad = 0.
  if (g.hi <= max) {
    const double scale = std::max({std::fabs(g.hi), std::fabs(g.lo), 1.0});
    g.hi = max + 16.0 * std::numeric_limits<double>::epsilon() * scale;
  }
  g.step = (g.hi - g.lo) / bins;
  return g;
}

DiscreteCdf build_cdf(std::span<const double> scores, const ValueGrid& grid) {
  if (scores.empty()) throw std::invalid_argument("empty group");
  std::vector<double> sorted(scores.begin(), scores.end());
  std::sort(sorted.begin(), sorted.end());

  DiscreteCdf cdf;
  cdf.grid = grid;
  cdf.group_count = scores.size();
  cdf.values.resize(static_cast<std::size_t>(grid.bins));
  const double inv_n = 1.0 / static_cast<double>(scores.size());
  for (int j = 1; j <= grid.bins; ++j) {
    const auto below =
        std::lower_bound(sorted.begin(), sorted.end(), grid.edge(j)) - sorted.begin();
    cdf.values[static_cast<std::size_t>(j) - 1] = static_cast<double>(below) * inv_n;
  }
  return cdf;
}

BinLocation locate_bin(const DiscreteCdf& cdf, double v) {
  const ValueGrid& g = cdf.grid;
  if (v < g.lo) return {1, true};
  if (v >= g.hi) return {g.bins, true};
  // Smallest j in [1, J] with v < edge(j).
  int lo = 1, hi = g.bins;
  while (lo < hi) {
    const int mid = lo + (hi - lo) / 2;
    if (v < g.edge(mid)) {
      hi = mid;
    } else {
      lo = mid + 1;
    }
  }
  return {lo, false};
}

double interp_level(const DiscreteCdf& cdf, double v) {
  const auto [j, clamped] = locate_bin(cdf, v);
  if (clamped) return v < cdf.grid.lo ? 0.0 : cdf.level(cdf.grid.bins);
  double t = (v - cdf.grid.edge(j - 1)) / cdf.grid.step;
  t = std::clamp(t, 0.0, 1.0);
  return (1.0 - t) * cdf.level(j - 1) + t * cdf.level(j);
}

double inverse_cdf(const DiscreteCdf& cdf, double tau) {
  const int bins = cdf.grid.bins;
  const double tau_c = std::clamp(tau, cdf.level(1), cdf.level(bins));
  // First j in [1, J] with level(j) >= tau; picking the first index makes a
  // flat run resolve to its left edge.
  const auto it = std::lower_bound(cdf.values.begin(), cdf.values.end(), tau_c);
  const int j = static_cast<int>(it - cdf.values.begin()) + 1;
  const double lo_level = cdf.level(j - 1);
  const double hi_level = cdf.level(j);
  const double denom = hi_level - lo_level;
  if (denom <= 0.0) return cdf.grid.edge(j - 1);
  const double t = (tau_c - lo_level) / denom;
  return cdf.grid.edge(j - 1) + t * cdf.grid.step;
}

double cor(const DiscreteCdf& source, const DiscreteCdf& target, double v) {
  return inverse_cdf(target, interp_level(source, v));
}

namespace {

void check_same_grid(const DiscreteCdf& a, const DiscreteCdf& b) {
  if (!(a.grid == b.grid)) throw std::invalid_argument("grid mismatch");
}

// Quantiles of both tables at the midpoint levels tau_k = (k - 1/2)/J,
// k = 1..J, written into q0/q1.
void tabulate_quantiles(const DiscreteCdf& cdf0, const DiscreteCdf& cdf1,
                        std::vector<double>& q0, std::vector<double>& q1) {
  const int bins = cdf0.grid.bins;
  q0.resize(static_cast<std::size_t>(bins));
  q1.resize(static_cast<std::size_t>(bins));
  const double dtau = 1.0 / bins;
  for (int k = 1; k <= bins; ++k) {
    const double tau = (k - 0.5) * dtau;
    q0[static_cast<std::size_t>(k) - 1] = inverse_cdf(cdf0, tau);
    q1[static_cast<std::size_t>(k) - 1] = inverse_cdf(cdf1, tau);
  }
}

}  // namespace

double w2_distance(const DiscreteCdf& cdf0, const DiscreteCdf& cdf1) {
  check_same_grid(cdf0, cdf1);
  std::vector<double> q0, q1;
  tabulate_quantiles(cdf0, cdf1, q0, q1);
  return kernels::sq_diff_sum(q0.data(), q1.data(), q0.size()) / cdf0.grid.bins;
}

double w1_distance(const DiscreteCdf& cdf0, const DiscreteCdf& cdf1) {
  check_same_grid(cdf0, cdf1);
  std::vector<double> q0, q1;
  tabulate_quantiles(cdf0, cdf1, q0, q1);
  return kernels::abs_diff_sum(q0.data(), q1.data(), q0.size()) / cdf0.grid.bins;
}

}  // namespace wassfair
