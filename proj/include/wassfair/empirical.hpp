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

#ifndef WASSFAIR_EMPIRICAL_HPP_
#define WASSFAIR_EMPIRICAL_HPP_

#include <cstddef>
#include <span>
#include <vector>

namespace wassfair {

// Regular grid of bin edges over score values. Edges are eta(j) = lo + j*step
// for j in [0, bins]; bin j (1-based) covers [eta(j-1), eta(j)).
struct ValueGrid {
  double lo = 0.0;
  double hi = 1.0;
  int bins = 1;     // J
  double step = 1.0;  // (hi - lo) / J

  double edge(int j) const { return j == bins ? hi : lo + step * j; }
  bool operator==(const ValueGrid& other) const = default;
};

inline constexpr double kDefaultGridPad = 0.01;

// Grid spanning the scores, widened by pad*range on both sides. hi always
// ends up strictly above the max score so the strict "< edge" count reaches 1
// at the top edge. All-equal scores fall back to [0,1] when the common value
// lies in [0,1] (sigmoid outputs), else to value +- 0.5.
// Throws std::invalid_argument("empty score set") on empty input.
ValueGrid make_grid(std::span<const double> scores, int bins, double pad = kDefaultGridPad);

// Empirical CDF of one group's scores tabulated on a grid:
// value[j-1] = (1/n) * #(score < edge(j)) for j = 1..J. level() exposes the
// same table 1-indexed with the implicit level(0) == 0.
struct DiscreteCdf {
  ValueGrid grid;
  std::vector<double> values;  // length grid.bins, nondecreasing, in [0,1]
  std::size_t group_count = 0;  // n_s

  double level(int j) const { return j <= 0 ? 0.0 : values[static_cast<std::size_t>(j) - 1]; }
};

// Throws std::invalid_argument("empty group") on empty input.
DiscreteCdf build_cdf(std::span<const double> scores, const ValueGrid& grid);

struct BinLocation {
  int index;     // j in [1, J] with edge(j-1) <= v < edge(j)
  bool clamped;  // v fell outside [lo, hi) and was clamped to a boundary bin
};

// Bin of v, by binary search over the edges. Out-of-grid values clamp to the
// first/last bin so downstream gradients stay finite.
BinLocation locate_bin(const DiscreteCdf& cdf, double v);

// CDF level at v, linear between the two edges bracketing v.
double interp_level(const DiscreteCdf& cdf, double v);

// Piecewise-linear inverse of the tabulated CDF. tau is clamped to the
// tabulated range [level(1), level(J)]; a tau shared by several bins (flat
// run) resolves to the left edge of the run.
double inverse_cdf(const DiscreteCdf& cdf, double tau);

// Coupling map: the value in `target`'s distribution at the quantile level v
// occupies in `source`, i.e. inverse_cdf(target, interp_level(source, v)).
double cor(const DiscreteCdf& source, const DiscreteCdf& target, double v);

// Squared Wasserstein-2 / Wasserstein-1 distance between two tabulated score
// distributions, by fixed-step quadrature over quantile levels with
// dtau = 1/J (levels sampled at cell midpoints). Symmetric; exactly 0 for
// identical tables. Throws std::invalid_argument("grid mismatch") when the
// grids differ.
double w2_distance(const DiscreteCdf& cdf0, const DiscreteCdf& cdf1);
double w1_distance(const DiscreteCdf& cdf0, const DiscreteCdf& cdf1);

}  // namespace wassfair

#endif  // WASSFAIR_EMPIRICAL_HPP_
