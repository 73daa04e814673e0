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

#include "wassfair/dataset.hpp"

#include <string>

namespace wassfair {

Dataset Dataset::from_samples(std::vector<Sample> rows) {
  Dataset ds;
  ds.samples = std::move(rows);
  ds.p = ds.samples.empty() ? 0 : ds.samples.front().features.size();
  for (const Sample& s : ds.samples) {
    if (s.group == 0) {
      ++ds.n0;
    } else {
      ++ds.n1;
    }
  }
  return ds;
}

std::vector<std::size_t> Dataset::group_rows(int group) const {
  std::vector<std::size_t> rows;
  rows.reserve(group == 0 ? n0 : n1);
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if ((samples[i].group == 0) == (group == 0)) rows.push_back(i);
  }
  return rows;
}

std::vector<Violation> validate(const Dataset& ds) {
  std::vector<Violation> out;
  for (std::size_t i = 0; i < ds.samples.size(); ++i) {
    const Sample& s = ds.samples[i];
    if (s.target != 0 && s.target != 1) {
      out.push_back({i, "target must be 0 or 1, got " + std::to_string(s.target)});
    }
    if (s.group != 0 && s.group != 1) {
      out.push_back({i, "group must be 0 or 1, got " + std::to_string(s.group)});
    }
    if (s.features.size() != ds.p) {
      out.push_back({i, "feature length " + std::to_string(s.features.size()) +
                            " does not match dataset dimension " + std::to_string(ds.p)});
    }
  }
  return out;
}

}  // namespace wassfair
