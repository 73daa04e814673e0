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

#ifndef WASSFAIR_DATAGEN_HPP_
#define WASSFAIR_DATAGEN_HPP_

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "wassfair/dataset.hpp"
#include "wassfair/model.hpp"

namespace wassfair {

enum class ColumnRole { Feature, Target, Sensitive, Ignore };
enum class ColumnEncoding { Numeric, OneHot };

struct ColumnSpec {
  std::string name;
  ColumnRole role = ColumnRole::Feature;
  ColumnEncoding encoding = ColumnEncoding::Numeric;
  // For non-numeric target/sensitive columns: the level mapped to 1.
  std::string positive_level;
};

using Schema = std::vector<ColumnSpec>;

// Schema text format, one column per line:
//   name,feature,numeric
//   name,feature,onehot
//   name,ignore
//   name,target,positive=<level>     (or `numeric` for 0/1 columns)
//   name,sensitive,positive=<level>
// '#' starts a comment. Exactly one target and one sensitive column.
Schema parse_schema(const std::string& text);
Schema load_schema_file(const std::string& path);

// Bundled preset for the census income table (target: income>50K,
// sensitive: gender).
Schema adult_schema();

struct LoadedSplit {
  Dataset train;
  Dataset test;
  std::vector<std::string> feature_names;  // after one-hot expansion
  std::size_t rows_dropped = 0;            // rows with missing ("?") fields
};

// CSV with a header row. Categorical feature columns are one-hot expanded
// (levels collected over the whole file, sorted); every feature column is
// standardized with moments fit on the train split and applied to both
// splits. The split is a seeded shuffle taking floor(train_fraction * n)
// rows for training.
LoadedSplit load_csv(const std::string& path, const Schema& schema,
                     double train_fraction, std::uint64_t seed);

// Numeric passthrough: no one-hot, no standardization, no split. For
// synthetic pipelines that must preserve the file's numeric content.
Dataset load_csv_raw(const std::string& path, const Schema& schema);

// Canonical numeric form, header "f0,...,f{p-1},y,s"; reloading reproduces
// the dataset exactly.
void write_csv(const Dataset& ds, const std::string& path);
Dataset read_canonical_csv(const std::string& path);

// Schema derived from a canonical header: y -> target, s -> sensitive,
// everything else a numeric feature.
Schema canonical_schema(const std::string& path);

// Resamples every row's group label i.i.d. Bernoulli(p); features and
// targets untouched.
Dataset assign_random_group(Dataset ds, double p, std::uint64_t seed);

struct FeaturePredicate {
  bool always = true;
  int feature = 0;
  enum class Op { Gt, Ge, Lt, Le } op = Op::Gt;
  double value = 0.0;

  bool eval(std::span<const double> features) const;
  // "all" or "f<idx><op><value>" with op one of > >= < <=, e.g. "f3>0.5".
  static FeaturePredicate parse(const std::string& text);
  std::string str() const;
};

struct BiasSpec {
  enum class Protocol { SR, ST } protocol = Protocol::SR;
  double flip_fraction = 0.65;
  FeaturePredicate predicate;  // SR: selects the impaired subpopulation
  int coarse_epochs = 2;       // ST: epochs of the coarse scoring model
};

struct BiasResult {
  Dataset data;
  std::vector<std::size_t> flipped;  // ascending row indices with Y flipped to 0
};

// Flips Y to 0 for a random floor(flip_fraction * k) of the k rows with
// group 0, target 1 and the predicate true. Throws
// std::invalid_argument("no eligible rows") when that set is empty.
BiasResult inject_bias_sr(const Dataset& ds, const BiasSpec& spec, std::uint64_t seed);

// Coarsely trains a throwaway model, scores the rows with group 0 and
// target 1, and flips the lowest-scored floor(flip_fraction * k) of them
// (ties broken by row index).
BiasResult inject_bias_st(const Dataset& ds, const BiasSpec& spec,
                          const std::function<Mlp(const Dataset&)>& model_factory,
                          const TrainConfig& coarse_cfg, std::uint64_t seed);

// One index per line, "row" header, beside a biased dataset.
void write_index_list(std::span<const std::size_t> rows, const std::string& path);

}  // namespace wassfair

#endif  // WASSFAIR_DATAGEN_HPP_
