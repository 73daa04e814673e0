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
#include <fstream>
#include <set>

#include "testutil.hpp"
#include "wassfair/datagen.hpp"
#include "wassfair/trainer.hpp"

using namespace wassfair;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("wassfair_dg_" + std::to_string(::getpid()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::trunc);
  out << content;
}

const char* kTinyCsv =
    "age,color,wage,sex,income\n"
    "30,red,10.5,Male,>50K\n"
    "40,blue,20.0,Female,<=50K\n"
    "50,red,30.0,Male,<=50K\n"
    "60,green,40.0,Female,>50K\n";

Schema tiny_schema() {
  return parse_schema(
      "age,feature,numeric\n"
      "color,feature,onehot\n"
      "wage,feature,numeric\n"
      "sex,sensitive,positive=Male\n"
      "income,target,positive=>50K\n");
}

}  // namespace

TEST_CASE("schema parsing and constraints") {
  const Schema s = tiny_schema();
  CHECK(s.size() == 5);
  CHECK(s[1].encoding == ColumnEncoding::OneHot);
  CHECK(s[3].role == ColumnRole::Sensitive);
  CHECK(s[3].positive_level == "Male");
  CHECK_THROWS_WITH(parse_schema("a,feature,numeric\n"), doctest::Contains("target"));
  CHECK_THROWS_WITH(parse_schema("a,target,numeric\nb,target,numeric\nc,sensitive,positive=x\n"),
                    doctest::Contains("target"));
  CHECK_THROWS_WITH(parse_schema("a,wizard\nb,target\nc,sensitive\n"),
                    doctest::Contains("role"));
  CHECK(adult_schema().size() == 15);
}

TEST_CASE("load_csv splits, one-hot expands and standardizes") {
  TempDir tmp;
  const std::string csv = tmp.file("tiny.csv");
  write_file(csv, kTinyCsv);
  const LoadedSplit split = load_csv(csv, tiny_schema(), 0.75, 42);
  CHECK(split.train.n() == 3);
  CHECK(split.test.n() == 1);
  // age + 3 colors + wage
  CHECK(split.train.p == 5);
  REQUIRE(split.feature_names.size() == 5);
  CHECK(split.feature_names[1] == "color=blue");  // levels sorted
  CHECK(split.feature_names[2] == "color=green");
  CHECK(split.feature_names[3] == "color=red");

  // Standardization moments fit on the train split.
  for (std::size_t c = 0; c < split.train.p; ++c) {
    double mean = 0.0;
    for (const Sample& s : split.train.samples) mean += s.features[c];
    mean /= static_cast<double>(split.train.n());
    CHECK(std::fabs(mean) < 1e-9);
    double var = 0.0;
    for (const Sample& s : split.train.samples) {
      var += (s.features[c] - mean) * (s.features[c] - mean);
    }
    var /= static_cast<double>(split.train.n());
    if (var > 0.0) CHECK(std::fabs(std::sqrt(var) - 1.0) < 1e-9);
  }
}

TEST_CASE("load_csv error paths are distinct") {
  TempDir tmp;
  const std::string missing_col = tmp.file("a.csv");
  write_file(missing_col, "age,income\n30,>50K\n");
  CHECK_THROWS_WITH(load_csv(missing_col, tiny_schema(), 0.75, 1),
                    doctest::Contains("missing column"));

  const std::string bad_numeric = tmp.file("b.csv");
  write_file(bad_numeric,
             "age,color,wage,sex,income\nthirty,red,1.0,Male,>50K\n");
  CHECK_THROWS_WITH(load_csv(bad_numeric, tiny_schema(), 0.75, 1),
                    doctest::Contains("not numeric"));

  const std::string empty = tmp.file("c.csv");
  write_file(empty, "");
  CHECK_THROWS_WITH(load_csv(empty, tiny_schema(), 0.75, 1), doctest::Contains("empty file"));

  CHECK_THROWS_WITH(load_csv(tmp.file("missing.csv"), tiny_schema(), 0.75, 1),
                    doctest::Contains("cannot open"));
}

TEST_CASE("split is deterministic under the seed") {
  TempDir tmp;
  const std::string csv = tmp.file("tiny.csv");
  write_file(csv, kTinyCsv);
  const LoadedSplit a = load_csv(csv, tiny_schema(), 0.5, 7);
  const LoadedSplit b = load_csv(csv, tiny_schema(), 0.5, 7);
  REQUIRE(a.train.n() == b.train.n());
  for (std::size_t i = 0; i < a.train.n(); ++i) {
    CHECK(a.train.samples[i].features == b.train.samples[i].features);
    CHECK(a.train.samples[i].target == b.train.samples[i].target);
  }
}

TEST_CASE("canonical CSV round trip is exact") {
  const Dataset ds = testutil::two_gaussian_dataset(50, 3, 99);
  TempDir tmp;
  const std::string path = tmp.file("round.csv");
  write_csv(ds, path);
  const Dataset back = read_canonical_csv(path);
  REQUIRE(back.n() == ds.n());
  REQUIRE(back.p == ds.p);
  for (std::size_t i = 0; i < ds.n(); ++i) {
    CHECK(back.samples[i].target == ds.samples[i].target);
    CHECK(back.samples[i].group == ds.samples[i].group);
    for (std::size_t c = 0; c < ds.p; ++c) {
      CHECK(std::fabs(back.samples[i].features[c] - ds.samples[i].features[c]) <= 1e-12);
    }
  }
}

TEST_CASE("assign_random_group endpoints and concentration") {
  Dataset ds = testutil::two_gaussian_dataset(20'000, 2, 5);
  const Dataset all0 = assign_random_group(ds, 0.0, 3);
  CHECK(all0.n1 == 0);
  const Dataset all1 = assign_random_group(ds, 1.0, 3);
  CHECK(all1.n0 == 0);
  const Dataset half = assign_random_group(ds, 0.5, 3);
  const double frac1 = static_cast<double>(half.n1) / static_cast<double>(half.n());
  CHECK(frac1 > 0.49);
  CHECK(frac1 < 0.51);
  // Features and targets untouched.
  for (std::size_t i = 0; i < ds.n(); ++i) {
    CHECK(half.samples[i].features == ds.samples[i].features);
    CHECK(half.samples[i].target == ds.samples[i].target);
  }
}

TEST_CASE("predicate parsing") {
  const FeaturePredicate all = FeaturePredicate::parse("all");
  CHECK(all.always);
  const FeaturePredicate gt = FeaturePredicate::parse("f3>0.5");
  CHECK_FALSE(gt.always);
  CHECK(gt.feature == 3);
  CHECK(gt.eval(std::vector<double>{0, 0, 0, 0.6}));
  CHECK_FALSE(gt.eval(std::vector<double>{0, 0, 0, 0.5}));
  const FeaturePredicate le = FeaturePredicate::parse("f0<=-1");
  CHECK(le.eval(std::vector<double>{-1.0}));
  CHECK_THROWS(FeaturePredicate::parse("x>1"));
  CHECK_THROWS(FeaturePredicate::parse("f1~2"));
}

TEST_CASE("SR injection flips the right rows and only them") {
  Dataset ds = testutil::two_gaussian_dataset(2'000, 2, 21);
  BiasSpec spec;
  spec.protocol = BiasSpec::Protocol::SR;
  spec.predicate = FeaturePredicate::parse("f0>0");

  std::size_t eligible = 0;
  for (const Sample& s : ds.samples) {
    eligible += s.group == 0 && s.target == 1 && s.features[0] > 0;
  }
  REQUIRE(eligible > 100);

  SUBCASE("fraction 0 changes nothing") {
    spec.flip_fraction = 0.0;
    const BiasResult r = inject_bias_sr(ds, spec, 4);
    CHECK(r.flipped.empty());
    for (std::size_t i = 0; i < ds.n(); ++i) {
      CHECK(r.data.samples[i].target == ds.samples[i].target);
    }
  }

  SUBCASE("fraction 1 flips every eligible row") {
    spec.flip_fraction = 1.0;
    const BiasResult r = inject_bias_sr(ds, spec, 4);
    CHECK(r.flipped.size() == eligible);
    for (std::size_t i : r.flipped) {
      CHECK(ds.samples[i].group == 0);
      CHECK(ds.samples[i].target == 1);
      CHECK(r.data.samples[i].target == 0);
    }
  }

  SUBCASE("fraction 0.65 flips exactly the floored count") {
    spec.flip_fraction = 0.65;
    const BiasResult r = inject_bias_sr(ds, spec, 4);
    CHECK(r.flipped.size() ==
          static_cast<std::size_t>(std::floor(0.65 * static_cast<double>(eligible))));
    // Only (group 0, target 1, predicate) rows changed, and only their target.
    std::set<std::size_t> flipped(r.flipped.begin(), r.flipped.end());
    for (std::size_t i = 0; i < ds.n(); ++i) {
      CHECK(r.data.samples[i].group == ds.samples[i].group);
      CHECK(r.data.samples[i].features == ds.samples[i].features);
      if (flipped.count(i) == 0) {
        CHECK(r.data.samples[i].target == ds.samples[i].target);
      }
    }
    // Deterministic under the seed.
    const BiasResult again = inject_bias_sr(ds, spec, 4);
    CHECK(again.flipped == r.flipped);
  }
}

TEST_CASE("SR injection with an empty eligible set is an error") {
  Dataset ds = testutil::two_gaussian_dataset(100, 2, 22);
  BiasSpec spec;
  spec.predicate = FeaturePredicate::parse("f0>1e9");
  CHECK_THROWS_WITH(inject_bias_sr(ds, spec, 1), doctest::Contains("no eligible rows"));
}

TEST_CASE("ST injection flips the lowest-scored eligible rows") {
  Dataset ds = testutil::two_gaussian_dataset(600, 3, 23);
  BiasSpec spec;
  spec.protocol = BiasSpec::Protocol::ST;
  spec.flip_fraction = 0.30;
  spec.coarse_epochs = 2;

  TrainConfig coarse;
  coarse.epochs = 2;
  coarse.batch_size = 50;
  auto factory = [](const Dataset& d) {
    return Mlp::random(d.p, std::vector<std::size_t>{8}, 321);
  };
  const BiasResult r = inject_bias_st(ds, spec, factory, coarse, 17);

  std::vector<std::size_t> eligible;
  for (std::size_t i = 0; i < ds.n(); ++i) {
    if (ds.samples[i].group == 0 && ds.samples[i].target == 1) eligible.push_back(i);
  }
  const std::size_t k = static_cast<std::size_t>(
      std::floor(0.30 * static_cast<double>(eligible.size())));
  REQUIRE(r.flipped.size() == k);

  // Oracle: retrain the same coarse model and check the flipped rows are
  // exactly the k lowest-scored eligible rows.
  TrainConfig cfg = coarse;
  cfg.epochs = spec.coarse_epochs;
  cfg.seed = 17;
  Mlp oracle_model = factory(ds);
  train(ds, cfg, oracle_model);
  const std::vector<double> scores = forward_rows(oracle_model, ds, eligible);
  std::vector<std::size_t> by_score(eligible.size());
  for (std::size_t i = 0; i < by_score.size(); ++i) by_score[i] = i;
  std::stable_sort(by_score.begin(), by_score.end(), [&](std::size_t a, std::size_t b) {
    if (scores[a] != scores[b]) return scores[a] < scores[b];
    return eligible[a] < eligible[b];
  });
  std::set<std::size_t> expected;
  for (std::size_t i = 0; i < k; ++i) expected.insert(eligible[by_score[i]]);
  for (std::size_t row : r.flipped) CHECK(expected.count(row) == 1);
}

TEST_CASE("ST injection with a constant scorer reduces to first-by-index") {
  Dataset ds = testutil::two_gaussian_dataset(300, 2, 25);
  BiasSpec spec;
  spec.protocol = BiasSpec::Protocol::ST;
  spec.flip_fraction = 0.30;
  spec.coarse_epochs = 0;  // untrained

  TrainConfig coarse;
  coarse.batch_size = 50;
  auto factory = [](const Dataset& d) {
    // All-zero weights: every score is exactly 0.5.
    return Mlp(std::vector<std::size_t>{d.p, 1});
  };
  const BiasResult r = inject_bias_st(ds, spec, factory, coarse, 2);

  std::vector<std::size_t> eligible;
  for (std::size_t i = 0; i < ds.n(); ++i) {
    if (ds.samples[i].group == 0 && ds.samples[i].target == 1) eligible.push_back(i);
  }
  const std::size_t k = static_cast<std::size_t>(
      std::floor(0.30 * static_cast<double>(eligible.size())));
  REQUIRE(r.flipped.size() == k);
  for (std::size_t i = 0; i < k; ++i) CHECK(r.flipped[i] == eligible[i]);
}

TEST_CASE("index list write") {
  TempDir tmp;
  const std::vector<std::size_t> rows = {3, 7, 19};
  const std::string path = tmp.file("flips.csv");
  write_index_list(rows, path);
  std::ifstream in(path);
  std::string line;
  std::getline(in, line);
  CHECK(line == "row");
  std::getline(in, line);
  CHECK(line == "3");
}
