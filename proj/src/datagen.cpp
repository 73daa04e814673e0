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

#include "wassfair/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include "wassfair/rng.hpp"
#include "wassfair/strfmt.hpp"
#include "wassfair/trainer.hpp"

namespace wassfair {

namespace {

std::string trim(const std::string& s) {
  const std::size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  const std::size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) out.push_back(trim(field));
  if (!line.empty() && line.back() == ',') out.push_back("");
  return out;
}

bool parse_double(const std::string& s, double* out) {
  if (s.empty()) return false;
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str() || *end != '\0') return false;
  *out = v;
  return true;
}

// Target/sensitive cell to {0,1}: numeric 0/1 directly, otherwise compare
// with the declared positive level (a trailing '.' on the cell is ignored,
// as in the census test split).
int binary_cell(const std::string& raw, const ColumnSpec& col, std::size_t line_no) {
  double v;
  if (parse_double(raw, &v)) {
    if (v == 0.0) return 0;
    if (v == 1.0) return 1;
    throw std::runtime_error("line " + std::to_string(line_no) + ": column '" + col.name +
                             "' must be binary, got " + raw);
  }
  if (col.positive_level.empty()) {
    throw std::runtime_error("column '" + col.name +
                             "' is not numeric and has no positive level declared");
  }
  std::string cell = raw;
  if (!cell.empty() && cell.back() == '.') cell.pop_back();
  return cell == col.positive_level ? 1 : 0;
}

}  // namespace

Schema parse_schema(const std::string& text) {
  Schema schema;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::vector<std::string> parts = split_csv_line(line);
    if (parts.size() < 2) throw std::runtime_error("bad schema line: " + line);

    ColumnSpec col;
    col.name = parts[0];
    const std::string& role = parts[1];
    if (role == "feature") {
      col.role = ColumnRole::Feature;
    } else if (role == "target") {
      col.role = ColumnRole::Target;
    } else if (role == "sensitive") {
      col.role = ColumnRole::Sensitive;
    } else if (role == "ignore") {
      col.role = ColumnRole::Ignore;
    } else {
      throw std::runtime_error("unknown column role '" + role + "' in: " + line);
    }
    if (parts.size() > 2 && !parts[2].empty()) {
      const std::string& enc = parts[2];
      if (enc == "numeric") {
        col.encoding = ColumnEncoding::Numeric;
      } else if (enc == "onehot") {
        col.encoding = ColumnEncoding::OneHot;
      } else if (enc.rfind("positive=", 0) == 0) {
        col.positive_level = enc.substr(9);
      } else {
        throw std::runtime_error("unknown column encoding '" + enc + "' in: " + line);
      }
    }
    schema.push_back(std::move(col));
  }

  int targets = 0, sensitives = 0;
  for (const ColumnSpec& c : schema) {
    targets += c.role == ColumnRole::Target;
    sensitives += c.role == ColumnRole::Sensitive;
  }
  if (targets != 1) throw std::runtime_error("schema needs exactly one target column");
  if (sensitives != 1) throw std::runtime_error("schema needs exactly one sensitive column");
  return schema;
}

Schema load_schema_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open schema file: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_schema(buf.str());
}

Schema adult_schema() {
  return parse_schema(
      "age,feature,numeric\n"
      "workclass,feature,onehot\n"
      "fnlwgt,feature,numeric\n"
      "education,feature,onehot\n"
      "education-num,feature,numeric\n"
      "marital-status,feature,onehot\n"
      "occupation,feature,onehot\n"
      "relationship,feature,onehot\n"
      "race,feature,onehot\n"
      "sex,sensitive,positive=Male\n"
      "capital-gain,feature,numeric\n"
      "capital-loss,feature,numeric\n"
      "hours-per-week,feature,numeric\n"
      "native-country,feature,onehot\n"
      "income,target,positive=>50K\n");
}

namespace {

struct RawTable {
  std::vector<int> schema_to_file;  // schema column -> file column index
  std::vector<std::vector<std::string>> rows;
  std::size_t rows_dropped = 0;
};

RawTable read_table(const std::string& path, const Schema& schema) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open data file: " + path);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty file: " + path);
  const std::vector<std::string> header = split_csv_line(line);

  RawTable table;
  table.schema_to_file.resize(schema.size());
  for (std::size_t c = 0; c < schema.size(); ++c) {
    const auto it = std::find(header.begin(), header.end(), schema[c].name);
    if (it == header.end()) {
      throw std::runtime_error("missing column '" + schema[c].name + "' in " + path);
    }
    table.schema_to_file[c] = static_cast<int>(it - header.begin());
  }

  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    std::vector<std::string> cells = split_csv_line(line);
    if (cells.size() < header.size()) {
      throw std::runtime_error("line " + std::to_string(line_no) + ": expected " +
                               std::to_string(header.size()) + " fields, got " +
                               std::to_string(cells.size()));
    }
    bool missing = false;
    for (std::size_t c = 0; c < schema.size() && !missing; ++c) {
      if (schema[c].role == ColumnRole::Ignore) continue;
      missing = cells[static_cast<std::size_t>(table.schema_to_file[c])] == "?";
    }
    if (missing) {
      ++table.rows_dropped;
      continue;
    }
    table.rows.push_back(std::move(cells));
  }
  if (table.rows.empty()) throw std::runtime_error("no data rows in " + path);
  return table;
}

}  // namespace

LoadedSplit load_csv(const std::string& path, const Schema& schema,
                     double train_fraction, std::uint64_t seed) {
  if (train_fraction < 0.0 || train_fraction > 1.0) {
    throw std::invalid_argument("train fraction must be in [0, 1]");
  }
  const RawTable table = read_table(path, schema);
  const std::size_t n = table.rows.size();

  // One-hot levels per categorical feature column, over the whole file.
  std::vector<std::vector<std::string>> levels(schema.size());
  for (std::size_t c = 0; c < schema.size(); ++c) {
    if (schema[c].role != ColumnRole::Feature ||
        schema[c].encoding != ColumnEncoding::OneHot) {
      continue;
    }
    std::map<std::string, int> seen;
    for (const auto& row : table.rows) {
      seen.emplace(row[static_cast<std::size_t>(table.schema_to_file[c])], 0);
    }
    for (const auto& [level, _] : seen) levels[c].push_back(level);
  }

  LoadedSplit out;
  out.rows_dropped = table.rows_dropped;
  for (std::size_t c = 0; c < schema.size(); ++c) {
    if (schema[c].role != ColumnRole::Feature) continue;
    if (schema[c].encoding == ColumnEncoding::Numeric) {
      out.feature_names.push_back(schema[c].name);
    } else {
      for (const std::string& level : levels[c]) {
        out.feature_names.push_back(schema[c].name + "=" + level);
      }
    }
  }

  std::vector<Sample> samples(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& row = table.rows[i];
    Sample& s = samples[i];
    s.features.reserve(out.feature_names.size());
    for (std::size_t c = 0; c < schema.size(); ++c) {
      const std::string& cell = row[static_cast<std::size_t>(table.schema_to_file[c])];
      switch (schema[c].role) {
        case ColumnRole::Ignore:
          break;
        case ColumnRole::Target:
          s.target = binary_cell(cell, schema[c], i + 2);
          break;
        case ColumnRole::Sensitive:
          s.group = binary_cell(cell, schema[c], i + 2);
          break;
        case ColumnRole::Feature:
          if (schema[c].encoding == ColumnEncoding::Numeric) {
            double v;
            if (!parse_double(cell, &v)) {
              throw std::runtime_error("line " + std::to_string(i + 2) + ": column '" +
                                       schema[c].name + "' is not numeric: " + cell);
            }
            s.features.push_back(v);
          } else {
            for (const std::string& level : levels[c]) {
              s.features.push_back(cell == level ? 1.0 : 0.0);
            }
          }
          break;
      }
    }
  }

  // Seeded split, then per-column standardization fit on the train rows.
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  Rng rng(seed);
  rng.shuffle(order);
  const std::size_t n_train = static_cast<std::size_t>(
      std::floor(train_fraction * static_cast<double>(n)));

  const std::size_t p = samples.empty() ? 0 : samples[0].features.size();
  std::vector<double> mean(p, 0.0), sd(p, 1.0);
  if (n_train > 0) {
    for (std::size_t c = 0; c < p; ++c) {
      double sum = 0.0;
      for (std::size_t i = 0; i < n_train; ++i) sum += samples[order[i]].features[c];
      mean[c] = sum / static_cast<double>(n_train);
      double ss = 0.0;
      for (std::size_t i = 0; i < n_train; ++i) {
        const double d = samples[order[i]].features[c] - mean[c];
        ss += d * d;
      }
      const double var = ss / static_cast<double>(n_train);
      sd[c] = var > 0.0 ? std::sqrt(var) : 1.0;
    }
  }
  for (Sample& s : samples) {
    for (std::size_t c = 0; c < p; ++c) s.features[c] = (s.features[c] - mean[c]) / sd[c];
  }

  std::vector<Sample> train_rows, test_rows;
  train_rows.reserve(n_train);
  test_rows.reserve(n - n_train);
  for (std::size_t i = 0; i < n; ++i) {
    (i < n_train ? train_rows : test_rows).push_back(samples[order[i]]);
  }
  out.train = Dataset::from_samples(std::move(train_rows));
  out.test = Dataset::from_samples(std::move(test_rows));
  return out;
}

Dataset load_csv_raw(const std::string& path, const Schema& schema) {
  const RawTable table = read_table(path, schema);
  std::vector<Sample> samples(table.rows.size());
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const auto& row = table.rows[i];
    Sample& s = samples[i];
    for (std::size_t c = 0; c < schema.size(); ++c) {
      const std::string& cell = row[static_cast<std::size_t>(table.schema_to_file[c])];
      switch (schema[c].role) {
        case ColumnRole::Ignore:
          break;
        case ColumnRole::Target:
          s.target = binary_cell(cell, schema[c], i + 2);
          break;
        case ColumnRole::Sensitive:
          s.group = binary_cell(cell, schema[c], i + 2);
          break;
        case ColumnRole::Feature: {
          double v;
          if (!parse_double(cell, &v)) {
            throw std::runtime_error("line " + std::to_string(i + 2) + ": column '" +
                                     schema[c].name +
                                     "' must be numeric in raw mode: " + cell);
          }
          s.features.push_back(v);
          break;
        }
      }
    }
  }
  return Dataset::from_samples(std::move(samples));
}

void write_csv(const Dataset& ds, const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  for (std::size_t c = 0; c < ds.p; ++c) out << "f" << c << ",";
  out << "y,s\n";
  for (const Sample& s : ds.samples) {
    for (double v : s.features) out << fmt_g17(v) << ",";
    out << s.target << "," << s.group << "\n";
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

Schema canonical_schema(const std::string& path) {
  std::ifstream header_in(path);
  if (!header_in) throw std::runtime_error("cannot open data file: " + path);
  std::string line;
  if (!std::getline(header_in, line)) throw std::runtime_error("empty file: " + path);
  const std::vector<std::string> header = split_csv_line(line);
  if (header.size() < 2) throw std::runtime_error("canonical CSV needs y and s columns");

  Schema schema;
  for (const std::string& name : header) {
    ColumnSpec col;
    col.name = name;
    if (name == "y") {
      col.role = ColumnRole::Target;
    } else if (name == "s") {
      col.role = ColumnRole::Sensitive;
    } else {
      col.role = ColumnRole::Feature;
    }
    schema.push_back(std::move(col));
  }
  return schema;
}

Dataset read_canonical_csv(const std::string& path) {
  return load_csv_raw(path, canonical_schema(path));
}

Dataset assign_random_group(Dataset ds, double p, std::uint64_t seed) {
  if (p < 0.0 || p > 1.0) throw std::invalid_argument("probability must be in [0, 1]");
  Rng rng(seed);
  ds.n0 = ds.n1 = 0;
  for (Sample& s : ds.samples) {
    s.group = rng.bernoulli(p) ? 1 : 0;
    (s.group == 0 ? ds.n0 : ds.n1) += 1;
  }
  return ds;
}

bool FeaturePredicate::eval(std::span<const double> features) const {
  if (always) return true;
  const double v = features[static_cast<std::size_t>(feature)];
  switch (op) {
    case Op::Gt: return v > value;
    case Op::Ge: return v >= value;
    case Op::Lt: return v < value;
    case Op::Le: return v <= value;
  }
  return false;
}

FeaturePredicate FeaturePredicate::parse(const std::string& text) {
  FeaturePredicate p;
  const std::string t = trim(text);
  if (t == "all" || t.empty()) return p;
  if (t[0] != 'f') throw std::runtime_error("bad predicate (want all or f<i><op><v>): " + t);
  std::size_t pos = 1;
  while (pos < t.size() && std::isdigit(static_cast<unsigned char>(t[pos]))) ++pos;
  if (pos == 1) throw std::runtime_error("bad predicate feature index: " + t);
  p.always = false;
  p.feature = std::stoi(t.substr(1, pos - 1));
  std::string op;
  while (pos < t.size() && (t[pos] == '<' || t[pos] == '>' || t[pos] == '=')) {
    op.push_back(t[pos++]);
  }
  if (op == ">") {
    p.op = Op::Gt;
  } else if (op == ">=") {
    p.op = Op::Ge;
  } else if (op == "<") {
    p.op = Op::Lt;
  } else if (op == "<=") {
    p.op = Op::Le;
  } else {
    throw std::runtime_error("bad predicate operator: " + t);
  }
  if (!parse_double(t.substr(pos), &p.value)) {
    throw std::runtime_error("bad predicate value: " + t);
  }
  return p;
}

std::string FeaturePredicate::str() const {
  if (always) return "all";
  const char* ops[] = {">", ">=", "<", "<="};
  return "f" + std::to_string(feature) + ops[static_cast<int>(op)] + fmt_g17(value);
}

namespace {

BiasResult flip_rows(const Dataset& ds, std::vector<std::size_t> chosen) {
  BiasResult out;
  out.data = ds;
  std::sort(chosen.begin(), chosen.end());
  for (std::size_t r : chosen) out.data.samples[r].target = 0;
  out.flipped = std::move(chosen);
  return out;
}

}  // namespace

BiasResult inject_bias_sr(const Dataset& ds, const BiasSpec& spec, std::uint64_t seed) {
  if (spec.flip_fraction < 0.0 || spec.flip_fraction > 1.0) {
    throw std::invalid_argument("flip fraction must be in [0, 1]");
  }
  std::vector<std::size_t> eligible;
  for (std::size_t i = 0; i < ds.n(); ++i) {
    const Sample& s = ds.samples[i];
    if (s.group == 0 && s.target == 1 && spec.predicate.eval(s.features)) {
      eligible.push_back(i);
    }
  }
  if (eligible.empty()) throw std::invalid_argument("no eligible rows");

  const std::size_t k = static_cast<std::size_t>(
      std::floor(spec.flip_fraction * static_cast<double>(eligible.size())));
  Rng rng(seed);
  const std::vector<std::size_t> picks =
      rng.sample_without_replacement(eligible.size(), k);
  std::vector<std::size_t> chosen(picks.size());
  for (std::size_t i = 0; i < picks.size(); ++i) chosen[i] = eligible[picks[i]];
  return flip_rows(ds, std::move(chosen));
}

BiasResult inject_bias_st(const Dataset& ds, const BiasSpec& spec,
                          const std::function<Mlp(const Dataset&)>& model_factory,
                          const TrainConfig& coarse_cfg, std::uint64_t seed) {
  if (spec.flip_fraction < 0.0 || spec.flip_fraction > 1.0) {
    throw std::invalid_argument("flip fraction must be in [0, 1]");
  }
  std::vector<std::size_t> eligible;
  for (std::size_t i = 0; i < ds.n(); ++i) {
    if (ds.samples[i].group == 0 && ds.samples[i].target == 1) eligible.push_back(i);
  }
  if (eligible.empty()) throw std::invalid_argument("no eligible rows");

  TrainConfig cfg = coarse_cfg;
  cfg.epochs = spec.coarse_epochs;
  cfg.seed = seed;
  cfg.penalty.kind = PenaltyKind::None;
  Mlp model = model_factory(ds);
  train(ds, cfg, model);

  const std::vector<double> scores = forward_rows(model, ds, eligible);
  std::vector<std::size_t> by_score(eligible.size());
  for (std::size_t i = 0; i < by_score.size(); ++i) by_score[i] = i;
  std::stable_sort(by_score.begin(), by_score.end(), [&](std::size_t a, std::size_t b) {
    if (scores[a] != scores[b]) return scores[a] < scores[b];
    return eligible[a] < eligible[b];
  });

  const std::size_t k = static_cast<std::size_t>(
      std::floor(spec.flip_fraction * static_cast<double>(eligible.size())));
  std::vector<std::size_t> chosen(k);
  for (std::size_t i = 0; i < k; ++i) chosen[i] = eligible[by_score[i]];
  return flip_rows(ds, std::move(chosen));
}

void write_index_list(std::span<const std::size_t> rows, const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << "row\n";
  for (std::size_t r : rows) out << r << "\n";
  if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace wassfair
