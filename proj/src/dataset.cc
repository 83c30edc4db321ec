//
// Copyright 2026 The bppfl Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

#include "bppfl/dataset.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "bppfl/rng.h"

namespace bppfl {
namespace {

std::vector<std::string> SplitCsvLine(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  for (std::string& f : out) {
    const size_t b = f.find_first_not_of(" \t");
    const size_t e = f.find_last_not_of(" \t");
    f = b == std::string::npos ? std::string() : f.substr(b, e - b + 1);
  }
  return out;
}

bool ParseDouble(const std::string& s, double& v) {
  if (s.empty()) return false;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  if (*first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, v);
  return ec == std::errc() && ptr == last && std::isfinite(v);
}

std::vector<size_t> Shuffled(size_t n, RngStream& rng) {
  std::vector<size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  for (size_t i = n; i > 1; --i) {
    std::swap(idx[i - 1], idx[rng.UniformInt(i)]);
  }
  return idx;
}

}  // namespace

RawTable ReadCsv(const std::string& path, int label_column) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open CSV file: " + path);
  RawTable t;
  std::string line;
  size_t line_no = 0;
  size_t width = 0;
  int label_idx = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::vector<std::string> fields = SplitCsvLine(line);
    if (width == 0) {
      width = fields.size();
      if (width < 2) {
        throw std::runtime_error(path + ":" + std::to_string(line_no) +
                                 ": need at least one feature and a label");
      }
      label_idx = label_column < 0 ? static_cast<int>(width) + label_column
                                   : label_column;
      if (label_idx < 0 || label_idx >= static_cast<int>(width)) {
        throw std::runtime_error("label column out of range");
      }
      double probe = 0.0;
      const bool header = std::any_of(
          fields.begin(), fields.end(),
          [&](const std::string& f) { return !ParseDouble(f, probe); });
      if (header) {
        t.header = fields;
        continue;
      }
    }
    if (fields.size() != width) {
      throw std::runtime_error(path + ":" + std::to_string(line_no) +
                               ": expected " + std::to_string(width) +
                               " fields, got " + std::to_string(fields.size()));
    }
    std::vector<double> row;
    row.reserve(width - 1);
    for (size_t c = 0; c < width; ++c) {
      double v = 0.0;
      if (!ParseDouble(fields[c], v)) {
        const std::string name = t.header.empty()
                                     ? "column " + std::to_string(c + 1)
                                     : "column '" + t.header[c] + "'";
        throw std::runtime_error(path + ":" + std::to_string(line_no) + ": " +
                                 name + " is not numeric: '" + fields[c] +
                                 "'");
      }
      if (static_cast<int>(c) == label_idx) {
        if (v != std::floor(v) || v < 0.0) {
          throw std::runtime_error(path + ":" + std::to_string(line_no) +
                                   ": label must be a nonnegative integer");
        }
        t.labels.push_back(static_cast<int>(v));
      } else {
        row.push_back(v);
      }
    }
    t.features.push_back(std::move(row));
  }
  if (t.features.empty()) throw std::runtime_error(path + ": no data rows");
  return t;
}

std::vector<Sample> FederatedData::AllTraining() const {
  std::vector<Sample> all;
  for (const auto& c : clients) all.insert(all.end(), c.begin(), c.end());
  return all;
}

FederatedData Partition(const RawTable& train, const RawTable& eval,
                        int num_clients, int num_classes, uint64_t seed) {
  if (num_clients < 1) throw std::domain_error("need at least one client");
  if (train.features.size() < static_cast<size_t>(num_clients)) {
    throw std::domain_error("fewer training rows than clients");
  }
  const size_t d = train.features.front().size();
  std::vector<double> lo(d, std::numeric_limits<double>::infinity());
  std::vector<double> hi(d, -std::numeric_limits<double>::infinity());
  for (const auto& row : train.features) {
    for (size_t j = 0; j < d; ++j) {
      lo[j] = std::min(lo[j], row[j]);
      hi[j] = std::max(hi[j], row[j]);
    }
  }
  auto to_sample = [&](const std::vector<double>& row, int label) {
    if (label >= num_classes) {
      throw std::domain_error("label " + std::to_string(label) +
                              " exceeds class count");
    }
    Sample s;
    s.x.resize(static_cast<int>(d));
    for (size_t j = 0; j < d; ++j) {
      const double span = hi[j] - lo[j];
      const double v = span > 0.0 ? (row[j] - lo[j]) / span : 0.0;
      s.x(static_cast<int>(j)) = std::clamp(v, 0.0, 1.0);
    }
    s.y_bar = Vector::Zero(num_classes);
    s.y_bar(label) = 1.0;
    return s;
  };

  FederatedData out;
  out.num_features = static_cast<int>(d);
  out.num_classes = num_classes;
  out.clients.resize(num_clients);
  RngStream rng(seed, {PurposeTag(Purpose::kPartition)});
  const std::vector<size_t> order = Shuffled(train.features.size(), rng);
  for (size_t p = 0; p < order.size(); ++p) {
    out.clients[p % num_clients].push_back(
        to_sample(train.features[order[p]], train.labels[order[p]]));
  }
  for (size_t i = 0; i < eval.features.size(); ++i) {
    out.eval.push_back(to_sample(eval.features[i], eval.labels[i]));
  }
  return out;
}

FederatedData MakeSynthetic(const SyntheticSpec& spec, int num_clients,
                            uint64_t seed) {
  if (spec.num_samples < 1 || spec.num_features < 1 || spec.num_classes < 2) {
    throw std::domain_error("invalid synthetic dataset settings");
  }
  RngStream rng(seed, {PurposeTag(Purpose::kData)});
  std::vector<std::vector<double>> centers(spec.num_classes);
  for (auto& c : centers) {
    c.resize(spec.num_features);
    for (double& v : c) v = spec.separation * rng.StandardNormal();
  }
  auto draw = [&](int count) {
    RawTable t;
    for (int i = 0; i < count; ++i) {
      const int label = static_cast<int>(rng.UniformInt(spec.num_classes));
      std::vector<double> row(spec.num_features);
      for (int j = 0; j < spec.num_features; ++j) {
        row[j] = centers[label][j] + rng.StandardNormal();
      }
      t.features.push_back(std::move(row));
      t.labels.push_back(label);
    }
    return t;
  };
  const RawTable train = draw(spec.num_samples);
  const RawTable eval = draw(spec.num_eval);
  return Partition(train, eval, num_clients, spec.num_classes, seed);
}

FederatedData LoadCsv(const CsvSpec& spec, int num_clients, uint64_t seed) {
  const RawTable all = ReadCsv(spec.path, spec.label_column);
  if (!(spec.eval_fraction >= 0.0 && spec.eval_fraction < 1.0)) {
    throw std::domain_error("eval_fraction must lie in [0, 1)");
  }
  int classes = spec.num_classes;
  if (classes == 0) {
    classes = *std::max_element(all.labels.begin(), all.labels.end()) + 1;
  }
  RngStream rng(seed, {PurposeTag(Purpose::kData)});
  const std::vector<size_t> order = Shuffled(all.features.size(), rng);
  const size_t n_eval = static_cast<size_t>(
      std::floor(spec.eval_fraction * static_cast<double>(order.size())));
  RawTable train;
  RawTable eval;
  for (size_t p = 0; p < order.size(); ++p) {
    RawTable& dst = p < n_eval ? eval : train;
    dst.features.push_back(all.features[order[p]]);
    dst.labels.push_back(all.labels[order[p]]);
  }
  return Partition(train, eval, num_clients, classes, seed);
}

}  // namespace bppfl
