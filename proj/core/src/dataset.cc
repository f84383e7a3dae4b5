//
// Copyright 2026 The HBC Lab Authors
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

#include "hbc/dataset.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

#include "hbc/errors.h"

namespace hbc {

const char* SplitName(Split s) {
  switch (s) {
    case Split::kTrain:
      return "train";
    case Split::kVal:
      return "val";
    case Split::kTest:
      return "test";
  }
  return "?";
}

Split ParseSplit(const std::string& name) {
  if (name == "train") return Split::kTrain;
  if (name == "val") return Split::kVal;
  if (name == "test") return Split::kTest;
  throw ParseError("unknown split tag '" + name + "'");
}

void LabeledDataset::Validate() const {
  const size_t n = y.size();
  if (s.size() != n) throw InvalidArgument("y and s lengths differ");
  if (features.rows() != n && !(n == 0 && features.size() == 0)) {
    throw InvalidArgument("feature rows (" + std::to_string(features.rows()) +
                          ") != label count (" + std::to_string(n) + ")");
  }
  if (num_y < 1 || num_s < 1) throw InvalidArgument("class counts must be >= 1");
  for (size_t i = 0; i < n; ++i) {
    if (y[i] < 0 || y[i] >= num_y) {
      throw InvalidArgument("row " + std::to_string(i) + ": y=" +
                            std::to_string(y[i]) + " outside [0," +
                            std::to_string(num_y) + ")");
    }
    if (s[i] < 0 || s[i] >= num_s) {
      throw InvalidArgument("row " + std::to_string(i) + ": s=" +
                            std::to_string(s[i]) + " outside [0," +
                            std::to_string(num_s) + ")");
    }
  }
  if (!split.empty() && split.size() != n) {
    throw InvalidArgument("split tag count differs from row count");
  }
}

LabeledDataset LabeledDataset::Rows(const std::vector<size_t>& rows) const {
  LabeledDataset out;
  const size_t m = num_features();
  out.features = Tensor({rows.size(), m}, 0.0);
  out.y.reserve(rows.size());
  out.s.reserve(rows.size());
  for (size_t k = 0; k < rows.size(); ++k) {
    const size_t r = rows[k];
    std::copy_n(features.row(r).begin(), m, out.features.row(k).begin());
    out.y.push_back(y[r]);
    out.s.push_back(s[r]);
    if (!split.empty()) out.split.push_back(split[r]);
  }
  out.num_y = num_y;
  out.num_s = num_s;
  out.metadata = metadata;
  return out;
}

LabeledDataset LabeledDataset::Subset(Split part) const {
  if (split.empty()) throw InvalidArgument("dataset has no split tags");
  std::vector<size_t> rows;
  for (size_t i = 0; i < split.size(); ++i) {
    if (split[i] == part) rows.push_back(i);
  }
  LabeledDataset out = Rows(rows);
  out.split.clear();
  return out;
}

nlohmann::json SynthSpec::ToJson() const {
  return {{"n", n},
          {"margin", margin},
          {"rho", rho},
          {"y_classes", y_classes},
          {"s_classes", s_classes},
          {"noise_sigma", noise_sigma},
          {"seed", seed}};
}

SynthSpec SynthSpec::FromJson(const nlohmann::json& j) {
  SynthSpec spec;
  spec.n = j.value("n", spec.n);
  spec.margin = j.value("margin", spec.margin);
  spec.rho = j.value("rho", spec.rho);
  spec.y_classes = j.value("y_classes", spec.y_classes);
  spec.s_classes = j.value("s_classes", spec.s_classes);
  spec.noise_sigma = j.value("noise_sigma", spec.noise_sigma);
  spec.seed = j.value("seed", spec.seed);
  return spec;
}

namespace {

void CheckCommon(const SynthSpec& spec) {
  if (spec.n == 0) throw InvalidArgument("synthetic dataset needs n > 0");
  if (!(spec.rho >= 0.0 && spec.rho <= 1.0)) {
    throw InvalidArgument("rho must lie in [0,1]");
  }
}

}  // namespace

LabeledDataset GenQuadrant(const SynthSpec& spec) {
  CheckCommon(spec);
  if (spec.y_classes != 2 || spec.s_classes != 2) {
    throw InvalidArgument("quadrant generator is binary: y_classes == s_classes == 2");
  }
  if (!(spec.margin > 0.0 && spec.margin < 0.5)) {
    throw InvalidArgument("margin must lie in (0, 0.5), got " +
                          std::to_string(spec.margin));
  }
  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> coord(-1.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto draw = [&] {
    double v;
    do {
      v = coord(rng);
    } while (std::abs(v) < spec.margin);
    return v;
  };

  LabeledDataset d;
  d.features = Tensor({spec.n, 2}, 0.0);
  d.y.resize(spec.n);
  d.s.resize(spec.n);
  d.num_y = 2;
  d.num_s = 2;
  for (size_t i = 0; i < spec.n; ++i) {
    const double x1 = draw();
    double x2 = draw();
    const int y = x1 > 0 ? 1 : 0;
    if (spec.rho > 0 && unit(rng) < spec.rho) {
      // Re-couple: move x2 to the half-plane whose label equals y.
      x2 = y == 1 ? std::abs(x2) : -std::abs(x2);
    }
    d.features.at(i, 0) = x1;
    d.features.at(i, 1) = x2;
    d.y[i] = y;
    d.s[i] = x2 > 0 ? 1 : 0;
  }
  d.metadata = {{"generator", "quadrant"}, {"spec", spec.ToJson()}};
  return d;
}

LabeledDataset GenLattice(const SynthSpec& spec) {
  CheckCommon(spec);
  if (spec.y_classes < 2 || spec.s_classes < 2) {
    throw InvalidArgument("lattice needs y_classes >= 2 and s_classes >= 2");
  }
  if (!(spec.noise_sigma >= 0.0)) {
    throw InvalidArgument("noise_sigma must be >= 0");
  }
  const int ny = spec.y_classes, ns = spec.s_classes;
  std::mt19937_64 rng(spec.seed);
  std::uniform_int_distribution<int> pick_y(0, ny - 1);
  std::uniform_int_distribution<int> pick_s(0, ns - 1);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> noise(0.0, 1.0);

  LabeledDataset d;
  d.features = Tensor({spec.n, 2}, 0.0);
  d.y.resize(spec.n);
  d.s.resize(spec.n);
  d.num_y = ny;
  d.num_s = ns;
  for (size_t i = 0; i < spec.n; ++i) {
    const int y = pick_y(rng);
    int s = pick_s(rng);
    if (spec.rho > 0 && unit(rng) < spec.rho) s = y % ns;
    const double cx = -1.0 + (2.0 * y + 1.0) / ny;
    const double cy = -1.0 + (2.0 * s + 1.0) / ns;
    d.features.at(i, 0) = cx + spec.noise_sigma * noise(rng);
    d.features.at(i, 1) = cy + spec.noise_sigma * noise(rng);
    d.y[i] = y;
    d.s[i] = s;
  }
  const double half_spacing = std::min(1.0 / ny, 1.0 / ns);
  d.metadata = {{"generator", "lattice"},
                {"spec", spec.ToJson()},
                {"overlap", 3.0 * spec.noise_sigma > half_spacing}};
  return d;
}

namespace {

std::vector<std::string> SplitLine(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream is(line);
  while (std::getline(is, cell, ',')) {
    while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' ')) {
      cell.pop_back();
    }
    size_t b = 0;
    while (b < cell.size() && cell[b] == ' ') ++b;
    out.push_back(cell.substr(b));
  }
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double ParseDouble(const std::string& cell, size_t line_no) {
  char* end = nullptr;
  const double v = std::strtod(cell.c_str(), &end);
  if (cell.empty() || end != cell.c_str() + cell.size()) {
    throw ParseError("line " + std::to_string(line_no) + ": bad number '" +
                     cell + "'");
  }
  return v;
}

int ParseLabel(const std::string& cell, size_t line_no) {
  char* end = nullptr;
  const long v = std::strtol(cell.c_str(), &end, 10);
  if (cell.empty() || end != cell.c_str() + cell.size()) {
    throw ParseError("line " + std::to_string(line_no) + ": bad label '" +
                     cell + "'");
  }
  return static_cast<int>(v);
}

}  // namespace

LabeledDataset LoadCsv(const std::filesystem::path& path, int num_y,
                       int num_s) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw ParseError("missing header in " + path.string());
  const auto header = SplitLine(line);
  bool has_split = !header.empty() && header.back() == "split";
  const size_t label_cols = has_split ? 3 : 2;
  if (header.size() < label_cols + 1) {
    throw ParseError("missing header: expected f0..f{M-1},y,s");
  }
  const size_t m = header.size() - label_cols;
  for (size_t j = 0; j < m; ++j) {
    if (header[j] != "f" + std::to_string(j)) {
      throw ParseError("missing header: column " + std::to_string(j) +
                       " should be f" + std::to_string(j) + ", got '" +
                       header[j] + "'");
    }
  }
  if (header[m] != "y" || header[m + 1] != "s") {
    throw ParseError("missing header: expected y,s after feature columns");
  }

  LabeledDataset d;
  std::vector<double> feats;
  size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto cells = SplitLine(line);
    if (cells.size() != header.size()) {
      throw ParseError("line " + std::to_string(line_no) + ": ragged row (" +
                       std::to_string(cells.size()) + " cells, expected " +
                       std::to_string(header.size()) + ")");
    }
    for (size_t j = 0; j < m; ++j) feats.push_back(ParseDouble(cells[j], line_no));
    d.y.push_back(ParseLabel(cells[m], line_no));
    d.s.push_back(ParseLabel(cells[m + 1], line_no));
    if (has_split) d.split.push_back(ParseSplit(cells[m + 2]));
  }
  const size_t n = d.y.size();
  d.features = Tensor({n, m}, std::move(feats));
  auto infer = [](const std::vector<int>& v) {
    return v.empty() ? 1 : *std::max_element(v.begin(), v.end()) + 1;
  };
  d.num_y = num_y > 0 ? num_y : infer(d.y);
  d.num_s = num_s > 0 ? num_s : infer(d.s);
  d.metadata = {{"source", path.string()}};
  d.Validate();
  return d;
}

void SaveCsv(const LabeledDataset& data, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  const size_t m = data.num_features();
  for (size_t j = 0; j < m; ++j) out << 'f' << j << ',';
  out << "y,s";
  if (data.has_splits()) out << ",split";
  out << '\n';
  char buf[64];
  for (size_t i = 0; i < data.size(); ++i) {
    for (size_t j = 0; j < m; ++j) {
      std::snprintf(buf, sizeof(buf), "%.17g", data.features.at(i, j));
      out << buf << ',';
    }
    out << data.y[i] << ',' << data.s[i];
    if (data.has_splits()) out << ',' << SplitName(data.split[i]);
    out << '\n';
  }
}

LabeledDataset SplitDataset(const LabeledDataset& data,
                            const std::vector<double>& fractions,
                            uint64_t seed) {
  if (fractions.size() != 3) {
    throw InvalidArgument("split needs three fractions (train, val, test)");
  }
  double total = 0.0;
  for (double f : fractions) {
    if (!(f >= 0.0)) throw InvalidArgument("split fractions must be >= 0");
    total += f;
  }
  if (std::abs(total - 1.0) > 1e-9) {
    throw InvalidArgument("split fractions must sum to 1");
  }
  const size_t n = data.size();
  const size_t n_train = static_cast<size_t>(std::llround(fractions[0] * n));
  const size_t n_val = std::min(
      n - n_train, static_cast<size_t>(std::llround(fractions[1] * n)));
  const size_t n_test = n - n_train - n_val;
  const size_t counts[3] = {n_train, n_val, n_test};
  for (int k = 0; k < 3; ++k) {
    if (fractions[k] > 0 && counts[k] == 0) {
      throw InvalidArgument(std::string("split '") +
                            SplitName(static_cast<Split>(k)) +
                            "' would be empty");
    }
  }

  std::vector<size_t> order(n);
  std::iota(order.begin(), order.end(), size_t{0});
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);

  LabeledDataset out = data;
  out.split.assign(n, Split::kTrain);
  for (size_t k = n_train; k < n_train + n_val; ++k) out.split[order[k]] = Split::kVal;
  for (size_t k = n_train + n_val; k < n; ++k) out.split[order[k]] = Split::kTest;
  out.metadata["split"] = {{"fractions", fractions}, {"seed", seed}};
  return out;
}

}  // namespace hbc
