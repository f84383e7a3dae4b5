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

#include "hbc/metrics.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numeric>

#include "hbc/errors.h"
#include "hbc/losses.h"

namespace hbc {

double Accuracy(std::span<const int> pred, std::span<const int> truth) {
  if (pred.size() != truth.size()) {
    throw ShapeError("prediction and label lengths differ");
  }
  if (pred.empty()) throw InvalidArgument("accuracy of empty sequence");
  size_t hits = 0;
  for (size_t i = 0; i < pred.size(); ++i) hits += pred[i] == truth[i];
  return static_cast<double>(hits) / static_cast<double>(pred.size());
}

double MiFromJoint(const std::vector<std::vector<double>>& joint) {
  if (joint.empty() || joint.front().empty()) {
    throw InvalidArgument("empty joint table");
  }
  const size_t cols = joint.front().size();
  double total = 0.0;
  std::vector<double> row_m(joint.size(), 0.0), col_m(cols, 0.0);
  for (size_t i = 0; i < joint.size(); ++i) {
    if (joint[i].size() != cols) throw ShapeError("ragged joint table");
    for (size_t j = 0; j < cols; ++j) {
      if (!(joint[i][j] >= 0.0)) throw InvalidArgument("negative joint mass");
      row_m[i] += joint[i][j];
      col_m[j] += joint[i][j];
      total += joint[i][j];
    }
  }
  if (!(total > 0.0)) throw InvalidArgument("joint table has no mass");
  double mi = 0.0;
  for (size_t i = 0; i < joint.size(); ++i) {
    for (size_t j = 0; j < cols; ++j) {
      const double p = joint[i][j] / total;
      if (p <= 0.0) continue;
      mi += p * std::log2(p / ((row_m[i] / total) * (col_m[j] / total)));
    }
  }
  return std::max(mi, 0.0);
}

double EmpiricalMi(std::span<const int> a, std::span<const int> b) {
  if (a.size() != b.size()) throw ShapeError("MI inputs differ in length");
  if (a.empty()) throw InvalidArgument("MI of empty sequences");
  std::map<int, size_t> ia, ib;
  for (int v : a) ia.emplace(v, ia.size());
  for (int v : b) ib.emplace(v, ib.size());
  // Map insertion order is not sorted order; re-index by sorted key.
  size_t k = 0;
  for (auto& [key, idx] : ia) idx = k++;
  k = 0;
  for (auto& [key, idx] : ib) idx = k++;
  std::vector<std::vector<double>> joint(ia.size(),
                                         std::vector<double>(ib.size(), 0.0));
  for (size_t i = 0; i < a.size(); ++i) joint[ia[a[i]]][ib[b[i]]] += 1.0;
  return MiFromJoint(joint);
}

namespace {

void CheckBinary(std::span<const double> scores, std::span<const int> labels,
                 size_t* pos, size_t* neg) {
  if (scores.size() != labels.size()) {
    throw ShapeError("scores and labels differ in length");
  }
  *pos = *neg = 0;
  for (int l : labels) {
    if (l == 1) {
      ++*pos;
    } else if (l == 0) {
      ++*neg;
    } else {
      throw InvalidArgument("AUC labels must be 0 or 1");
    }
  }
  if (*pos == 0 || *neg == 0) {
    throw InvalidArgument("AUC needs both classes present");
  }
}

}  // namespace

double Auc(std::span<const double> scores, std::span<const int> labels) {
  size_t pos = 0, neg = 0;
  CheckBinary(scores, labels, &pos, &neg);
  const size_t n = scores.size();
  std::vector<size_t> order(n);
  std::iota(order.begin(), order.end(), size_t{0});
  std::sort(order.begin(), order.end(),
            [&](size_t a, size_t b) { return scores[a] < scores[b]; });
  // Sum of mid-ranks (1-based) of the positives.
  double rank_sum = 0.0;
  for (size_t i = 0; i < n;) {
    size_t j = i;
    while (j < n && scores[order[j]] == scores[order[i]]) ++j;
    const double mid_rank = 0.5 * static_cast<double>(i + 1 + j);
    for (size_t k = i; k < j; ++k) {
      if (labels[order[k]] == 1) rank_sum += mid_rank;
    }
    i = j;
  }
  const double p = static_cast<double>(pos), q = static_cast<double>(neg);
  return (rank_sum - p * (p + 1.0) / 2.0) / (p * q);
}

std::vector<RocPoint> RocCurve(std::span<const double> scores,
                               std::span<const int> labels) {
  size_t pos = 0, neg = 0;
  CheckBinary(scores, labels, &pos, &neg);
  const size_t n = scores.size();
  std::vector<size_t> order(n);
  std::iota(order.begin(), order.end(), size_t{0});
  std::sort(order.begin(), order.end(),
            [&](size_t a, size_t b) { return scores[a] > scores[b]; });
  std::vector<RocPoint> out;
  out.push_back({INFINITY, 0.0, 0.0});
  size_t tp = 0, fp = 0;
  for (size_t i = 0; i < n;) {
    size_t j = i;
    while (j < n && scores[order[j]] == scores[order[i]]) {
      if (labels[order[j]] == 1) {
        ++tp;
      } else {
        ++fp;
      }
      ++j;
    }
    out.push_back({scores[order[i]], static_cast<double>(fp) / neg,
                   static_cast<double>(tp) / pos});
    i = j;
  }
  return out;
}

std::vector<double> RowEntropiesBits(const Tensor& probs) {
  std::vector<double> h(probs.rows());
  for (size_t r = 0; r < probs.rows(); ++r) {
    h[r] = ShannonEntropy(probs.row(r), LogBase::kBits);
  }
  return h;
}

double MeanOf(std::span<const double> v) {
  if (v.empty()) return 0.0;
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double TailMass(std::span<const double> entropies_bits, double bits) {
  if (entropies_bits.empty()) return 0.0;
  size_t k = 0;
  for (double h : entropies_bits) k += h > bits;
  return static_cast<double>(k) / static_cast<double>(entropies_bits.size());
}

EntropyHistogram MakeEntropyHistogram(const Tensor& probs, size_t bins) {
  if (bins == 0) throw InvalidArgument("histogram needs at least one bin");
  if (probs.rows() == 0) throw InvalidArgument("histogram of empty batch");
  const double top = std::log2(static_cast<double>(probs.cols()));
  EntropyHistogram hist;
  hist.edges.resize(bins + 1);
  for (size_t b = 0; b <= bins; ++b) {
    hist.edges[b] = top * static_cast<double>(b) / static_cast<double>(bins);
  }
  hist.counts.assign(bins, 0);
  const auto h = RowEntropiesBits(probs);
  for (double v : h) {
    size_t b = top > 0 ? static_cast<size_t>(v / top * bins) : 0;
    hist.counts[std::min(b, bins - 1)]++;
  }
  const double n = static_cast<double>(h.size());
  hist.density.resize(bins);
  for (size_t b = 0; b < bins; ++b) hist.density[b] = hist.counts[b] / n;
  hist.mean = MeanOf(h);
  double var = 0.0;
  for (double v : h) var += (v - hist.mean) * (v - hist.mean);
  hist.std = std::sqrt(var / n);
  return hist;
}

void WriteMetricsCsv(const std::vector<MetricRow>& rows,
                     const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << "run_id,metric,value\n";
  char buf[64];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof(buf), "%.17g", r.value);
    out << r.run_id << ',' << r.metric << ',' << buf << '\n';
  }
}

}  // namespace hbc
