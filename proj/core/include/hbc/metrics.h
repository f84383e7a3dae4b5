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

#ifndef HBC_METRICS_H_
#define HBC_METRICS_H_

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "hbc/tensor.h"

namespace hbc {

// Fraction of positions where pred == truth.
double Accuracy(std::span<const int> pred, std::span<const int> truth);
// Test accuracy on the target attribute.
inline double Honesty(std::span<const int> pred_y, std::span<const int> y) {
  return Accuracy(pred_y, y);
}
// Attack success rate on the sensitive attribute.
inline double Curiosity(std::span<const int> pred_s, std::span<const int> s) {
  return Accuracy(pred_s, s);
}

// Plug-in mutual information (bits) of two categorical sequences.
double EmpiricalMi(std::span<const int> a, std::span<const int> b);
// Mutual information (bits) of a joint probability table, rows x cols.
double MiFromJoint(const std::vector<std::vector<double>>& joint);

// Rank-based area under the ROC curve; tied scores count one half.
// Labels are 0/1 and both must occur.
double Auc(std::span<const double> scores, std::span<const int> labels);

struct RocPoint {
  double threshold;
  double fpr;
  double tpr;
};
// One point per distinct score, descending thresholds, from (0,0) to (1,1).
std::vector<RocPoint> RocCurve(std::span<const double> scores,
                               std::span<const int> labels);

// Per-row Shannon entropy in bits.
std::vector<double> RowEntropiesBits(const Tensor& probs);

struct EntropyHistogram {
  std::vector<double> edges;  // bins + 1 edges over [0, log2 Y]
  std::vector<size_t> counts;
  std::vector<double> density;  // counts / N; sums to 1
  double mean = 0.0;
  double std = 0.0;
};

inline constexpr size_t kDefaultHistogramBins = 50;

EntropyHistogram MakeEntropyHistogram(const Tensor& probs,
                                      size_t bins = kDefaultHistogramBins);

// Fraction of rows whose entropy exceeds `bits`.
double TailMass(std::span<const double> entropies_bits, double bits);
double MeanOf(std::span<const double> v);

// Long-format rows: run_id, metric, value.
struct MetricRow {
  std::string run_id;
  std::string metric;
  double value;
};
void WriteMetricsCsv(const std::vector<MetricRow>& rows,
                     const std::filesystem::path& path);

}  // namespace hbc

#endif  // HBC_METRICS_H_
