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

#ifndef HBC_DATASET_H_
#define HBC_DATASET_H_

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "hbc/tensor.h"
#include "nlohmann/json.hpp"

namespace hbc {

enum class Split : uint8_t { kTrain = 0, kVal = 1, kTest = 2 };

const char* SplitName(Split s);
Split ParseSplit(const std::string& name);

// Feature matrix with a target label y in [Y] and a sensitive label s in [S]
// per row. Immutable once built; share read-only across workers.
struct LabeledDataset {
  Tensor features;  // N x M
  std::vector<int> y;
  std::vector<int> s;
  int num_y = 0;
  int num_s = 0;
  // Empty when the dataset has not been split.
  std::vector<Split> split;
  nlohmann::json metadata = nlohmann::json::object();

  size_t size() const { return y.size(); }
  size_t num_features() const { return features.cols(); }
  bool has_splits() const { return !split.empty(); }

  // Throws InvalidArgument if a label or shape invariant is violated.
  void Validate() const;

  // Rows tagged `part`, in original order, without split tags.
  LabeledDataset Subset(Split part) const;
  // Rows at `rows`, in the given order. Split tags are carried over.
  LabeledDataset Rows(const std::vector<size_t>& rows) const;
};

// Parameters of the synthetic generators.
struct SynthSpec {
  size_t n = 4000;
  double margin = 0.1;   // quadrant: excluded band |x| < margin
  double rho = 0.0;      // probability that s is re-coupled to y
  int y_classes = 2;
  int s_classes = 2;
  double noise_sigma = 0.05;  // lattice only
  uint64_t seed = 0;

  nlohmann::json ToJson() const;
  static SynthSpec FromJson(const nlohmann::json& j);
};

// Two independent binary attributes on R^2: the sign of x1 is y and the sign
// of x2 is s, with both coordinates drawn uniformly from [margin, 1] in
// magnitude. With probability rho a sample's s is overwritten by y.
LabeledDataset GenQuadrant(const SynthSpec& spec);

// Gaussian clusters on a y_classes x s_classes grid in [-1,1]^2; the column
// index is y (x axis) and the row index is s (second axis). Metadata carries
// "overlap": true when clusters are closer than three standard deviations.
LabeledDataset GenLattice(const SynthSpec& spec);

// Reads a CSV with header f0..f{M-1},y,s and an optional trailing split
// column. Class counts of zero are inferred as max label + 1.
LabeledDataset LoadCsv(const std::filesystem::path& path, int num_y = 0,
                       int num_s = 0);
// Writes the same format; doubles use round-trip precision.
void SaveCsv(const LabeledDataset& data, const std::filesystem::path& path);

// Deterministic shuffle by `seed`, then contiguous train/val/test blocks
// sized by `fractions` (must sum to 1). The returned rows keep their
// original order; only tags are assigned.
LabeledDataset SplitDataset(const LabeledDataset& data,
                            const std::vector<double>& fractions,
                            uint64_t seed);

}  // namespace hbc

#endif  // HBC_DATASET_H_
