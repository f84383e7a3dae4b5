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

#ifndef HBC_MODEL_H_
#define HBC_MODEL_H_

#include <cstdint>
#include <filesystem>
#include <random>
#include <span>
#include <vector>

#include "hbc/autodiff.h"
#include "hbc/tensor.h"
#include "nlohmann/json.hpp"

namespace hbc {

// What the last layer emits.
enum class OutputMode {
  kRaw,      // logits in R^Y
  kSoft,     // softmax(logits / temperature), rows in the simplex
  kSigmoid,  // one logistic unit; the implied simplex is [1 - z, z]
};

const char* OutputModeName(OutputMode m);
OutputMode ParseOutputMode(const std::string& name);

// Fixed map applied to the input before the first layer. kLog takes the
// clamped natural log, for inputs that are probabilities.
enum class InputTransform { kIdentity, kLog };

const char* InputTransformName(InputTransform t);
InputTransform ParseInputTransform(const std::string& name);

// Fully connected network: Linear -> LeakyReLU -> Dropout per hidden layer,
// then a final Linear.
struct MlpSpec {
  std::vector<size_t> widths;  // input, hidden..., output
  double leaky_slope = 0.01;
  // One rate per hidden layer; empty means no dropout.
  std::vector<double> dropout;
  OutputMode output = OutputMode::kSoft;
  double temperature = 1.0;
  InputTransform input_transform = InputTransform::kIdentity;

  size_t input_width() const { return widths.front(); }
  size_t output_width() const { return widths.back(); }
  size_t num_layers() const { return widths.size() - 1; }
  // Number of classes the output ranges over (2 for a sigmoid unit).
  size_t num_classes() const;
  void Validate() const;

  nlohmann::json ToJson() const;
  static MlpSpec FromJson(const nlohmann::json& j);
};

// Classifier F: [M, 64, 64, 32, Y].
MlpSpec DefaultClassifierSpec(size_t input_width, size_t num_y);
// Decoder G: [Y, 20Y, 10Y, S].
MlpSpec DefaultDecoderSpec(size_t num_y, size_t num_s);
// Single logistic unit sigma(theta . x + b).
MlpSpec LogisticSpec(size_t input_width);
// Same depth with every hidden width halved (at least 1).
MlpSpec HalfWidth(const MlpSpec& spec);

struct LayerParams {
  Tensor weight;  // fan_in x fan_out
  Tensor bias;    // 1 x fan_out

  friend bool operator==(const LayerParams&, const LayerParams&) = default;
};

// Owned by a single training worker; copies are independent snapshots.
struct ModelParams {
  std::vector<LayerParams> layers;
  uint64_t seed = 0;

  size_t num_weights() const;
  bool AllFinite() const;
  friend bool operator==(const ModelParams&, const ModelParams&) = default;
};

// Uniform(+-1/sqrt(fan_in)) weights and biases.
ModelParams InitParams(const MlpSpec& spec, uint64_t seed);
void CheckCompatible(const MlpSpec& spec, const ModelParams& params);

// Parameters registered in a graph.
struct BoundParams {
  std::vector<ad::Var> weights;
  std::vector<ad::Var> biases;
};
// Leaves if `trainable`, constants otherwise.
BoundParams Bind(ad::Graph& g, const ModelParams& params, bool trainable);

struct ForwardVars {
  ad::Var logits;  // raw last-layer output
  ad::Var probs;   // simplex over num_classes()
};

// Graph forward. Dropout runs only when `train_mode` and `rng` is given.
ForwardVars ForwardGraph(const MlpSpec& spec, const BoundParams& params,
                         ad::Var x, bool train_mode, std::mt19937_64* rng);

// Value-level forward returning the spec's output mode.
Tensor Forward(const ModelParams& params, const MlpSpec& spec,
               const Tensor& x, bool train_mode = false,
               std::mt19937_64* rng = nullptr);
// Pre-activation of the last layer.
Tensor Logits(const ModelParams& params, const MlpSpec& spec, const Tensor& x);
// Rows on the simplex over num_classes().
Tensor Probabilities(const ModelParams& params, const MlpSpec& spec,
                     const Tensor& x);

// Lowest index among maxima.
int Argmax(std::span<const double> v);
std::vector<int> ArgmaxRows(const Tensor& m);

// Zeroes the `fraction` of weight entries with smallest |w| across all
// layers (biases untouched). Equal magnitudes are ordered by position.
ModelParams PruneL1(const ModelParams& params, double fraction);

nlohmann::json ParamsToJson(const ModelParams& params);
ModelParams ParamsFromJson(const nlohmann::json& j);

// Checkpoint file: {spec, weights (flattened per layer), seed, epoch,
// metrics}.
struct Checkpoint {
  MlpSpec spec;
  ModelParams params;
  int epoch = 0;
  nlohmann::json metrics = nlohmann::json::object();
};
void SaveCheckpoint(const Checkpoint& c, const std::filesystem::path& path);
Checkpoint LoadCheckpoint(const std::filesystem::path& path);

}  // namespace hbc

#endif  // HBC_MODEL_H_
