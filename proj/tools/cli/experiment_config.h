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

#ifndef HBC_TOOLS_CLI_EXPERIMENT_CONFIG_H_
#define HBC_TOOLS_CLI_EXPERIMENT_CONFIG_H_

#include <array>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "hbc/dataset.h"
#include "hbc/model.h"
#include "hbc/trainloop.h"
#include "nlohmann/json.hpp"

namespace hbc::cli {

// Exactly one of `generator` and `csv` is set.
struct DatasetConfig {
  std::string generator;  // "quadrant" or "lattice"
  SynthSpec synth;
  std::string csv;
  int num_y = 0;
  int num_s = 0;
  std::vector<double> splits = {0.72, 0.08, 0.2};
  uint64_t split_seed = 0;

  void Validate() const;
  nlohmann::json ToJson() const;
  static DatasetConfig FromJson(const nlohmann::json& j);
};

// Unset specs fall back to the defaults derived from the data.
struct ModelConfig {
  std::optional<MlpSpec> f;
  std::optional<MlpSpec> g;

  nlohmann::json ToJson() const;
  static ModelConfig FromJson(const nlohmann::json& j);
};

struct SweepConfig {
  std::vector<BetaWeights> betas;
  std::vector<Scenario> scenarios;
  std::vector<double> fractions;

  bool empty() const {
    return betas.empty() && scenarios.empty() && fractions.empty();
  }
  nlohmann::json ToJson() const;
  static SweepConfig FromJson(const nlohmann::json& j);
};

struct ExperimentConfig {
  std::string id = "run";
  std::string output_dir = "runs";
  DatasetConfig dataset;
  ModelConfig model;
  TrainConfig train;
  std::optional<SweepConfig> sweep;
  size_t histogram_bins = 50;

  void Validate() const;
  nlohmann::json ToJson() const;
  static ExperimentConfig FromJson(const nlohmann::json& j);

  std::filesystem::path run_dir() const {
    return std::filesystem::path(output_dir) / id;
  }
};

ExperimentConfig LoadExperimentConfig(const std::filesystem::path& path);
nlohmann::json ReadJsonFile(const std::filesystem::path& path);
void WriteJsonFile(const nlohmann::json& j, const std::filesystem::path& path);

// Generates or loads the data and attaches splits.
LabeledDataset LoadExperimentData(const DatasetConfig& config);

MlpSpec ResolveClassifierSpec(const ModelConfig& model,
                              const LabeledDataset& data);
MlpSpec ResolveDecoderSpec(const ModelConfig& model, const MlpSpec& f_spec,
                           const TrainConfig& train,
                           const LabeledDataset& data);

}  // namespace hbc::cli

#endif  // HBC_TOOLS_CLI_EXPERIMENT_CONFIG_H_
