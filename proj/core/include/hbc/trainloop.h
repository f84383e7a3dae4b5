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

#ifndef HBC_TRAINLOOP_H_
#define HBC_TRAINLOOP_H_

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "hbc/attacks.h"
#include "hbc/dataset.h"
#include "hbc/losses.h"
#include "hbc/model.h"
#include "hbc/optimizer.h"
#include "hbc/tensor.h"
#include "nlohmann/json.hpp"

namespace hbc {

enum class Scenario { kNc, kHbcRaw, kHbcSoft };
const char* ScenarioName(Scenario s);  // "NC", "HBC-R", "HBC-P"
Scenario ParseScenario(const std::string& name);

enum class AttackKind { kNone, kRegularized, kParameterized };
const char* AttackKindName(AttackKind k);
AttackKind ParseAttackKind(const std::string& name);

// The output a scenario releases to the server.
OutputKind ReleasedKind(Scenario s);

struct KdConfig {
  double temperature = 1.0;
  std::string teacher;  // run directory of the teacher
};

struct TrainConfig {
  Scenario scenario = Scenario::kNc;
  AttackKind attack_kind = AttackKind::kNone;
  BetaWeights betas;
  int epochs = 30;
  size_t batch = 100;
  OptimizerConfig optimizer;
  uint64_t seed = 0;
  std::optional<KdConfig> kd;

  // Overlearning probe fitted on a standard model's frozen outputs.
  int probe_epochs = 30;
  OutputKind probe_input = OutputKind::kSoft;

  void Validate() const;
  nlohmann::json ToJson() const;
  static TrainConfig FromJson(const nlohmann::json& j);
};

// How the server reads s from released outputs. A probe is a decoder fitted
// after the fact on a standard model.
struct AttackDescriptor {
  AttackKind kind = AttackKind::kNone;
  bool probe = false;
  ThresholdAttack threshold;
  MlpAttack decoder;

  bool has_decoder() const {
    return kind == AttackKind::kParameterized || probe;
  }
  nlohmann::json ToJson() const;
  static AttackDescriptor FromJson(const nlohmann::json& j);
};

struct EpochMetrics {
  int epoch = 0;
  double train_loss = 0.0;
  std::optional<double> decoder_loss;
  double val_honesty = 0.0;
  std::optional<double> val_curiosity;
  double val_mean_entropy_bits = 0.0;
  double score = 0.0;
  std::optional<double> tau;

  nlohmann::json ToJson() const;
  static EpochMetrics FromJson(const nlohmann::json& j);
};

struct RunResult {
  TrainConfig config;
  MlpSpec f_spec;
  ModelParams f_params;  // parameters of the selected epoch
  std::vector<EpochMetrics> per_epoch;
  int selected_epoch = 0;
  double test_honesty = 0.0;
  double test_curiosity = 0.0;
  double mean_entropy_bits = 0.0;
  AttackDescriptor attack;
  std::vector<std::string> checkpoint_paths;

  nlohmann::json ToJson() const;
  // Restores everything but f_params, which live in the checkpoint.
  static RunResult FromJson(const nlohmann::json& j);
};

struct TrainOptions {
  // Empty disables checkpointing. Otherwise a train state is written after
  // every epoch and the selected models at the end.
  std::filesystem::path checkpoint_dir;
  bool resume = false;
  std::function<void(const EpochMetrics&)> on_epoch;
};

// Honesty, curiosity and entropy of F on one split under an attack.
struct Evaluation {
  double honesty = 0.0;
  std::optional<double> curiosity;
  double mean_entropy_bits = 0.0;
  std::vector<double> entropies_bits;
};

// Default decoder for a released output: the Y-scaled MLP shape, reading
// log-probabilities when the output is soft.
MlpSpec DefaultAttackSpec(const MlpSpec& f_spec, OutputKind input,
                          size_t num_s);

Tensor ReleasedOutput(const MlpSpec& f_spec, const ModelParams& f,
                      const Tensor& x, OutputKind kind);

std::vector<int> DecodeSensitive(const AttackDescriptor& attack,
                                 const MlpSpec& f_spec, const ModelParams& f,
                                 const Tensor& x);

Evaluation Evaluate(const MlpSpec& f_spec, const ModelParams& f,
                    const LabeledDataset& part, const AttackDescriptor& attack);

// Fits a fresh decoder G on (outputs, s) with the decoder loss.
ModelParams FitProbe(const Tensor& outputs, const std::vector<int>& s,
                     const MlpSpec& g_spec, const OptimizerConfig& optimizer,
                     int epochs, size_t batch, uint64_t seed);

// `data` must carry train/val/test splits.
RunResult TrainStandard(const LabeledDataset& data, const MlpSpec& f_spec,
                        const TrainConfig& config,
                        const TrainOptions& options = {},
                        const MlpSpec* probe_spec = nullptr);

RunResult TrainRegularized(const LabeledDataset& data, const MlpSpec& f_spec,
                           const TrainConfig& config,
                           const TrainOptions& options = {});

RunResult TrainParameterized(const LabeledDataset& data, const MlpSpec& f_spec,
                             const MlpSpec& g_spec, const TrainConfig& config,
                             const TrainOptions& options = {});

// Dispatches on config.attack_kind; g_spec is used by parameterized runs and
// as the probe of standard runs.
RunResult Train(const LabeledDataset& data, const MlpSpec& f_spec,
                const MlpSpec& g_spec, const TrainConfig& config,
                const TrainOptions& options = {});

// Trains a student on the teacher's soft outputs over `unlabeled` only.
// `eval` supplies val/test splits for model selection and reporting, and
// curiosity is measured with the teacher's attack.
RunResult TrainKdStudent(const Tensor& unlabeled, const LabeledDataset& eval,
                         const RunResult& teacher, const MlpSpec& student_spec,
                         const TrainConfig& config,
                         const TrainOptions& options = {});

struct PruningPoint {
  double fraction = 0.0;
  double honesty = 0.0;
  double curiosity = 0.0;
};

// Prunes the run's F per fraction and re-evaluates on the test split with
// the run's attack.
std::vector<PruningPoint> RunPruningCurve(const RunResult& run,
                                          const LabeledDataset& data,
                                          const std::vector<double>& fractions);

// One logistic model trained on the convex combined log-loss. Parameters are
// the weights followed by a bias.
struct ConvexLogisticResult {
  std::vector<double> theta;
  double honesty = 0.0;
  double curiosity = 0.0;
};
ConvexLogisticResult TrainConvexLogistic(const LabeledDataset& data,
                                         double beta_y, double beta_s,
                                         const TrainConfig& config);

// Derives the generator for one (seed, epoch, stream) triple.
std::mt19937_64 EpochRng(uint64_t seed, int epoch, int stream);

}  // namespace hbc

#endif  // HBC_TRAINLOOP_H_
