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

#ifndef HBC_TOOLS_CLI_COMMANDS_H_
#define HBC_TOOLS_CLI_COMMANDS_H_

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "experiment_config.h"
#include "hbc/attacks.h"
#include "hbc/tensor.h"
#include "hbc/trainloop.h"
#include "nlohmann/json.hpp"

namespace hbc::cli {

namespace fs = std::filesystem;

// Released outputs with a `raw0..` or `p0..` header.
struct OutputsTable {
  Tensor values;
  OutputKind kind = OutputKind::kSoft;
};
void WriteOutputsCsv(const Tensor& values, OutputKind kind,
                     const fs::path& path);
OutputsTable ReadOutputsCsv(const fs::path& path);
void WriteLabelsCsv(const std::vector<int>& s, const fs::path& path);
std::vector<int> ReadLabelsCsv(const fs::path& path);

// Writes the CSV and a `<csv>.meta.json` with the generator metadata.
void GenData(const ExperimentConfig& config, const fs::path& out_csv);

// Trains one run into config.run_dir().
RunResult TrainRun(const ExperimentConfig& config, bool resume);

// Reloads a finished run, including the selected F parameters.
RunResult LoadRun(const fs::path& run_dir);
ExperimentConfig LoadRunConfig(const fs::path& run_dir);

struct SweepRow {
  std::string cell;
  Scenario scenario = Scenario::kNc;
  AttackKind attack_kind = AttackKind::kNone;
  BetaWeights betas;
  bool ok = false;
  double honesty = 0.0;
  double curiosity = 0.0;
  double mean_entropy_bits = 0.0;
  int selected_epoch = 0;
  std::string error;
};

// Runs every (scenario, beta) cell on `workers` threads and writes
// <run_dir>/sweep.csv. Failed cells are marked and the rest continue.
std::vector<SweepRow> Sweep(const ExperimentConfig& config, size_t workers);
size_t WorkerCountFromEnv();

// Teacher directory comes from `teacher_dir` or config.train.kd.teacher.
RunResult KdRun(const ExperimentConfig& config, const std::string& teacher_dir);

// Writes <run_dir>/report/pruning.csv.
std::vector<PruningPoint> PruneRun(const fs::path& run_dir,
                                   const std::vector<double>& fractions);
std::vector<double> DefaultPruningFractions();

// Writes entropy_histogram.csv, roc.csv and pruning.csv into out_dir.
void Report(const std::vector<fs::path>& run_dirs, const fs::path& out_dir,
            size_t bins);

struct AuditInputs {
  fs::path outputs;
  fs::path labels;
  fs::path baseline_outputs;  // optional
  fs::path baseline_labels;   // optional
  uint64_t seed = 0;
  int probe_epochs = 30;
};
nlohmann::json Audit(const AuditInputs& in);

// Entry point shared by the executable and tests; returns the exit code.
int Main(int argc, char** argv);

}  // namespace hbc::cli

#endif  // HBC_TOOLS_CLI_COMMANDS_H_
