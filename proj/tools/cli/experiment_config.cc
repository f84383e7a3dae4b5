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

#include "experiment_config.h"

#include <fstream>

#include "hbc/errors.h"

namespace hbc::cli {
namespace {

nlohmann::json SpecOrNull(const std::optional<MlpSpec>& spec) {
  return spec ? spec->ToJson() : nlohmann::json(nullptr);
}

std::optional<MlpSpec> SpecFromJson(const nlohmann::json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return MlpSpec::FromJson(j.at(key));
}

}  // namespace

void DatasetConfig::Validate() const {
  const bool has_gen = !generator.empty();
  const bool has_csv = !csv.empty();
  if (has_gen == has_csv) {
    throw InvalidArgument(
        "dataset needs exactly one source: 'generator' or 'csv'");
  }
  if (has_gen && generator != "quadrant" && generator != "lattice") {
    throw InvalidArgument("unknown generator '" + generator +
                          "' (quadrant, lattice)");
  }
  if (splits.size() != 3) {
    throw InvalidArgument("splits must list train, val and test fractions");
  }
}

nlohmann::json DatasetConfig::ToJson() const {
  nlohmann::json j = {{"splits", splits}, {"split_seed", split_seed}};
  if (!generator.empty()) {
    j["generator"] = generator;
    j["spec"] = synth.ToJson();
  } else {
    j["csv"] = csv;
    j["num_y"] = num_y;
    j["num_s"] = num_s;
  }
  return j;
}

DatasetConfig DatasetConfig::FromJson(const nlohmann::json& j) {
  DatasetConfig d;
  d.generator = j.value("generator", std::string());
  if (j.contains("spec")) d.synth = SynthSpec::FromJson(j.at("spec"));
  d.csv = j.value("csv", std::string());
  d.num_y = j.value("num_y", 0);
  d.num_s = j.value("num_s", 0);
  d.splits = j.value("splits", d.splits);
  d.split_seed = j.value("split_seed", d.split_seed);
  d.Validate();
  return d;
}

nlohmann::json ModelConfig::ToJson() const {
  return {{"f", SpecOrNull(f)}, {"g", SpecOrNull(g)}};
}

ModelConfig ModelConfig::FromJson(const nlohmann::json& j) {
  ModelConfig m;
  m.f = SpecFromJson(j, "f");
  m.g = SpecFromJson(j, "g");
  return m;
}

nlohmann::json SweepConfig::ToJson() const {
  nlohmann::json b = nlohmann::json::array();
  for (const auto& w : betas) b.push_back({w.x, w.y, w.s});
  nlohmann::json s = nlohmann::json::array();
  for (Scenario sc : scenarios) s.push_back(ScenarioName(sc));
  return {{"betas", b}, {"scenarios", s}, {"fractions", fractions}};
}

SweepConfig SweepConfig::FromJson(const nlohmann::json& j) {
  SweepConfig s;
  for (const auto& b : j.value("betas", nlohmann::json::array())) {
    const auto v = b.get<std::vector<double>>();
    if (v.size() != 3) {
      throw ParseError("sweep betas are [beta_x, beta_y, beta_s] triples");
    }
    s.betas.push_back({v[0], v[1], v[2]});
  }
  for (const auto& name : j.value("scenarios", nlohmann::json::array())) {
    s.scenarios.push_back(ParseScenario(name.get<std::string>()));
  }
  s.fractions = j.value("fractions", std::vector<double>{});
  for (const char* key : {"betas", "scenarios", "fractions"}) {
    if (j.contains(key) && j.at(key).empty()) {
      throw InvalidArgument(std::string("sweep list '") + key +
                            "' must not be empty");
    }
  }
  return s;
}

void ExperimentConfig::Validate() const {
  if (id.empty() || id.find('/') != std::string::npos) {
    throw InvalidArgument("run id must be a non-empty name without '/'");
  }
  dataset.Validate();
  train.Validate();
  if (histogram_bins == 0) throw InvalidArgument("histogram bins must be > 0");
}

nlohmann::json ExperimentConfig::ToJson() const {
  return {{"id", id},
          {"output_dir", output_dir},
          {"dataset", dataset.ToJson()},
          {"model", model.ToJson()},
          {"train", train.ToJson()},
          {"sweep", sweep ? sweep->ToJson() : nlohmann::json(nullptr)},
          {"histogram_bins", histogram_bins}};
}

ExperimentConfig ExperimentConfig::FromJson(const nlohmann::json& j) {
  ExperimentConfig c;
  try {
    c.id = j.value("id", c.id);
    c.output_dir = j.value("output_dir", c.output_dir);
    if (!j.contains("dataset")) throw InvalidArgument("config has no dataset");
    c.dataset = DatasetConfig::FromJson(j.at("dataset"));
    if (j.contains("model")) c.model = ModelConfig::FromJson(j.at("model"));
    if (j.contains("train")) c.train = TrainConfig::FromJson(j.at("train"));
    if (j.contains("sweep") && !j.at("sweep").is_null()) {
      c.sweep = SweepConfig::FromJson(j.at("sweep"));
    }
    c.histogram_bins = j.value("histogram_bins", c.histogram_bins);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("bad experiment config: ") + e.what());
  }
  c.Validate();
  return c;
}

nlohmann::json ReadJsonFile(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

void WriteJsonFile(const nlohmann::json& j, const std::filesystem::path& path) {
  if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path());
  }
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

ExperimentConfig LoadExperimentConfig(const std::filesystem::path& path) {
  return ExperimentConfig::FromJson(ReadJsonFile(path));
}

LabeledDataset LoadExperimentData(const DatasetConfig& config) {
  config.Validate();
  LabeledDataset data;
  if (config.generator == "quadrant") {
    data = GenQuadrant(config.synth);
  } else if (config.generator == "lattice") {
    data = GenLattice(config.synth);
  } else {
    data = LoadCsv(config.csv, config.num_y, config.num_s);
  }
  if (data.has_splits()) return data;
  return SplitDataset(data, config.splits, config.split_seed);
}

MlpSpec ResolveClassifierSpec(const ModelConfig& model,
                              const LabeledDataset& data) {
  if (model.f) return *model.f;
  return DefaultClassifierSpec(data.num_features(),
                               static_cast<size_t>(data.num_y));
}

MlpSpec ResolveDecoderSpec(const ModelConfig& model, const MlpSpec& f_spec,
                           const TrainConfig& train,
                           const LabeledDataset& data) {
  if (model.g) return *model.g;
  const OutputKind input = train.attack_kind == AttackKind::kNone
                               ? train.probe_input
                               : ReleasedKind(train.scenario);
  return DefaultAttackSpec(f_spec, input, static_cast<size_t>(data.num_s));
}

}  // namespace hbc::cli
