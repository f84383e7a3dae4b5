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

#include "commands.h"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <mutex>
#include <numeric>
#include <random>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "hbc/errors.h"
#include "hbc/losses.h"
#include "hbc/metrics.h"
#include "hbc/model.h"

namespace hbc::cli {
namespace {

std::string Num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string ShortNum(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g", v);
  return buf;
}

std::ofstream OpenOut(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  return out;
}

std::vector<std::string> SplitLine(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

std::string StripCr(std::string s) {
  if (!s.empty() && s.back() == '\r') s.pop_back();
  return s;
}

double ParseDouble(const std::string& cell, const fs::path& path,
                   size_t line) {
  char* end = nullptr;
  const double v = std::strtod(cell.c_str(), &end);
  if (cell.empty() || end != cell.c_str() + cell.size()) {
    throw ParseError(path.string() + ":" + std::to_string(line) +
                     ": not a number '" + cell + "'");
  }
  return v;
}

Tensor SoftmaxRows(const Tensor& logits) {
  Tensor out(logits.shape(), 0.0);
  for (size_t r = 0; r < logits.rows(); ++r) {
    auto in = logits.row(r);
    auto o = out.row(r);
    const double mx = *std::max_element(in.begin(), in.end());
    double total = 0.0;
    for (size_t c = 0; c < in.size(); ++c) {
      o[c] = std::exp(in[c] - mx);
      total += o[c];
    }
    for (double& v : o) v /= total;
  }
  return out;
}

Tensor SelectRows(const Tensor& x, const std::vector<size_t>& rows) {
  std::vector<double> data;
  data.reserve(rows.size() * x.cols());
  for (size_t r : rows) {
    auto src = x.row(r);
    data.insert(data.end(), src.begin(), src.end());
  }
  return Tensor::Matrix(rows.size(), x.cols(), std::move(data));
}

void CheckTrainable(const TrainConfig& train, const LabeledDataset& data) {
  train.Validate();
  if (train.attack_kind == AttackKind::kRegularized && data.num_s != 2) {
    throw InvalidArgument(
        "the regularized attack needs binary s, but the data has S = " +
        std::to_string(data.num_s));
  }
}

OutputKind PublishedKind(const TrainConfig& train) {
  return train.scenario == Scenario::kHbcRaw ? OutputKind::kRaw
                                             : OutputKind::kSoft;
}

// Writes config.json, result.json and the report files of one run.
void WriteRunFiles(const ExperimentConfig& config, const RunResult& r,
                   const LabeledDataset& data) {
  const fs::path dir = config.run_dir();
  WriteJsonFile(r.ToJson(), dir / "result.json");
  const LabeledDataset test = data.Subset(Split::kTest);
  const OutputKind kind = PublishedKind(r.config);
  WriteOutputsCsv(ReleasedOutput(r.f_spec, r.f_params, test.features, kind),
                  kind, dir / "report" / "test_outputs.csv");
  WriteLabelsCsv(test.s, dir / "report" / "test_sensitive.csv");
  WriteMetricsCsv({{config.id, "test_honesty", r.test_honesty},
                   {config.id, "test_curiosity", r.test_curiosity},
                   {config.id, "mean_entropy_bits", r.mean_entropy_bits},
                   {config.id, "selected_epoch",
                    static_cast<double>(r.selected_epoch)}},
                  dir / "report" / "metrics.csv");
}

TrainOptions RunOptions(const ExperimentConfig& config, bool resume,
                        bool verbose) {
  TrainOptions options;
  options.checkpoint_dir = config.run_dir() / "checkpoints";
  options.resume = resume;
  if (verbose) {
    options.on_epoch = [](const EpochMetrics& m) {
      std::cerr << "epoch " << m.epoch << " loss " << m.train_loss
                << " val_honesty " << m.val_honesty;
      if (m.val_curiosity) std::cerr << " val_curiosity " << *m.val_curiosity;
      std::cerr << " entropy " << m.val_mean_entropy_bits << '\n';
    };
  }
  return options;
}

RunResult TrainWithData(const ExperimentConfig& config,
                        const LabeledDataset& data, bool resume,
                        bool verbose) {
  CheckTrainable(config.train, data);
  const MlpSpec f_spec = ResolveClassifierSpec(config.model, data);
  const MlpSpec g_spec =
      ResolveDecoderSpec(config.model, f_spec, config.train, data);
  fs::create_directories(config.run_dir());
  WriteJsonFile(config.ToJson(), config.run_dir() / "config.json");
  RunResult r = Train(data, f_spec, g_spec, config.train,
                      RunOptions(config, resume, verbose));
  WriteRunFiles(config, r, data);
  return r;
}

std::string CellName(Scenario sc, const BetaWeights& b) {
  return std::string(ScenarioName(sc)) + "_bx" + ShortNum(b.x) + "_by" +
         ShortNum(b.y) + "_bs" + ShortNum(b.s);
}

// Curiosity scores for ROC: larger means s = 1 is more likely.
std::optional<std::vector<double>> SensitiveScores(const RunResult& run,
                                                   const Tensor& x) {
  if (run.attack.has_decoder()) {
    const auto& d = run.attack.decoder;
    if (d.spec.num_classes() != 2) return std::nullopt;
    const Tensor p = Probabilities(
        d.params, d.spec, ReleasedOutput(run.f_spec, run.f_params, x, d.input));
    std::vector<double> out(p.rows());
    for (size_t r = 0; r < p.rows(); ++r) out[r] = p.at(r, 1);
    return out;
  }
  if (run.attack.kind == AttackKind::kRegularized) {
    auto h = RowEntropiesBits(Probabilities(run.f_params, run.f_spec, x));
    if (run.attack.threshold.polarity == Polarity::kLowEntropyIsOne) {
      for (double& v : h) v = -v;
    }
    return h;
  }
  return std::nullopt;
}

struct AuditStats {
  size_t n = 0;
  std::optional<double> probe_delta_s;
  double mean_entropy_bits = 0.0;
  double tail_mass_over_1bit = 0.0;

  nlohmann::json ToJson() const {
    return {{"n", n},
            {"probe_delta_s", probe_delta_s ? nlohmann::json(*probe_delta_s)
                                            : nlohmann::json(nullptr)},
            {"mean_entropy_bits", mean_entropy_bits},
            {"tail_mass_over_1bit", tail_mass_over_1bit}};
  }
};

AuditStats AuditOne(const OutputsTable& table, const std::vector<int>* s,
                    uint64_t seed, int probe_epochs) {
  AuditStats st;
  st.n = table.values.rows();
  Tensor probs;
  if (table.kind == OutputKind::kSoft) {
    for (size_t r = 0; r < st.n; ++r) CheckSimplex(table.values.row(r));
    probs = table.values;
  } else {
    probs = SoftmaxRows(table.values);
  }
  const auto h = RowEntropiesBits(probs);
  st.mean_entropy_bits = MeanOf(h);
  st.tail_mass_over_1bit = TailMass(h, 1.0);
  if (s == nullptr) return st;

  if (s->size() != st.n) {
    throw ShapeError("outputs and labels differ in row count");
  }
  const int num_s = *std::max_element(s->begin(), s->end()) + 1;
  if (num_s < 2) throw InvalidArgument("labels need at least two classes");
  if (st.n < 4) throw InvalidArgument("audit needs at least 4 rows");
  std::vector<size_t> order(st.n);
  std::iota(order.begin(), order.end(), size_t{0});
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  const size_t n_fit = static_cast<size_t>(std::llround(0.75 * st.n));
  std::vector<size_t> fit(order.begin(), order.begin() + n_fit);
  std::vector<size_t> held(order.begin() + n_fit, order.end());
  std::vector<int> s_fit, s_held;
  for (size_t r : fit) s_fit.push_back((*s)[r]);
  for (size_t r : held) s_held.push_back((*s)[r]);

  MlpSpec g = DefaultDecoderSpec(table.values.cols(),
                                 static_cast<size_t>(num_s));
  if (table.kind == OutputKind::kSoft) g.input_transform = InputTransform::kLog;
  const ModelParams params =
      FitProbe(SelectRows(table.values, fit), s_fit, g, OptimizerConfig{},
               probe_epochs, 100, seed);
  st.probe_delta_s =
      Curiosity(MlpDecode(g, params, SelectRows(table.values, held)), s_held);
  return st;
}

}  // namespace

void WriteOutputsCsv(const Tensor& values, OutputKind kind,
                     const fs::path& path) {
  std::ofstream out = OpenOut(path);
  const char* prefix = kind == OutputKind::kRaw ? "raw" : "p";
  for (size_t c = 0; c < values.cols(); ++c) {
    out << (c ? "," : "") << prefix << c;
  }
  out << '\n';
  for (size_t r = 0; r < values.rows(); ++r) {
    for (size_t c = 0; c < values.cols(); ++c) {
      out << (c ? "," : "") << Num(values.at(r, c));
    }
    out << '\n';
  }
}

OutputsTable ReadOutputsCsv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw ParseError(path.string() + ": empty file");
  const auto header = SplitLine(StripCr(line));
  OutputsTable t;
  std::string prefix;
  if (!header.empty() && header[0].rfind("raw", 0) == 0) {
    prefix = "raw";
    t.kind = OutputKind::kRaw;
  } else if (!header.empty() && header[0].rfind("p", 0) == 0) {
    prefix = "p";
    t.kind = OutputKind::kSoft;
  } else {
    throw ParseError(path.string() +
                     ": header must be raw0,raw1,... or p0,p1,...");
  }
  for (size_t c = 0; c < header.size(); ++c) {
    if (header[c] != prefix + std::to_string(c)) {
      throw ParseError(path.string() + ": header column " + std::to_string(c) +
                       " is '" + header[c] + "', expected '" + prefix +
                       std::to_string(c) + "'");
    }
  }
  const size_t cols = header.size();
  std::vector<double> data;
  size_t rows = 0, line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    line = StripCr(line);
    if (line.empty()) continue;
    const auto cells = SplitLine(line);
    if (cells.size() != cols) {
      throw ParseError(path.string() + ":" + std::to_string(line_no) +
                       ": expected " + std::to_string(cols) + " columns");
    }
    for (const auto& cell : cells) data.push_back(ParseDouble(cell, path, line_no));
    ++rows;
  }
  if (rows == 0) throw ParseError(path.string() + ": no rows");
  t.values = Tensor::Matrix(rows, cols, std::move(data));
  return t;
}

void WriteLabelsCsv(const std::vector<int>& s, const fs::path& path) {
  std::ofstream out = OpenOut(path);
  out << "s\n";
  for (int v : s) out << v << '\n';
}

std::vector<int> ReadLabelsCsv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line) || StripCr(line) != "s") {
    throw ParseError(path.string() + ": header must be 's'");
  }
  std::vector<int> s;
  size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    line = StripCr(line);
    if (line.empty()) continue;
    const double v = ParseDouble(line, path, line_no);
    if (v < 0 || v != std::floor(v)) {
      throw ParseError(path.string() + ":" + std::to_string(line_no) +
                       ": labels are non-negative integers");
    }
    s.push_back(static_cast<int>(v));
  }
  if (s.empty()) throw ParseError(path.string() + ": no labels");
  return s;
}

void GenData(const ExperimentConfig& config, const fs::path& out_csv) {
  if (config.dataset.generator.empty()) {
    throw InvalidArgument("gen-data needs a generator dataset block");
  }
  const LabeledDataset data = LoadExperimentData(config.dataset);
  if (out_csv.has_parent_path()) fs::create_directories(out_csv.parent_path());
  SaveCsv(data, out_csv);
  WriteJsonFile(data.metadata, fs::path(out_csv.string() + ".meta.json"));
}

RunResult TrainRun(const ExperimentConfig& config, bool resume) {
  config.Validate();
  const LabeledDataset data = LoadExperimentData(config.dataset);
  return TrainWithData(config, data, resume, /*verbose=*/false);
}

ExperimentConfig LoadRunConfig(const fs::path& run_dir) {
  return ExperimentConfig::FromJson(ReadJsonFile(run_dir / "config.json"));
}

RunResult LoadRun(const fs::path& run_dir) {
  RunResult r = RunResult::FromJson(ReadJsonFile(run_dir / "result.json"));
  const Checkpoint f = LoadCheckpoint(run_dir / "checkpoints" / "best_f.json");
  CheckCompatible(r.f_spec, f.params);
  r.f_params = f.params;
  return r;
}

size_t WorkerCountFromEnv() {
  if (const char* env = std::getenv("HBC_WORKERS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<size_t>(v);
    throw InvalidArgument("HBC_WORKERS must be a positive integer");
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

std::vector<SweepRow> Sweep(const ExperimentConfig& config, size_t workers) {
  config.Validate();
  if (!config.sweep) throw InvalidArgument("config has no sweep block");
  const SweepConfig& sweep = *config.sweep;
  const auto scenarios = sweep.scenarios.empty()
                             ? std::vector<Scenario>{config.train.scenario}
                             : sweep.scenarios;
  const auto betas = sweep.betas.empty()
                         ? std::vector<BetaWeights>{config.train.betas}
                         : sweep.betas;
  const LabeledDataset data = LoadExperimentData(config.dataset);

  std::vector<SweepRow> rows;
  for (Scenario sc : scenarios) {
    for (const auto& b : betas) {
      SweepRow row;
      row.cell = CellName(sc, b);
      row.scenario = sc;
      row.betas = b;
      if (sc == Scenario::kNc) {
        row.attack_kind = AttackKind::kNone;
      } else if (config.train.attack_kind == AttackKind::kNone) {
        row.attack_kind = AttackKind::kParameterized;
      } else {
        row.attack_kind = config.train.attack_kind;
      }
      rows.push_back(row);
    }
  }

  std::atomic<size_t> next{0};
  auto work = [&] {
    for (size_t i = next++; i < rows.size(); i = next++) {
      SweepRow& row = rows[i];
      try {
        ExperimentConfig cell = config;
        cell.sweep.reset();
        cell.id = row.cell;
        cell.output_dir = (config.run_dir() / "cells").string();
        cell.train.scenario = row.scenario;
        cell.train.attack_kind = row.attack_kind;
        cell.train.betas = row.betas;
        const RunResult r = TrainWithData(cell, data, false, false);
        row.ok = true;
        row.honesty = r.test_honesty;
        row.curiosity = r.test_curiosity;
        row.mean_entropy_bits = r.mean_entropy_bits;
        row.selected_epoch = r.selected_epoch;
      } catch (const std::exception& e) {
        row.ok = false;
        row.error = e.what();
      }
    }
  };
  const size_t n_threads = std::max<size_t>(1, std::min(workers, rows.size()));
  std::vector<std::thread> pool;
  for (size_t t = 1; t < n_threads; ++t) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();

  std::ofstream out = OpenOut(config.run_dir() / "sweep.csv");
  out << "cell,scenario,attack_kind,beta_x,beta_y,beta_s,status,honesty,"
         "curiosity,mean_entropy_bits,selected_epoch,error\n";
  for (const auto& r : rows) {
    std::string err = r.error;
    std::replace(err.begin(), err.end(), ',', ';');
    std::replace(err.begin(), err.end(), '\n', ' ');
    out << r.cell << ',' << ScenarioName(r.scenario) << ','
        << AttackKindName(r.attack_kind) << ',' << Num(r.betas.x) << ','
        << Num(r.betas.y) << ',' << Num(r.betas.s) << ','
        << (r.ok ? "ok" : "failed") << ',';
    if (r.ok) {
      out << Num(r.honesty) << ',' << Num(r.curiosity) << ','
          << Num(r.mean_entropy_bits) << ',' << r.selected_epoch;
    } else {
      out << ",,,";
    }
    out << ',' << err << '\n';
  }
  return rows;
}

RunResult KdRun(const ExperimentConfig& config,
                const std::string& teacher_dir) {
  config.Validate();
  std::string teacher_path = teacher_dir;
  if (teacher_path.empty() && config.train.kd) {
    teacher_path = config.train.kd->teacher;
  }
  if (teacher_path.empty()) {
    throw InvalidArgument(
        "kd needs a teacher run directory (--teacher or train.kd.teacher)");
  }
  const RunResult teacher = LoadRun(teacher_path);
  const LabeledDataset data = LoadExperimentData(config.dataset);
  const MlpSpec student_spec =
      config.model.f ? *config.model.f : HalfWidth(teacher.f_spec);
  ExperimentConfig student_config = config;
  if (!student_config.train.kd) student_config.train.kd = KdConfig{};
  student_config.train.kd->teacher = teacher_path;
  const TrainConfig& train = student_config.train;
  train.Validate();

  fs::create_directories(student_config.run_dir());
  WriteJsonFile(student_config.ToJson(),
                student_config.run_dir() / "config.json");
  const Tensor unlabeled = data.Subset(Split::kTrain).features;
  RunResult r = TrainKdStudent(unlabeled, data, teacher, student_spec, train,
                               RunOptions(student_config, false, false));
  WriteRunFiles(student_config, r, data);
  return r;
}

std::vector<double> DefaultPruningFractions() {
  std::vector<double> f;
  for (int i = 0; i <= 9; ++i) f.push_back(i / 10.0);
  return f;
}

std::vector<PruningPoint> PruneRun(const fs::path& run_dir,
                                   const std::vector<double>& fractions) {
  const ExperimentConfig config = LoadRunConfig(run_dir);
  const RunResult run = LoadRun(run_dir);
  const LabeledDataset data = LoadExperimentData(config.dataset);
  const auto curve = RunPruningCurve(run, data, fractions);
  std::ofstream out = OpenOut(run_dir / "report" / "pruning.csv");
  out << "run_id,fraction,metric,value\n";
  const std::string id = run_dir.filename().string();
  for (const auto& p : curve) {
    out << id << ',' << Num(p.fraction) << ",honesty," << Num(p.honesty)
        << '\n';
    out << id << ',' << Num(p.fraction) << ",curiosity," << Num(p.curiosity)
        << '\n';
  }
  return curve;
}

void Report(const std::vector<fs::path>& run_dirs, const fs::path& out_dir,
            size_t bins) {
  if (run_dirs.empty()) throw InvalidArgument("report needs at least one run");
  std::ofstream hist = OpenOut(out_dir / "entropy_histogram.csv");
  std::ofstream roc = OpenOut(out_dir / "roc.csv");
  std::ofstream prune = OpenOut(out_dir / "pruning.csv");
  hist << "run_id,bin_lo,bin_hi,count,density\n";
  roc << "run_id,threshold,fpr,tpr\n";
  prune << "run_id,fraction,metric,value\n";
  std::vector<MetricRow> summary;

  for (const auto& dir : run_dirs) {
    const std::string id = dir.filename().string();
    const ExperimentConfig config = LoadRunConfig(dir);
    const RunResult run = LoadRun(dir);
    const LabeledDataset data = LoadExperimentData(config.dataset);
    const LabeledDataset test = data.Subset(Split::kTest);

    const Tensor probs = Probabilities(run.f_params, run.f_spec, test.features);
    const EntropyHistogram h = MakeEntropyHistogram(probs, bins);
    for (size_t b = 0; b < h.counts.size(); ++b) {
      hist << id << ',' << Num(h.edges[b]) << ',' << Num(h.edges[b + 1]) << ','
           << h.counts[b] << ',' << Num(h.density[b]) << '\n';
    }
    summary.push_back({id, "mean_entropy_bits", h.mean});
    summary.push_back({id, "std_entropy_bits", h.std});
    summary.push_back(
        {id, "tail_mass_over_1bit", TailMass(RowEntropiesBits(probs), 1.0)});

    const auto scores = SensitiveScores(run, test.features);
    const bool both = std::count(test.s.begin(), test.s.end(), 1) > 0 &&
                      std::count(test.s.begin(), test.s.end(), 0) > 0;
    if (scores && data.num_s == 2 && both) {
      for (const auto& p : RocCurve(*scores, test.s)) {
        roc << id << ',' << Num(p.threshold) << ',' << Num(p.fpr) << ','
            << Num(p.tpr) << '\n';
      }
      summary.push_back({id, "auc", Auc(*scores, test.s)});
    }

    for (const auto& p :
         RunPruningCurve(run, data, DefaultPruningFractions())) {
      prune << id << ',' << Num(p.fraction) << ",honesty," << Num(p.honesty)
            << '\n';
      prune << id << ',' << Num(p.fraction) << ",curiosity,"
            << Num(p.curiosity) << '\n';
    }
  }
  WriteMetricsCsv(summary, out_dir / "summary.csv");
}

nlohmann::json Audit(const AuditInputs& in) {
  const OutputsTable submitted = ReadOutputsCsv(in.outputs);
  const std::vector<int> labels = ReadLabelsCsv(in.labels);
  const AuditStats main = AuditOne(submitted, &labels, in.seed, in.probe_epochs);
  nlohmann::json report = main.ToJson();
  report["outputs"] = OutputKindName(submitted.kind);
  report["baseline"] = nullptr;
  report["deltas"] = nullptr;
  if (!in.baseline_outputs.empty()) {
    const OutputsTable base = ReadOutputsCsv(in.baseline_outputs);
    std::vector<int> base_labels;
    if (!in.baseline_labels.empty()) base_labels = ReadLabelsCsv(in.baseline_labels);
    const AuditStats b = AuditOne(base, base_labels.empty() ? nullptr : &base_labels,
                                  in.seed, in.probe_epochs);
    report["baseline"] = b.ToJson();
    nlohmann::json deltas = {
        {"mean_entropy_bits", main.mean_entropy_bits - b.mean_entropy_bits},
        {"tail_mass_over_1bit",
         main.tail_mass_over_1bit - b.tail_mass_over_1bit},
        {"probe_delta_s", nullptr}};
    if (b.probe_delta_s) {
      deltas["probe_delta_s"] = *main.probe_delta_s - *b.probe_delta_s;
    }
    report["deltas"] = deltas;
  }
  return report;
}

int Main(int argc, char** argv) {
  CLI::App app{"hbc: train, attack and audit classifiers whose outputs may "
               "leak a sensitive attribute"};
  app.require_subcommand(1);

  std::string config_path, out_path, teacher, run_dir, out_dir;
  std::vector<std::string> runs;
  std::vector<double> fractions;
  bool resume = false;
  AuditInputs audit;

  auto* gen = app.add_subcommand("gen-data", "Generate a synthetic dataset CSV");
  gen->add_option("-c,--config", config_path, "Experiment config")->required();
  gen->add_option("-o,--out", out_path, "Output CSV (default <run>/data.csv)");

  auto* train = app.add_subcommand("train", "Train one run");
  train->add_option("-c,--config", config_path, "Experiment config")->required();
  train->add_flag("--resume", resume, "Continue from the last checkpoint");

  auto* sweep = app.add_subcommand(
      "sweep", "Train every scenario x beta cell (HBC_WORKERS threads)");
  sweep->add_option("-c,--config", config_path, "Experiment config")->required();

  auto* kd = app.add_subcommand("kd", "Distil a student from a teacher run");
  kd->add_option("-c,--config", config_path, "Experiment config")->required();
  kd->add_option("--teacher", teacher, "Teacher run directory");

  auto* prune = app.add_subcommand("prune", "Pruning curve of a finished run");
  prune->add_option("-r,--run", run_dir, "Run directory")->required();
  prune->add_option("--fractions", fractions, "Fractions (default 0,.1,...,.9)");

  auto* report = app.add_subcommand("report", "Plot-ready CSVs for runs");
  report->add_option("-r,--run", runs, "Run directories")->required();
  report->add_option("-o,--out", out_dir, "Output directory");
  size_t bins = kDefaultHistogramBins;
  report->add_option("--bins", bins, "Histogram bins");

  auto* aud = app.add_subcommand("audit", "Probe released outputs for s");
  aud->add_option("--outputs", audit.outputs, "Outputs CSV (raw*/p* header)")
      ->required();
  aud->add_option("--labels", audit.labels, "Sensitive labels CSV")->required();
  aud->add_option("--baseline-outputs", audit.baseline_outputs,
                  "Baseline outputs CSV");
  aud->add_option("--baseline-labels", audit.baseline_labels,
                  "Baseline sensitive labels CSV");
  aud->add_option("--seed", audit.seed, "Probe seed");
  aud->add_option("--probe-epochs", audit.probe_epochs, "Probe epochs");
  aud->add_option("-o,--out", out_path, "Report JSON (default stdout)");

  auto* print = app.add_subcommand("print-config", "Print the default config");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (*gen) {
      const auto config = LoadExperimentConfig(config_path);
      const fs::path out =
          out_path.empty() ? config.run_dir() / "data.csv" : fs::path(out_path);
      GenData(config, out);
      std::cout << "wrote " << out.string() << '\n';
    } else if (*train) {
      const auto config = LoadExperimentConfig(config_path);
      config.Validate();
      const LabeledDataset data = LoadExperimentData(config.dataset);
      const RunResult r = TrainWithData(config, data, resume, /*verbose=*/true);
      std::cout << config.id << ": honesty " << r.test_honesty
                << " curiosity " << r.test_curiosity << " entropy "
                << r.mean_entropy_bits << " (epoch " << r.selected_epoch
                << ")\n";
    } else if (*sweep) {
      const auto rows =
          Sweep(LoadExperimentConfig(config_path), WorkerCountFromEnv());
      bool all_ok = true;
      for (const auto& r : rows) {
        std::cout << r.cell << ": "
                  << (r.ok ? "ok" : "failed: " + r.error) << '\n';
        all_ok = all_ok && r.ok;
      }
      return all_ok ? 0 : 1;
    } else if (*kd) {
      const RunResult r = KdRun(LoadExperimentConfig(config_path), teacher);
      std::cout << "student: honesty " << r.test_honesty << " curiosity "
                << r.test_curiosity << '\n';
    } else if (*prune) {
      const auto curve = PruneRun(
          run_dir, fractions.empty() ? DefaultPruningFractions() : fractions);
      for (const auto& p : curve) {
        std::cout << p.fraction << ": honesty " << p.honesty << " curiosity "
                  << p.curiosity << '\n';
      }
    } else if (*report) {
      std::vector<fs::path> dirs(runs.begin(), runs.end());
      const fs::path out = out_dir.empty() ? dirs.front() / "report"
                                           : fs::path(out_dir);
      Report(dirs, out, bins);
      std::cout << "wrote " << out.string() << '\n';
    } else if (*aud) {
      const nlohmann::json r = Audit(audit);
      if (out_path.empty()) {
        std::cout << r.dump(2) << '\n';
      } else {
        WriteJsonFile(r, out_path);
      }
    } else if (*print) {
      ExperimentConfig config;
      config.dataset.generator = "quadrant";
      std::cout << config.ToJson().dump(2) << '\n';
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

}  // namespace hbc::cli
