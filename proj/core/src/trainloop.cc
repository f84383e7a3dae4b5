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

#include "hbc/trainloop.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <memory>
#include <numeric>
#include <random>
#include <sstream>

#include "hbc/autodiff.h"
#include "hbc/errors.h"
#include "hbc/metrics.h"

namespace hbc {
namespace {

constexpr double kDivergenceLimit = 1e4;

enum Stream : int {
  kInitF = 1,
  kInitG = 2,
  kShuffle = 3,
  kDropout = 4,
  kProbeInit = 5,
  kProbeShuffle = 6,
  kProbeDropout = 7,
};

uint64_t DerivedSeed(uint64_t seed, int stream) {
  return EpochRng(seed, 0, stream)();
}

Tensor GatherRows(const Tensor& x, const std::vector<size_t>& rows) {
  const size_t c = x.cols();
  std::vector<double> out;
  out.reserve(rows.size() * c);
  for (size_t r : rows) {
    auto src = x.row(r);
    out.insert(out.end(), src.begin(), src.end());
  }
  return Tensor::Matrix(rows.size(), c, std::move(out));
}

std::vector<int> GatherLabels(const std::vector<int>& v,
                              const std::vector<size_t>& rows) {
  std::vector<int> out;
  out.reserve(rows.size());
  for (size_t r : rows) out.push_back(v[r]);
  return out;
}

std::vector<Tensor> Gradients(const ad::Graph& g, const BoundParams& bound) {
  std::vector<Tensor> grads;
  for (size_t i = 0; i < bound.weights.size(); ++i) {
    grads.push_back(g.grad(bound.weights[i].id));
    grads.push_back(g.grad(bound.biases[i].id));
  }
  return grads;
}

void CheckLoss(double loss, const char* what, int epoch, size_t batch) {
  if (!std::isfinite(loss) || loss > kDivergenceLimit) {
    std::ostringstream msg;
    msg << what << " diverged at epoch " << epoch << ", batch " << batch
        << " (loss " << loss << ")";
    throw DivergenceError(msg.str());
  }
}

void RequireSplits(const LabeledDataset& data) {
  if (!data.has_splits()) {
    throw InvalidArgument("training data needs train/val/test splits");
  }
}

void WriteJsonAtomic(const nlohmann::json& j,
                     const std::filesystem::path& path) {
  const auto tmp = std::filesystem::path(path.string() + ".tmp");
  {
    std::ofstream out(tmp);
    if (!out) throw Error("cannot write " + tmp.string());
    out << j.dump(1) << '\n';
  }
  std::filesystem::rename(tmp, path);
}

nlohmann::json OptionalToJson(const std::optional<double>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

std::optional<double> OptionalFromJson(const nlohmann::json& j,
                                       const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<double>();
}

// Mutable state of one training run; everything needed to resume.
struct LoopState {
  ModelParams f;
  ModelParams g;
  std::unique_ptr<Optimizer> f_opt;
  std::unique_ptr<Optimizer> g_opt;
  std::vector<EpochMetrics> history;
  int next_epoch = 1;

  int best_epoch = 0;
  double best_score = -std::numeric_limits<double>::infinity();
  ModelParams best_f;
  ModelParams best_g;
  ThresholdAttack best_threshold;
  ThresholdAttack threshold;  // selected on the latest validation pass

  nlohmann::json ToJson(const nlohmann::json& config) const {
    nlohmann::json history_json = nlohmann::json::array();
    for (const auto& e : history) history_json.push_back(e.ToJson());
    nlohmann::json j = {{"config", config},
                        {"next_epoch", next_epoch},
                        {"f", ParamsToJson(f)},
                        {"f_opt", f_opt->StateToJson()},
                        {"history", history_json},
                        {"best",
                         {{"epoch", best_epoch},
                          {"score", best_score},
                          {"f", ParamsToJson(best_f)},
                          {"threshold", best_threshold.ToJson()}}}};
    if (g_opt) {
      j["g"] = ParamsToJson(g);
      j["g_opt"] = g_opt->StateToJson();
      j["best"]["g"] = ParamsToJson(best_g);
    }
    return j;
  }

  void Load(const nlohmann::json& j) {
    next_epoch = j.at("next_epoch").get<int>();
    f = ParamsFromJson(j.at("f"));
    f_opt->LoadState(j.at("f_opt"));
    history.clear();
    for (const auto& e : j.at("history")) {
      history.push_back(EpochMetrics::FromJson(e));
    }
    const auto& best = j.at("best");
    best_epoch = best.at("epoch").get<int>();
    best_score = best.at("score").get<double>();
    best_f = ParamsFromJson(best.at("f"));
    best_threshold = ThresholdAttack::FromJson(best.at("threshold"));
    if (g_opt) {
      g = ParamsFromJson(j.at("g"));
      g_opt->LoadState(j.at("g_opt"));
      best_g = ParamsFromJson(best.at("g"));
    }
  }
};

struct StepLoss {
  double f_loss = 0.0;
  std::optional<double> g_loss;
};

using StepFn = std::function<StepLoss(const std::vector<size_t>& rows,
                                      std::mt19937_64& rng)>;
// Fills the validation fields of an epoch record; may set `tau`.
using ValidateFn = std::function<void(EpochMetrics&)>;

double Score(const BetaWeights& betas, const EpochMetrics& m) {
  return betas.y * m.val_honesty + betas.s * m.val_curiosity.value_or(0.0);
}

// Runs the epochs of `config`, keeping the best validation snapshot. Ties
// keep the later epoch.
void RunEpochs(const TrainConfig& config, const BetaWeights& selection_betas,
               const TrainOptions& options, size_t n_train, LoopState& st,
               const StepFn& step, const ValidateFn& validate) {
  const nlohmann::json config_json = config.ToJson();
  const auto state_path = options.checkpoint_dir.empty()
                              ? std::filesystem::path()
                              : options.checkpoint_dir / "state.json";
  if (!state_path.empty()) {
    std::filesystem::create_directories(options.checkpoint_dir);
    if (options.resume && std::filesystem::exists(state_path)) {
      std::ifstream in(state_path);
      nlohmann::json j;
      try {
        in >> j;
      } catch (const nlohmann::json::exception& e) {
        throw ParseError("bad train state " + state_path.string() + ": " +
                         e.what());
      }
      // Epoch streams do not depend on the total, so a run may be extended.
      nlohmann::json saved = j.at("config"), current = config_json;
      saved.erase("epochs");
      current.erase("epochs");
      if (saved != current) {
        throw InvalidArgument("train state at " + state_path.string() +
                              " was written by a different config");
      }
      st.Load(j);
    }
  }

  std::vector<size_t> order(n_train);
  for (int epoch = st.next_epoch; epoch <= config.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), size_t{0});
    auto shuffle_rng = EpochRng(config.seed, epoch, kShuffle);
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    auto dropout_rng = EpochRng(config.seed, epoch, kDropout);

    double f_total = 0.0, g_total = 0.0;
    size_t batches = 0;
    bool has_g = false;
    for (size_t start = 0; start < n_train; start += config.batch) {
      const size_t end = std::min(n_train, start + config.batch);
      std::vector<size_t> rows(order.begin() + start, order.begin() + end);
      StepLoss loss;
      try {
        loss = step(rows, dropout_rng);
      } catch (const NumericError& e) {
        std::ostringstream msg;
        msg << "training diverged at epoch " << epoch << ", batch " << batches
            << ": " << e.what();
        throw DivergenceError(msg.str());
      }
      CheckLoss(loss.f_loss, "classifier loss", epoch, batches);
      f_total += loss.f_loss;
      if (loss.g_loss) {
        CheckLoss(*loss.g_loss, "decoder loss", epoch, batches);
        g_total += *loss.g_loss;
        has_g = true;
      }
      ++batches;
    }

    EpochMetrics m;
    m.epoch = epoch;
    m.train_loss = batches ? f_total / batches : 0.0;
    if (has_g) m.decoder_loss = g_total / batches;
    validate(m);
    m.score = Score(selection_betas, m);
    if (m.score >= st.best_score) {
      st.best_score = m.score;
      st.best_epoch = epoch;
      st.best_f = st.f;
      st.best_g = st.g;
      st.best_threshold = st.threshold;
    }
    st.history.push_back(m);
    st.next_epoch = epoch + 1;
    if (!state_path.empty()) WriteJsonAtomic(st.ToJson(config_json), state_path);
    if (options.on_epoch) options.on_epoch(m);
  }
}

ForwardVars ForwardBatch(ad::Graph& g, const MlpSpec& spec,
                         const BoundParams& bound, const Tensor& x,
                         std::mt19937_64& rng) {
  return ForwardGraph(spec, bound, g.Constant(x), /*train_mode=*/true, &rng);
}

ad::Var ReleasedVar(const ForwardVars& out, OutputKind kind) {
  return kind == OutputKind::kRaw ? out.logits : out.probs;
}

size_t ReleasedWidth(const MlpSpec& f_spec, OutputKind kind) {
  return kind == OutputKind::kRaw ? f_spec.output_width()
                                  : f_spec.num_classes();
}

void CheckDecoderSpec(const MlpSpec& f_spec, const MlpSpec& g_spec,
                      OutputKind kind, int num_s) {
  g_spec.Validate();
  if (g_spec.input_width() != ReleasedWidth(f_spec, kind)) {
    throw InvalidArgument("decoder input width " +
                          std::to_string(g_spec.input_width()) +
                          " does not match the released output width " +
                          std::to_string(ReleasedWidth(f_spec, kind)));
  }
  if (g_spec.num_classes() != static_cast<size_t>(num_s)) {
    throw InvalidArgument("decoder must output S classes");
  }
  if (kind == OutputKind::kRaw &&
      g_spec.input_transform == InputTransform::kLog) {
    throw InvalidArgument("a log input transform needs soft outputs");
  }
}

void CheckClassifierSpec(const MlpSpec& f_spec, const LabeledDataset& data) {
  f_spec.Validate();
  if (f_spec.input_width() != data.num_features()) {
    throw InvalidArgument("classifier input width does not match features");
  }
  if (f_spec.num_classes() != static_cast<size_t>(data.num_y)) {
    throw InvalidArgument("classifier must output Y classes");
  }
}

// Fills the result fields shared by every procedure from the loop state.
RunResult Finish(const TrainConfig& config, const MlpSpec& f_spec,
                 const LoopState& st, AttackDescriptor attack,
                 const LabeledDataset& test, const TrainOptions& options) {
  RunResult r;
  r.config = config;
  r.f_spec = f_spec;
  r.f_params = st.best_f;
  r.per_epoch = st.history;
  r.selected_epoch = st.best_epoch;
  r.attack = std::move(attack);
  const Evaluation ev = Evaluate(f_spec, r.f_params, test, r.attack);
  r.test_honesty = ev.honesty;
  r.test_curiosity = ev.curiosity.value_or(0.0);
  r.mean_entropy_bits = ev.mean_entropy_bits;
  if (!options.checkpoint_dir.empty()) {
    const auto dir_name = options.checkpoint_dir.filename();
    SaveCheckpoint({f_spec, r.f_params, r.selected_epoch,
                    {{"val_score", st.best_score}}},
                   options.checkpoint_dir / "best_f.json");
    r.checkpoint_paths.push_back((dir_name / "state.json").generic_string());
    r.checkpoint_paths.push_back((dir_name / "best_f.json").generic_string());
    if (r.attack.has_decoder()) {
      SaveCheckpoint({r.attack.decoder.spec, r.attack.decoder.params,
                      r.selected_epoch, nlohmann::json::object()},
                     options.checkpoint_dir / "best_g.json");
      r.checkpoint_paths.push_back((dir_name / "best_g.json").generic_string());
    }
  }
  return r;
}

LoopState MakeState(const MlpSpec& f_spec, const MlpSpec* g_spec,
                    const TrainConfig& config) {
  LoopState st;
  st.f = InitParams(f_spec, DerivedSeed(config.seed, kInitF));
  st.f_opt = std::make_unique<Optimizer>(config.optimizer, st.f);
  if (g_spec) {
    st.g = InitParams(*g_spec, DerivedSeed(config.seed, kInitG));
    st.g_opt = std::make_unique<Optimizer>(config.optimizer, st.g);
  }
  st.best_f = st.f;
  st.best_g = st.g;
  return st;
}

}  // namespace

std::mt19937_64 EpochRng(uint64_t seed, int epoch, int stream) {
  std::seed_seq seq{static_cast<uint32_t>(seed & 0xffffffffu),
                    static_cast<uint32_t>(seed >> 32),
                    static_cast<uint32_t>(epoch),
                    static_cast<uint32_t>(stream)};
  return std::mt19937_64(seq);
}

const char* ScenarioName(Scenario s) {
  switch (s) {
    case Scenario::kNc:
      return "NC";
    case Scenario::kHbcRaw:
      return "HBC-R";
    case Scenario::kHbcSoft:
      return "HBC-P";
  }
  return "?";
}

Scenario ParseScenario(const std::string& name) {
  if (name == "NC") return Scenario::kNc;
  if (name == "HBC-R") return Scenario::kHbcRaw;
  if (name == "HBC-P") return Scenario::kHbcSoft;
  throw ParseError("unknown scenario '" + name + "' (NC, HBC-R, HBC-P)");
}

const char* AttackKindName(AttackKind k) {
  switch (k) {
    case AttackKind::kNone:
      return "none";
    case AttackKind::kRegularized:
      return "regularized";
    case AttackKind::kParameterized:
      return "parameterized";
  }
  return "?";
}

AttackKind ParseAttackKind(const std::string& name) {
  if (name == "none") return AttackKind::kNone;
  if (name == "regularized") return AttackKind::kRegularized;
  if (name == "parameterized") return AttackKind::kParameterized;
  throw ParseError("unknown attack kind '" + name + "'");
}

OutputKind ReleasedKind(Scenario s) {
  return s == Scenario::kHbcRaw ? OutputKind::kRaw : OutputKind::kSoft;
}

void TrainConfig::Validate() const {
  if (epochs < 1) throw InvalidArgument("epochs must be >= 1");
  if (batch < 1) throw InvalidArgument("batch must be >= 1");
  if (probe_epochs < 1) throw InvalidArgument("probe_epochs must be >= 1");
  optimizer.Validate();
  betas.Validate(/*paired=*/false);
  if (kd && !(kd->temperature > 0.0)) {
    throw InvalidArgument("kd temperature must be positive");
  }
  switch (attack_kind) {
    case AttackKind::kNone:
      if (scenario != Scenario::kNc) {
        throw InvalidArgument("HBC scenarios need an attack kind");
      }
      if (betas.s != 0.0) {
        throw InvalidArgument("a standard classifier has beta_s = 0");
      }
      break;
    case AttackKind::kRegularized:
      if (scenario != Scenario::kHbcSoft) {
        throw InvalidArgument("the regularized attack runs in scenario HBC-P");
      }
      if (betas.x != 0.0) {
        throw InvalidArgument("the regularized loss has no beta_x term");
      }
      betas.Validate(/*paired=*/true);
      break;
    case AttackKind::kParameterized:
      if (scenario == Scenario::kNc) {
        throw InvalidArgument("a parameterized attack needs HBC-R or HBC-P");
      }
      break;
  }
}

nlohmann::json TrainConfig::ToJson() const {
  nlohmann::json j = {
      {"scenario", ScenarioName(scenario)},
      {"attack_kind", AttackKindName(attack_kind)},
      {"betas", {{"x", betas.x}, {"y", betas.y}, {"s", betas.s}}},
      {"epochs", epochs},
      {"batch", batch},
      {"optimizer", optimizer.ToJson()},
      {"seed", seed},
      {"probe_epochs", probe_epochs},
      {"probe_input", OutputKindName(probe_input)},
  };
  if (kd) {
    j["kd"] = {{"temperature", kd->temperature}, {"teacher", kd->teacher}};
  } else {
    j["kd"] = nullptr;
  }
  return j;
}

TrainConfig TrainConfig::FromJson(const nlohmann::json& j) {
  TrainConfig c;
  try {
    c.scenario = ParseScenario(j.value("scenario", std::string("NC")));
    c.attack_kind = ParseAttackKind(j.value("attack_kind", std::string("none")));
    if (j.contains("betas")) {
      const auto& b = j.at("betas");
      c.betas.x = b.value("x", 0.0);
      c.betas.y = b.value("y", 1.0);
      c.betas.s = b.value("s", 0.0);
    }
    c.epochs = j.value("epochs", c.epochs);
    c.batch = j.value("batch", c.batch);
    if (j.contains("optimizer")) {
      c.optimizer = OptimizerConfig::FromJson(j.at("optimizer"));
    }
    c.seed = j.value("seed", c.seed);
    c.probe_epochs = j.value("probe_epochs", c.probe_epochs);
    c.probe_input =
        ParseOutputKind(j.value("probe_input", std::string("soft")));
    if (j.contains("kd") && !j.at("kd").is_null()) {
      KdConfig kd;
      kd.temperature = j.at("kd").value("temperature", 1.0);
      kd.teacher = j.at("kd").value("teacher", std::string());
      c.kd = kd;
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("bad train config: ") + e.what());
  }
  c.Validate();
  return c;
}

nlohmann::json AttackDescriptor::ToJson() const {
  nlohmann::json j = {{"kind", AttackKindName(kind)}, {"probe", probe}};
  if (kind == AttackKind::kRegularized) j["threshold"] = threshold.ToJson();
  if (has_decoder()) {
    j["decoder"] = {{"input", OutputKindName(decoder.input)},
                    {"spec", decoder.spec.ToJson()},
                    {"params", ParamsToJson(decoder.params)}};
  }
  return j;
}

AttackDescriptor AttackDescriptor::FromJson(const nlohmann::json& j) {
  AttackDescriptor a;
  try {
    a.kind = ParseAttackKind(j.at("kind").get<std::string>());
    a.probe = j.value("probe", false);
    if (a.kind == AttackKind::kRegularized) {
      a.threshold = ThresholdAttack::FromJson(j.at("threshold"));
    }
    if (a.has_decoder()) {
      const auto& d = j.at("decoder");
      a.decoder.input = ParseOutputKind(d.at("input").get<std::string>());
      a.decoder.spec = MlpSpec::FromJson(d.at("spec"));
      a.decoder.params = ParamsFromJson(d.at("params"));
      CheckCompatible(a.decoder.spec, a.decoder.params);
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("bad attack descriptor: ") + e.what());
  }
  return a;
}

nlohmann::json EpochMetrics::ToJson() const {
  return {{"epoch", epoch},
          {"train_loss", train_loss},
          {"decoder_loss", OptionalToJson(decoder_loss)},
          {"val_honesty", val_honesty},
          {"val_curiosity", OptionalToJson(val_curiosity)},
          {"val_mean_entropy_bits", val_mean_entropy_bits},
          {"score", score},
          {"tau", OptionalToJson(tau)}};
}

EpochMetrics EpochMetrics::FromJson(const nlohmann::json& j) {
  EpochMetrics m;
  m.epoch = j.at("epoch").get<int>();
  m.train_loss = j.at("train_loss").get<double>();
  m.decoder_loss = OptionalFromJson(j, "decoder_loss");
  m.val_honesty = j.at("val_honesty").get<double>();
  m.val_curiosity = OptionalFromJson(j, "val_curiosity");
  m.val_mean_entropy_bits = j.at("val_mean_entropy_bits").get<double>();
  m.score = j.at("score").get<double>();
  m.tau = OptionalFromJson(j, "tau");
  return m;
}

nlohmann::json RunResult::ToJson() const {
  nlohmann::json epochs = nlohmann::json::array();
  for (const auto& e : per_epoch) epochs.push_back(e.ToJson());
  return {{"config", config.ToJson()},
          {"f_spec", f_spec.ToJson()},
          {"per_epoch", epochs},
          {"selected_epoch", selected_epoch},
          {"test", {{"honesty", test_honesty}, {"curiosity", test_curiosity}}},
          {"mean_entropy_bits", mean_entropy_bits},
          {"attack", attack.ToJson()},
          {"checkpoint_paths", checkpoint_paths}};
}

MlpSpec DefaultAttackSpec(const MlpSpec& f_spec, OutputKind input,
                          size_t num_s) {
  MlpSpec g = DefaultDecoderSpec(ReleasedWidth(f_spec, input), num_s);
  if (input == OutputKind::kSoft) g.input_transform = InputTransform::kLog;
  return g;
}

RunResult RunResult::FromJson(const nlohmann::json& j) {
  RunResult r;
  try {
    r.config = TrainConfig::FromJson(j.at("config"));
    r.f_spec = MlpSpec::FromJson(j.at("f_spec"));
    for (const auto& e : j.at("per_epoch")) {
      r.per_epoch.push_back(EpochMetrics::FromJson(e));
    }
    r.selected_epoch = j.at("selected_epoch").get<int>();
    r.test_honesty = j.at("test").at("honesty").get<double>();
    r.test_curiosity = j.at("test").at("curiosity").get<double>();
    r.mean_entropy_bits = j.at("mean_entropy_bits").get<double>();
    r.attack = AttackDescriptor::FromJson(j.at("attack"));
    r.checkpoint_paths =
        j.at("checkpoint_paths").get<std::vector<std::string>>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("bad run result: ") + e.what());
  }
  return r;
}

Tensor ReleasedOutput(const MlpSpec& f_spec, const ModelParams& f,
                      const Tensor& x, OutputKind kind) {
  return kind == OutputKind::kRaw ? Logits(f, f_spec, x)
                                  : Probabilities(f, f_spec, x);
}

std::vector<int> DecodeSensitive(const AttackDescriptor& attack,
                                 const MlpSpec& f_spec, const ModelParams& f,
                                 const Tensor& x) {
  if (attack.has_decoder()) {
    return MlpDecode(attack.decoder.spec, attack.decoder.params,
                     ReleasedOutput(f_spec, f, x, attack.decoder.input));
  }
  if (attack.kind == AttackKind::kRegularized) {
    const auto h = RowEntropiesBits(Probabilities(f, f_spec, x));
    std::vector<int> out;
    out.reserve(h.size());
    for (double v : h) out.push_back(attack.threshold.DecodeEntropy(v));
    return out;
  }
  throw InvalidArgument("run has no attack to decode s with");
}

Evaluation Evaluate(const MlpSpec& f_spec, const ModelParams& f,
                    const LabeledDataset& part, const AttackDescriptor& attack) {
  Evaluation ev;
  const Tensor probs = Probabilities(f, f_spec, part.features);
  ev.honesty = Honesty(ArgmaxRows(probs), part.y);
  ev.entropies_bits = RowEntropiesBits(probs);
  ev.mean_entropy_bits = MeanOf(ev.entropies_bits);
  if (attack.has_decoder()) {
    ev.curiosity = Curiosity(
        MlpDecode(attack.decoder.spec, attack.decoder.params,
                  ReleasedOutput(f_spec, f, part.features,
                                 attack.decoder.input)),
        part.s);
  } else if (attack.kind == AttackKind::kRegularized) {
    std::vector<int> pred;
    pred.reserve(ev.entropies_bits.size());
    for (double v : ev.entropies_bits) {
      pred.push_back(attack.threshold.DecodeEntropy(v));
    }
    ev.curiosity = Curiosity(pred, part.s);
  }
  return ev;
}

ModelParams FitProbe(const Tensor& outputs, const std::vector<int>& s,
                     const MlpSpec& g_spec, const OptimizerConfig& optimizer,
                     int epochs, size_t batch, uint64_t seed) {
  g_spec.Validate();
  if (outputs.rows() != s.size() || outputs.rows() == 0) {
    throw ShapeError("probe needs one label per output row");
  }
  if (outputs.cols() != g_spec.input_width()) {
    throw ShapeError("probe input width does not match the outputs");
  }
  if (epochs < 1 || batch < 1) throw InvalidArgument("bad probe schedule");
  ModelParams g = InitParams(g_spec, DerivedSeed(seed, kProbeInit));
  Optimizer opt(optimizer, g);
  const size_t n = s.size();
  std::vector<size_t> order(n);
  for (int epoch = 1; epoch <= epochs; ++epoch) {
    std::iota(order.begin(), order.end(), size_t{0});
    auto shuffle_rng = EpochRng(seed, epoch, kProbeShuffle);
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    auto rng = EpochRng(seed, epoch, kProbeDropout);
    for (size_t start = 0; start < n; start += batch) {
      std::vector<size_t> rows(order.begin() + start,
                               order.begin() + std::min(n, start + batch));
      const auto sb = GatherLabels(s, rows);
      ad::Graph graph;
      auto bound = Bind(graph, g, true);
      auto out = ForwardBatch(graph, g_spec, bound, GatherRows(outputs, rows),
                              rng);
      auto loss = loss::Decoder(out.probs, sb);
      CheckLoss(loss.value().item(), "probe loss", epoch, start / batch);
      graph.Backward(loss);
      opt.Step(g, Gradients(graph, bound));
    }
  }
  return g;
}

RunResult TrainStandard(const LabeledDataset& data, const MlpSpec& f_spec,
                        const TrainConfig& config, const TrainOptions& options,
                        const MlpSpec* probe_spec) {
  config.Validate();
  if (config.attack_kind != AttackKind::kNone) {
    throw InvalidArgument("standard training takes attack_kind none");
  }
  RequireSplits(data);
  CheckClassifierSpec(f_spec, data);
  const MlpSpec g_spec =
      probe_spec ? *probe_spec
                 : DefaultAttackSpec(f_spec, config.probe_input,
                                     static_cast<size_t>(data.num_s));
  CheckDecoderSpec(f_spec, g_spec, config.probe_input, data.num_s);

  const LabeledDataset train = data.Subset(Split::kTrain);
  const LabeledDataset val = data.Subset(Split::kVal);
  const LabeledDataset test = data.Subset(Split::kTest);
  LoopState st = MakeState(f_spec, nullptr, config);
  const BetaWeights betas = config.betas;

  StepFn step = [&](const std::vector<size_t>& rows, std::mt19937_64& rng) {
    ad::Graph graph;
    auto bound = Bind(graph, st.f, true);
    auto out = ForwardBatch(graph, f_spec, bound,
                            GatherRows(train.features, rows), rng);
    const auto yb = GatherLabels(train.y, rows);
    auto loss = ad::MulScalar(loss::MeanCrossEntropy(out.probs, yb), betas.y);
    if (betas.x > 0.0) {
      loss = ad::Add(loss, ad::MulScalar(loss::MeanEntropy(out.probs), betas.x));
    }
    graph.Backward(loss);
    st.f_opt->Step(st.f, Gradients(graph, bound));
    return StepLoss{loss.value().item(), std::nullopt};
  };
  ValidateFn validate = [&](EpochMetrics& m) {
    const Evaluation ev = Evaluate(f_spec, st.f, val, AttackDescriptor{});
    m.val_honesty = ev.honesty;
    m.val_mean_entropy_bits = ev.mean_entropy_bits;
  };
  RunEpochs(config, betas, options, train.size(), st, step, validate);

  AttackDescriptor attack;
  attack.probe = true;
  attack.decoder.spec = g_spec;
  attack.decoder.input = config.probe_input;
  attack.decoder.params =
      FitProbe(ReleasedOutput(f_spec, st.best_f, train.features,
                              config.probe_input),
               train.s, g_spec, config.optimizer, config.probe_epochs,
               config.batch, config.seed);
  return Finish(config, f_spec, st, std::move(attack), test, options);
}

RunResult TrainRegularized(const LabeledDataset& data, const MlpSpec& f_spec,
                           const TrainConfig& config,
                           const TrainOptions& options) {
  config.Validate();
  if (config.attack_kind != AttackKind::kRegularized) {
    throw InvalidArgument("regularized training takes attack_kind regularized");
  }
  RequireSplits(data);
  if (data.num_s != 2) {
    throw InvalidArgument("the regularized attack needs binary s (S = 2)");
  }
  CheckClassifierSpec(f_spec, data);

  const LabeledDataset train = data.Subset(Split::kTrain);
  const LabeledDataset val = data.Subset(Split::kVal);
  const LabeledDataset test = data.Subset(Split::kTest);
  LoopState st = MakeState(f_spec, nullptr, config);
  const BetaWeights betas = config.betas;

  StepFn step = [&](const std::vector<size_t>& rows, std::mt19937_64& rng) {
    ad::Graph graph;
    auto bound = Bind(graph, st.f, true);
    auto out = ForwardBatch(graph, f_spec, bound,
                            GatherRows(train.features, rows), rng);
    auto loss = loss::Regularized(out.probs, GatherLabels(train.y, rows),
                                  GatherLabels(train.s, rows), betas.y,
                                  betas.s);
    graph.Backward(loss);
    st.f_opt->Step(st.f, Gradients(graph, bound));
    return StepLoss{loss.value().item(), std::nullopt};
  };
  ValidateFn validate = [&](EpochMetrics& m) {
    const Evaluation ev = Evaluate(f_spec, st.f, val, AttackDescriptor{});
    const TauSelection sel = SelectTau(ev.entropies_bits, val.s);
    m.val_honesty = ev.honesty;
    m.val_curiosity = sel.accuracy;
    m.val_mean_entropy_bits = ev.mean_entropy_bits;
    m.tau = sel.attack.tau;
    st.threshold = sel.attack;
  };
  RunEpochs(config, betas, options, train.size(), st, step, validate);

  AttackDescriptor attack;
  attack.kind = AttackKind::kRegularized;
  attack.threshold = st.best_threshold;
  return Finish(config, f_spec, st, std::move(attack), test, options);
}

RunResult TrainParameterized(const LabeledDataset& data, const MlpSpec& f_spec,
                             const MlpSpec& g_spec, const TrainConfig& config,
                             const TrainOptions& options) {
  config.Validate();
  if (config.attack_kind != AttackKind::kParameterized) {
    throw InvalidArgument(
        "parameterized training takes attack_kind parameterized");
  }
  RequireSplits(data);
  CheckClassifierSpec(f_spec, data);
  const OutputKind released = ReleasedKind(config.scenario);
  CheckDecoderSpec(f_spec, g_spec, released, data.num_s);

  const LabeledDataset train = data.Subset(Split::kTrain);
  const LabeledDataset val = data.Subset(Split::kVal);
  const LabeledDataset test = data.Subset(Split::kTest);
  LoopState st = MakeState(f_spec, &g_spec, config);
  const BetaWeights betas = config.betas;

  StepFn step = [&](const std::vector<size_t>& rows, std::mt19937_64& rng) {
    const auto yb = GatherLabels(train.y, rows);
    const auto sb = GatherLabels(train.s, rows);

    ad::Graph f_graph;
    auto f_bound = Bind(f_graph, st.f, true);
    auto f_out = ForwardBatch(f_graph, f_spec, f_bound,
                              GatherRows(train.features, rows), rng);
    ad::Var y_hat = ReleasedVar(f_out, released);

    // G sees only (y_hat, s), detached from F.
    StepLoss result;
    {
      ad::Graph g_graph;
      auto g_bound = Bind(g_graph, st.g, true);
      auto g_out = ForwardBatch(g_graph, g_spec, g_bound, y_hat.value(), rng);
      auto g_loss = loss::Decoder(g_out.probs, sb);
      g_graph.Backward(g_loss);
      st.g_opt->Step(st.g, Gradients(g_graph, g_bound));
      result.g_loss = g_loss.value().item();
    }

    // F's step reads the updated G as constants, in evaluation mode.
    auto g_const = Bind(f_graph, st.g, false);
    auto g_out = ForwardGraph(g_spec, g_const, y_hat, /*train_mode=*/false,
                              nullptr);
    auto f_loss =
        loss::InformationBottleneck(f_out.probs, yb, g_out.probs, sb, betas);
    f_graph.Backward(f_loss);
    st.f_opt->Step(st.f, Gradients(f_graph, f_bound));
    result.f_loss = f_loss.value().item();
    return result;
  };
  ValidateFn validate = [&](EpochMetrics& m) {
    AttackDescriptor attack;
    attack.kind = AttackKind::kParameterized;
    attack.decoder = {g_spec, st.g, released};
    const Evaluation ev = Evaluate(f_spec, st.f, val, attack);
    m.val_honesty = ev.honesty;
    m.val_curiosity = ev.curiosity;
    m.val_mean_entropy_bits = ev.mean_entropy_bits;
  };
  RunEpochs(config, betas, options, train.size(), st, step, validate);

  AttackDescriptor attack;
  attack.kind = AttackKind::kParameterized;
  attack.decoder = {g_spec, st.best_g, released};
  return Finish(config, f_spec, st, std::move(attack), test, options);
}

RunResult Train(const LabeledDataset& data, const MlpSpec& f_spec,
                const MlpSpec& g_spec, const TrainConfig& config,
                const TrainOptions& options) {
  switch (config.attack_kind) {
    case AttackKind::kNone:
      return TrainStandard(data, f_spec, config, options, &g_spec);
    case AttackKind::kRegularized:
      return TrainRegularized(data, f_spec, config, options);
    case AttackKind::kParameterized:
      return TrainParameterized(data, f_spec, g_spec, config, options);
  }
  throw InvalidArgument("unknown attack kind");
}

RunResult TrainKdStudent(const Tensor& unlabeled, const LabeledDataset& eval,
                         const RunResult& teacher, const MlpSpec& student_spec,
                         const TrainConfig& config,
                         const TrainOptions& options) {
  config.Validate();
  if (teacher.attack.kind == AttackKind::kNone && !teacher.attack.probe) {
    throw InvalidArgument("teacher run carries no attack descriptor");
  }
  RequireSplits(eval);
  CheckClassifierSpec(student_spec, eval);
  CheckCompatible(teacher.f_spec, teacher.f_params);
  if (unlabeled.rows() == 0 ||
      unlabeled.cols() != teacher.f_spec.input_width()) {
    throw ShapeError("unlabeled features do not match the teacher input");
  }
  if (student_spec.num_classes() != teacher.f_spec.num_classes()) {
    throw InvalidArgument("student and teacher disagree on Y");
  }
  if (teacher.attack.has_decoder()) {
    CheckDecoderSpec(student_spec, teacher.attack.decoder.spec,
                     teacher.attack.decoder.input, eval.num_s);
  }
  const double temperature = config.kd ? config.kd->temperature : 1.0;
  MlpSpec teacher_spec = teacher.f_spec;
  MlpSpec train_spec = student_spec;
  if (teacher_spec.output == OutputMode::kSoft) {
    teacher_spec.temperature = temperature;
  }
  if (train_spec.output == OutputMode::kSoft) {
    train_spec.temperature = temperature;
  }
  const Tensor targets =
      Probabilities(teacher.f_params, teacher_spec, unlabeled);

  const LabeledDataset val = eval.Subset(Split::kVal);
  const LabeledDataset test = eval.Subset(Split::kTest);
  LoopState st = MakeState(student_spec, nullptr, config);
  const AttackDescriptor& teacher_attack = teacher.attack;
  const BetaWeights selection = teacher.config.betas;

  StepFn step = [&](const std::vector<size_t>& rows, std::mt19937_64& rng) {
    ad::Graph graph;
    auto bound = Bind(graph, st.f, true);
    auto out = ForwardBatch(graph, train_spec, bound,
                            GatherRows(unlabeled, rows), rng);
    auto loss = loss::KdKl(GatherRows(targets, rows), out.probs);
    graph.Backward(loss);
    st.f_opt->Step(st.f, Gradients(graph, bound));
    return StepLoss{loss.value().item(), std::nullopt};
  };
  ValidateFn validate = [&](EpochMetrics& m) {
    if (teacher_attack.kind == AttackKind::kRegularized) {
      const Evaluation ev = Evaluate(student_spec, st.f, val, {});
      const TauSelection sel = SelectTau(ev.entropies_bits, val.s);
      m.val_honesty = ev.honesty;
      m.val_curiosity = sel.accuracy;
      m.val_mean_entropy_bits = ev.mean_entropy_bits;
      m.tau = sel.attack.tau;
      st.threshold = sel.attack;
      return;
    }
    const Evaluation ev = Evaluate(student_spec, st.f, val, teacher_attack);
    m.val_honesty = ev.honesty;
    m.val_curiosity = ev.curiosity;
    m.val_mean_entropy_bits = ev.mean_entropy_bits;
  };
  RunEpochs(config, selection, options, unlabeled.rows(), st, step, validate);

  AttackDescriptor attack = teacher_attack;
  if (attack.kind == AttackKind::kRegularized) {
    attack.threshold = st.best_threshold;
  }
  return Finish(config, student_spec, st, std::move(attack), test, options);
}

std::vector<PruningPoint> RunPruningCurve(
    const RunResult& run, const LabeledDataset& data,
    const std::vector<double>& fractions) {
  RequireSplits(data);
  const LabeledDataset test = data.Subset(Split::kTest);
  std::vector<PruningPoint> curve;
  curve.reserve(fractions.size());
  for (double fraction : fractions) {
    const ModelParams pruned = PruneL1(run.f_params, fraction);
    const Evaluation ev = Evaluate(run.f_spec, pruned, test, run.attack);
    curve.push_back({fraction, ev.honesty, ev.curiosity.value_or(0.0)});
  }
  return curve;
}

ConvexLogisticResult TrainConvexLogistic(const LabeledDataset& data,
                                         double beta_y, double beta_s,
                                         const TrainConfig& config) {
  BetaWeights{0.0, beta_y, beta_s}.Validate(/*paired=*/true);
  config.optimizer.Validate();
  if (config.epochs < 1 || config.batch < 1) {
    throw InvalidArgument("bad training schedule");
  }
  RequireSplits(data);
  if (data.num_y != 2 || data.num_s != 2) {
    throw InvalidArgument("the convex combined loss needs binary y and s");
  }
  const LabeledDataset train = data.Subset(Split::kTrain);
  const LabeledDataset test = data.Subset(Split::kTest);
  const size_t m = data.num_features();

  // Weights and bias live in a one-layer parameter set so the shared
  // optimizer can drive them.
  ModelParams params;
  params.layers.push_back({Tensor::Zeros(m, 1), Tensor::Zeros(1, 1)});
  Optimizer opt(config.optimizer, params);
  std::vector<double> theta(m + 1, 0.0), x(m + 1, 1.0);
  auto sync_theta = [&] {
    for (size_t i = 0; i < m; ++i) theta[i] = params.layers[0].weight[i];
    theta[m] = params.layers[0].bias[0];
  };

  const size_t n = train.size();
  std::vector<size_t> order(n);
  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), size_t{0});
    auto rng = EpochRng(config.seed, epoch, kShuffle);
    std::shuffle(order.begin(), order.end(), rng);
    for (size_t start = 0; start < n; start += config.batch) {
      const size_t end = std::min(n, start + config.batch);
      sync_theta();
      std::vector<double> grad(m + 1, 0.0);
      double total = 0.0;
      for (size_t k = start; k < end; ++k) {
        const size_t r = order[k];
        std::copy_n(train.features.row(r).begin(), m, x.begin());
        const auto lg = ConvexCombinedLogLoss(theta, x, train.y[r],
                                              train.s[r], beta_y, beta_s);
        total += lg.value;
        for (size_t i = 0; i <= m; ++i) grad[i] += lg.gradient[i];
      }
      const double count = static_cast<double>(end - start);
      CheckLoss(total / count, "convex loss", epoch, start / config.batch);
      Tensor gw = Tensor::Zeros(m, 1), gb = Tensor::Zeros(1, 1);
      for (size_t i = 0; i < m; ++i) gw[i] = grad[i] / count;
      gb[0] = grad[m] / count;
      opt.Step(params, {gw, gb});
    }
  }
  sync_theta();

  ConvexLogisticResult result;
  result.theta = theta;
  std::vector<int> pred(test.size());
  for (size_t r = 0; r < test.size(); ++r) {
    double a = theta[m];
    for (size_t i = 0; i < m; ++i) a += theta[i] * test.features.at(r, i);
    pred[r] = a > 0.0 ? 1 : 0;
  }
  result.honesty = Honesty(pred, test.y);
  result.curiosity = Curiosity(pred, test.s);
  return result;
}

}  // namespace hbc
