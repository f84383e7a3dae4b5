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

#include "hbc/model.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include "hbc/errors.h"

namespace hbc {

const char* OutputModeName(OutputMode m) {
  switch (m) {
    case OutputMode::kRaw:
      return "raw";
    case OutputMode::kSoft:
      return "soft";
    case OutputMode::kSigmoid:
      return "sigmoid";
  }
  return "?";
}

OutputMode ParseOutputMode(const std::string& name) {
  if (name == "raw") return OutputMode::kRaw;
  if (name == "soft") return OutputMode::kSoft;
  if (name == "sigmoid") return OutputMode::kSigmoid;
  throw ParseError("unknown output mode '" + name + "'");
}

const char* InputTransformName(InputTransform t) {
  return t == InputTransform::kLog ? "log" : "identity";
}

InputTransform ParseInputTransform(const std::string& name) {
  if (name == "identity") return InputTransform::kIdentity;
  if (name == "log") return InputTransform::kLog;
  throw ParseError("unknown input transform '" + name + "'");
}

size_t MlpSpec::num_classes() const {
  return output == OutputMode::kSigmoid ? 2 : output_width();
}

void MlpSpec::Validate() const {
  if (widths.size() < 2) throw InvalidArgument("MLP needs at least one layer");
  for (size_t w : widths) {
    if (w == 0) throw InvalidArgument("MLP widths must be positive");
  }
  if (!dropout.empty() && dropout.size() != widths.size() - 2) {
    throw InvalidArgument("dropout needs one rate per hidden layer");
  }
  for (double p : dropout) {
    if (!(p >= 0.0 && p < 1.0)) throw InvalidArgument("dropout must lie in [0,1)");
  }
  if (output == OutputMode::kSigmoid && output_width() != 1) {
    throw InvalidArgument("sigmoid output needs width 1");
  }
  if (!(temperature > 0)) throw InvalidArgument("temperature must be positive");
}

nlohmann::json MlpSpec::ToJson() const {
  return {{"widths", widths},
          {"leaky_slope", leaky_slope},
          {"dropout", dropout},
          {"output", OutputModeName(output)},
          {"temperature", temperature},
          {"input_transform", InputTransformName(input_transform)}};
}

MlpSpec MlpSpec::FromJson(const nlohmann::json& j) {
  MlpSpec s;
  s.widths = j.at("widths").get<std::vector<size_t>>();
  s.leaky_slope = j.value("leaky_slope", s.leaky_slope);
  s.dropout = j.value("dropout", std::vector<double>{});
  s.output = ParseOutputMode(j.value("output", std::string("soft")));
  s.temperature = j.value("temperature", 1.0);
  s.input_transform = ParseInputTransform(
      j.value("input_transform", std::string("identity")));
  s.Validate();
  return s;
}

MlpSpec DefaultClassifierSpec(size_t input_width, size_t num_y) {
  MlpSpec s;
  s.widths = {input_width, 64, 64, 32, num_y};
  s.output = OutputMode::kSoft;
  return s;
}

MlpSpec DefaultDecoderSpec(size_t num_y, size_t num_s) {
  MlpSpec s;
  s.widths = {num_y, 20 * num_y, 10 * num_y, num_s};
  s.dropout = {0.25, 0.25};
  s.output = OutputMode::kSoft;
  return s;
}

MlpSpec LogisticSpec(size_t input_width) {
  MlpSpec s;
  s.widths = {input_width, 1};
  s.output = OutputMode::kSigmoid;
  return s;
}

MlpSpec HalfWidth(const MlpSpec& spec) {
  MlpSpec half = spec;
  for (size_t i = 1; i + 1 < half.widths.size(); ++i) {
    half.widths[i] = std::max<size_t>(1, half.widths[i] / 2);
  }
  return half;
}

size_t ModelParams::num_weights() const {
  size_t n = 0;
  for (const auto& l : layers) n += l.weight.size();
  return n;
}

bool ModelParams::AllFinite() const {
  for (const auto& l : layers) {
    if (!l.weight.AllFinite() || !l.bias.AllFinite()) return false;
  }
  return true;
}

ModelParams InitParams(const MlpSpec& spec, uint64_t seed) {
  spec.Validate();
  ModelParams p;
  p.seed = seed;
  std::mt19937_64 rng(seed);
  for (size_t l = 0; l < spec.num_layers(); ++l) {
    const size_t fan_in = spec.widths[l], fan_out = spec.widths[l + 1];
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    std::uniform_real_distribution<double> u(-bound, bound);
    LayerParams layer{Tensor({fan_in, fan_out}, 0.0), Tensor({1, fan_out}, 0.0)};
    for (double& w : layer.weight.vec()) w = u(rng);
    for (double& b : layer.bias.vec()) b = u(rng);
    p.layers.push_back(std::move(layer));
  }
  return p;
}

void CheckCompatible(const MlpSpec& spec, const ModelParams& params) {
  if (params.layers.size() != spec.num_layers()) {
    throw ShapeError("parameter layer count does not match spec");
  }
  for (size_t l = 0; l < params.layers.size(); ++l) {
    const auto& layer = params.layers[l];
    if (layer.weight.rows() != spec.widths[l] ||
        layer.weight.cols() != spec.widths[l + 1] || layer.bias.rows() != 1 ||
        layer.bias.cols() != spec.widths[l + 1]) {
      throw ShapeError("layer " + std::to_string(l) +
                       " shapes do not match spec");
    }
  }
}

BoundParams Bind(ad::Graph& g, const ModelParams& params, bool trainable) {
  BoundParams b;
  for (const auto& l : params.layers) {
    b.weights.push_back(trainable ? g.Leaf(l.weight) : g.Constant(l.weight));
    b.biases.push_back(trainable ? g.Leaf(l.bias) : g.Constant(l.bias));
  }
  return b;
}

ForwardVars ForwardGraph(const MlpSpec& spec, const BoundParams& params,
                         ad::Var x, bool train_mode, std::mt19937_64* rng) {
  if (x.value().cols() != spec.input_width()) {
    throw ShapeError("forward: batch width " +
                     std::to_string(x.value().cols()) + " != input width " +
                     std::to_string(spec.input_width()));
  }
  if (params.weights.size() != spec.num_layers()) {
    throw ShapeError("forward: parameters do not match spec");
  }
  ad::Graph& g = *x.graph;
  ad::Var h = spec.input_transform == InputTransform::kLog ? ad::LogClamped(x)
                                                           : x;
  const size_t last = spec.num_layers() - 1;
  for (size_t l = 0; l <= last; ++l) {
    h = ad::Add(ad::MatMul(h, params.weights[l]), params.biases[l]);
    if (l == last) break;
    h = ad::LeakyRelu(h, spec.leaky_slope);
    const double p = spec.dropout.empty() ? 0.0 : spec.dropout[l];
    if (train_mode && rng != nullptr && p > 0.0) {
      std::bernoulli_distribution keep(1.0 - p);
      Tensor mask(h.value().shape(), 0.0);
      for (double& m : mask.vec()) m = keep(*rng) ? 1.0 / (1.0 - p) : 0.0;
      h = ad::Mul(h, g.Constant(std::move(mask)));
    }
  }
  ForwardVars out{h, h};
  if (spec.output == OutputMode::kSigmoid) {
    ad::Var z = ad::Sigmoid(h);
    out.probs = ad::ConcatCols(ad::AddScalar(ad::MulScalar(z, -1.0), 1.0), z);
  } else {
    out.probs = ad::Softmax(h, spec.temperature);
  }
  return out;
}

namespace {

ForwardVars EvalGraph(ad::Graph& g, const ModelParams& params,
                      const MlpSpec& spec, const Tensor& x, bool train_mode,
                      std::mt19937_64* rng) {
  CheckCompatible(spec, params);
  BoundParams bound = Bind(g, params, /*trainable=*/false);
  return ForwardGraph(spec, bound, g.Constant(x), train_mode, rng);
}

}  // namespace

Tensor Forward(const ModelParams& params, const MlpSpec& spec, const Tensor& x,
               bool train_mode, std::mt19937_64* rng) {
  ad::Graph g;
  ForwardVars f = EvalGraph(g, params, spec, x, train_mode, rng);
  switch (spec.output) {
    case OutputMode::kRaw:
      return f.logits.value();
    case OutputMode::kSoft:
      return f.probs.value();
    case OutputMode::kSigmoid: {
      const Tensor& p = f.probs.value();
      Tensor z({p.rows(), 1}, 0.0);
      for (size_t r = 0; r < p.rows(); ++r) z[r] = p.at(r, 1);
      return z;
    }
  }
  return {};
}

Tensor Logits(const ModelParams& params, const MlpSpec& spec, const Tensor& x) {
  ad::Graph g;
  return EvalGraph(g, params, spec, x, false, nullptr).logits.value();
}

Tensor Probabilities(const ModelParams& params, const MlpSpec& spec,
                     const Tensor& x) {
  ad::Graph g;
  return EvalGraph(g, params, spec, x, false, nullptr).probs.value();
}

int Argmax(std::span<const double> v) {
  if (v.empty()) throw InvalidArgument("argmax of empty vector");
  size_t best = 0;
  for (size_t i = 1; i < v.size(); ++i) {
    if (v[i] > v[best]) best = i;
  }
  return static_cast<int>(best);
}

std::vector<int> ArgmaxRows(const Tensor& m) {
  std::vector<int> out(m.rows());
  for (size_t r = 0; r < m.rows(); ++r) out[r] = Argmax(m.row(r));
  return out;
}

ModelParams PruneL1(const ModelParams& params, double fraction) {
  if (!(fraction >= 0.0 && fraction <= 1.0)) {
    throw InvalidArgument("prune fraction must lie in [0,1]");
  }
  struct Entry {
    double mag;
    size_t layer;
    size_t index;
  };
  std::vector<Entry> entries;
  entries.reserve(params.num_weights());
  for (size_t l = 0; l < params.layers.size(); ++l) {
    const auto& w = params.layers[l].weight;
    for (size_t i = 0; i < w.size(); ++i) {
      entries.push_back({std::abs(w[i]), l, i});
    }
  }
  const size_t k = std::min(
      entries.size(),
      static_cast<size_t>(std::llround(fraction * entries.size())));
  auto less = [](const Entry& a, const Entry& b) {
    if (a.mag != b.mag) return a.mag < b.mag;
    if (a.layer != b.layer) return a.layer < b.layer;
    return a.index < b.index;
  };
  if (k > 0 && k < entries.size()) {
    std::nth_element(entries.begin(), entries.begin() + (k - 1),
                     entries.end(), less);
  }
  ModelParams out = params;
  for (size_t e = 0; e < k; ++e) {
    out.layers[entries[e].layer].weight[entries[e].index] = 0.0;
  }
  return out;
}

namespace {

nlohmann::json TensorToJson(const Tensor& t) {
  return {{"shape", t.shape()}, {"data", t.vec()}};
}

Tensor TensorFromJson(const nlohmann::json& j) {
  return Tensor(j.at("shape").get<std::vector<size_t>>(),
                j.at("data").get<std::vector<double>>());
}

}  // namespace

nlohmann::json ParamsToJson(const ModelParams& params) {
  nlohmann::json layers = nlohmann::json::array();
  for (const auto& l : params.layers) {
    layers.push_back({{"weight", TensorToJson(l.weight)},
                      {"bias", TensorToJson(l.bias)}});
  }
  return {{"seed", params.seed}, {"layers", std::move(layers)}};
}

ModelParams ParamsFromJson(const nlohmann::json& j) {
  ModelParams p;
  p.seed = j.value("seed", uint64_t{0});
  for (const auto& l : j.at("layers")) {
    p.layers.push_back(
        {TensorFromJson(l.at("weight")), TensorFromJson(l.at("bias"))});
  }
  if (!p.AllFinite()) throw ParseError("checkpoint holds non-finite weights");
  return p;
}

void SaveCheckpoint(const Checkpoint& c, const std::filesystem::path& path) {
  nlohmann::json j = {{"spec", c.spec.ToJson()},
                      {"seed", c.params.seed},
                      {"epoch", c.epoch},
                      {"metrics", c.metrics},
                      {"weights", ParamsToJson(c.params)["layers"]}};
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write checkpoint " + path.string());
  out << j.dump(1) << '\n';
}

Checkpoint LoadCheckpoint(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open checkpoint " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("checkpoint " + path.string() + ": " + e.what());
  }
  Checkpoint c;
  c.spec = MlpSpec::FromJson(j.at("spec"));
  c.params = ParamsFromJson({{"seed", j.value("seed", uint64_t{0})},
                             {"layers", j.at("weights")}});
  c.epoch = j.value("epoch", 0);
  c.metrics = j.value("metrics", nlohmann::json::object());
  CheckCompatible(c.spec, c.params);
  return c;
}

}  // namespace hbc
