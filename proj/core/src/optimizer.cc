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

#include "hbc/optimizer.h"

#include <cmath>

#include "hbc/errors.h"

namespace hbc {

const char* OptimizerKindName(OptimizerKind k) {
  return k == OptimizerKind::kAdam ? "adam" : "sgd";
}

OptimizerKind ParseOptimizerKind(const std::string& name) {
  if (name == "adam") return OptimizerKind::kAdam;
  if (name == "sgd") return OptimizerKind::kSgd;
  throw ParseError("unknown optimizer '" + name + "'");
}

void OptimizerConfig::Validate() const {
  if (!(lr > 0.0) || !std::isfinite(lr)) {
    throw InvalidArgument("learning rate must be positive");
  }
  if (kind == OptimizerKind::kAdam) {
    if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0)) {
      throw InvalidArgument("Adam betas must lie in [0,1)");
    }
    if (!(eps > 0.0)) throw InvalidArgument("Adam eps must be positive");
  }
}

nlohmann::json OptimizerConfig::ToJson() const {
  return {{"kind", OptimizerKindName(kind)},
          {"lr", lr},
          {"beta1", beta1},
          {"beta2", beta2},
          {"eps", eps}};
}

OptimizerConfig OptimizerConfig::FromJson(const nlohmann::json& j) {
  OptimizerConfig c;
  c.kind = ParseOptimizerKind(j.value("kind", std::string("adam")));
  c.lr = j.value("lr", c.lr);
  c.beta1 = j.value("beta1", c.beta1);
  c.beta2 = j.value("beta2", c.beta2);
  c.eps = j.value("eps", c.eps);
  c.Validate();
  return c;
}

Optimizer::Optimizer(OptimizerConfig config, const ModelParams& params)
    : config_(config) {
  config_.Validate();
  if (config_.kind == OptimizerKind::kAdam) {
    for (const auto& layer : params.layers) {
      m_.emplace_back(layer.weight.shape(), 0.0);
      m_.emplace_back(layer.bias.shape(), 0.0);
    }
    v_ = m_;
  }
}

void Optimizer::Step(ModelParams& params, const std::vector<Tensor>& grads) {
  if (grads.size() != 2 * params.layers.size()) {
    throw ShapeError("optimizer: expected one gradient per parameter tensor");
  }
  ++t_;
  const double lr = config_.lr;
  const double b1 = config_.beta1, b2 = config_.beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(t_));
  for (size_t k = 0; k < grads.size(); ++k) {
    auto& layer = params.layers[k / 2];
    Tensor& p = (k % 2 == 0) ? layer.weight : layer.bias;
    const Tensor& g = grads[k];
    if (!p.SameShape(g)) {
      throw ShapeError("optimizer: gradient shape " + g.ShapeString() +
                       " vs parameter " + p.ShapeString());
    }
    if (config_.kind == OptimizerKind::kSgd) {
      for (size_t i = 0; i < p.size(); ++i) p[i] -= lr * g[i];
      continue;
    }
    Tensor& m = m_[k];
    Tensor& v = v_[k];
    for (size_t i = 0; i < p.size(); ++i) {
      m[i] = b1 * m[i] + (1.0 - b1) * g[i];
      v[i] = b2 * v[i] + (1.0 - b2) * g[i] * g[i];
      p[i] -= lr * (m[i] / c1) / (std::sqrt(v[i] / c2) + config_.eps);
    }
  }
}

nlohmann::json Optimizer::StateToJson() const {
  nlohmann::json m = nlohmann::json::array(), v = nlohmann::json::array();
  for (const auto& t : m_) m.push_back(t.vec());
  for (const auto& t : v_) v.push_back(t.vec());
  return {{"config", config_.ToJson()}, {"t", t_}, {"m", m}, {"v", v}};
}

void Optimizer::LoadState(const nlohmann::json& j) {
  t_ = j.at("t").get<long>();
  const auto& m = j.at("m");
  const auto& v = j.at("v");
  if (m.size() != m_.size() || v.size() != v_.size()) {
    throw ParseError("optimizer state does not match the model");
  }
  for (size_t k = 0; k < m_.size(); ++k) {
    auto mk = m[k].get<std::vector<double>>();
    auto vk = v[k].get<std::vector<double>>();
    if (mk.size() != m_[k].size() || vk.size() != v_[k].size()) {
      throw ParseError("optimizer state does not match the model");
    }
    m_[k].vec() = std::move(mk);
    v_[k].vec() = std::move(vk);
  }
}

}  // namespace hbc
