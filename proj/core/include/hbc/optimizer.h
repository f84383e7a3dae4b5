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

#ifndef HBC_OPTIMIZER_H_
#define HBC_OPTIMIZER_H_

#include <string>
#include <vector>

#include "hbc/model.h"
#include "hbc/tensor.h"
#include "nlohmann/json.hpp"

namespace hbc {

enum class OptimizerKind { kAdam, kSgd };
const char* OptimizerKindName(OptimizerKind k);
OptimizerKind ParseOptimizerKind(const std::string& name);

struct OptimizerConfig {
  OptimizerKind kind = OptimizerKind::kAdam;
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;

  void Validate() const;
  nlohmann::json ToJson() const;
  static OptimizerConfig FromJson(const nlohmann::json& j);
};

// First-order optimizer over a ModelParams. Gradients are passed flattened
// in parameter order: layer 0 weight, layer 0 bias, layer 1 weight, ...
class Optimizer {
 public:
  Optimizer(OptimizerConfig config, const ModelParams& params);

  void Step(ModelParams& params, const std::vector<Tensor>& grads);

  const OptimizerConfig& config() const { return config_; }
  long steps() const { return t_; }

  nlohmann::json StateToJson() const;
  void LoadState(const nlohmann::json& j);

 private:
  OptimizerConfig config_;
  long t_ = 0;
  std::vector<Tensor> m_;
  std::vector<Tensor> v_;
};

}  // namespace hbc

#endif  // HBC_OPTIMIZER_H_
