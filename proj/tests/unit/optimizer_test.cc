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
#include <vector>

#include "gtest/gtest.h"
#include "hbc/errors.h"
#include "hbc/model.h"

namespace hbc {
namespace {

ModelParams OneLayer(double w0, double w1, double b) {
  MlpSpec spec;
  spec.widths = {2, 1};
  spec.output = OutputMode::kSigmoid;
  ModelParams p = InitParams(spec, 0);
  p.layers[0].weight = Tensor::Matrix(2, 1, {w0, w1});
  p.layers[0].bias = Tensor::Row({b});
  return p;
}

std::vector<Tensor> Grads(double g0, double g1, double gb) {
  return {Tensor::Matrix(2, 1, {g0, g1}), Tensor::Row({gb})};
}

TEST(OptimizerTest, SgdStep) {
  OptimizerConfig c;
  c.kind = OptimizerKind::kSgd;
  c.lr = 0.1;
  ModelParams p = OneLayer(1.0, -2.0, 0.5);
  Optimizer opt(c, p);
  opt.Step(p, Grads(1.0, -4.0, 2.0));
  EXPECT_DOUBLE_EQ(p.layers[0].weight[0], 0.9);
  EXPECT_DOUBLE_EQ(p.layers[0].weight[1], -1.6);
  EXPECT_DOUBLE_EQ(p.layers[0].bias[0], 0.3);
  EXPECT_EQ(opt.steps(), 1);
}

TEST(OptimizerTest, AdamMatchesReferenceRecurrence) {
  OptimizerConfig c;
  c.lr = 0.01;
  ModelParams p = OneLayer(0.3, -0.2, 0.0);
  Optimizer opt(c, p);
  const std::vector<std::vector<double>> grads = {
      {0.5, -1.0, 0.1}, {0.2, 0.3, -0.4}, {-0.7, 0.0, 0.05}};
  double theta[3] = {0.3, -0.2, 0.0}, m[3] = {0, 0, 0}, v[3] = {0, 0, 0};
  for (size_t t = 1; t <= grads.size(); ++t) {
    const auto& g = grads[t - 1];
    opt.Step(p, Grads(g[0], g[1], g[2]));
    for (int i = 0; i < 3; ++i) {
      m[i] = 0.9 * m[i] + 0.1 * g[i];
      v[i] = 0.999 * v[i] + 0.001 * g[i] * g[i];
      const double mh = m[i] / (1 - std::pow(0.9, t));
      const double vh = v[i] / (1 - std::pow(0.999, t));
      theta[i] -= 0.01 * mh / (std::sqrt(vh) + 1e-8);
    }
    EXPECT_NEAR(p.layers[0].weight[0], theta[0], 1e-12);
    EXPECT_NEAR(p.layers[0].weight[1], theta[1], 1e-12);
    EXPECT_NEAR(p.layers[0].bias[0], theta[2], 1e-12);
  }
}

TEST(OptimizerTest, StateRoundTripContinuesIdentically) {
  OptimizerConfig c;
  ModelParams a = OneLayer(0.1, 0.2, 0.3);
  Optimizer first(c, a);
  first.Step(a, Grads(0.4, -0.1, 0.2));
  ModelParams b = a;
  Optimizer second(c, b);
  second.LoadState(first.StateToJson());
  first.Step(a, Grads(0.3, 0.3, -0.3));
  second.Step(b, Grads(0.3, 0.3, -0.3));
  EXPECT_EQ(a, b);
  EXPECT_EQ(second.steps(), 2);
}

TEST(OptimizerTest, RejectsMismatchedGradients) {
  OptimizerConfig c;
  ModelParams p = OneLayer(0, 0, 0);
  Optimizer opt(c, p);
  EXPECT_THROW(opt.Step(p, {Tensor::Row({1.0})}), ShapeError);
  EXPECT_THROW(opt.Step(p, {Tensor::Row({1.0, 2.0}), Tensor::Row({0.0})}),
               ShapeError);
}

TEST(OptimizerConfigTest, ValidateAndJson) {
  OptimizerConfig c;
  c.lr = 0.0;
  EXPECT_THROW(c.Validate(), InvalidArgument);
  c.lr = 0.01;
  c.beta1 = 1.0;
  EXPECT_THROW(c.Validate(), InvalidArgument);
  c.beta1 = 0.8;
  c.kind = OptimizerKind::kSgd;
  EXPECT_EQ(OptimizerConfig::FromJson(c.ToJson()).ToJson(), c.ToJson());
  EXPECT_THROW(ParseOptimizerKind("rmsprop"), ParseError);
}

}  // namespace
}  // namespace hbc
