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

#include <random>
#include <vector>

#include "benchmark/benchmark.h"
#include "hbc/attacks.h"
#include "hbc/autodiff.h"
#include "hbc/dataset.h"
#include "hbc/metrics.h"
#include "hbc/model.h"
#include "hbc/tensor.h"
#include "hbc/trainloop.h"

namespace hbc {
namespace {

Tensor RandomTensor(size_t rows, size_t cols, uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  Tensor t = Tensor::Zeros(rows, cols);
  for (double& v : t.vec()) v = normal(rng);
  return t;
}

void RandomScores(size_t n, std::vector<double>& scores,
                  std::vector<int>& labels) {
  std::mt19937_64 rng(n);
  std::uniform_real_distribution<double> unit;
  scores.resize(n);
  labels.resize(n);
  for (size_t i = 0; i < n; ++i) {
    labels[i] = static_cast<int>(rng() % 2);
    scores[i] = unit(rng) + 0.3 * labels[i];
  }
}

void BM_MatMulForwardBackward(benchmark::State& state) {
  const size_t n = static_cast<size_t>(state.range(0));
  const Tensor a = RandomTensor(n, n, 1), b = RandomTensor(n, n, 2);
  for (auto _ : state) {
    ad::Graph g;
    ad::Var loss = ad::Sum(ad::MatMul(g.Leaf(a), g.Leaf(b)));
    g.Backward(loss);
    benchmark::DoNotOptimize(loss.value());
  }
}
BENCHMARK(BM_MatMulForwardBackward)->RangeMultiplier(2)->Range(16, 256);

void BM_SelectTau(benchmark::State& state) {
  std::vector<double> h;
  std::vector<int> s;
  RandomScores(static_cast<size_t>(state.range(0)), h, s);
  for (auto _ : state) benchmark::DoNotOptimize(SelectTau(h, s));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_SelectTau)->RangeMultiplier(10)->Range(100, 100000);

void BM_Auc(benchmark::State& state) {
  std::vector<double> scores;
  std::vector<int> labels;
  RandomScores(static_cast<size_t>(state.range(0)), scores, labels);
  for (auto _ : state) benchmark::DoNotOptimize(Auc(scores, labels));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Auc)->RangeMultiplier(10)->Range(100, 100000);

// One epoch of the default classifier on a 4000-point quadrant set.
void BM_TrainEpoch(benchmark::State& state) {
  SynthSpec spec;
  const LabeledDataset d = SplitDataset(GenQuadrant(spec), {0.72, 0.08, 0.2}, 1);
  const MlpSpec f = DefaultClassifierSpec(2, 2);
  TrainConfig c;
  c.epochs = 1;
  c.probe_epochs = 1;
  for (auto _ : state) benchmark::DoNotOptimize(TrainStandard(d, f, c));
}
BENCHMARK(BM_TrainEpoch)->Unit(benchmark::kMillisecond);

}  // namespace
}  // namespace hbc

BENCHMARK_MAIN();
