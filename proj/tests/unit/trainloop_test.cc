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

#include <filesystem>
#include <random>
#include <vector>

#include "gtest/gtest.h"
#include "hbc/dataset.h"
#include "hbc/errors.h"
#include "hbc/losses.h"

namespace hbc {
namespace {

namespace fs = std::filesystem;

LabeledDataset Quadrant(size_t n, uint64_t seed) {
  SynthSpec s;
  s.n = n;
  s.seed = seed;
  return SplitDataset(GenQuadrant(s), {0.72, 0.08, 0.2}, seed);
}

LabeledDataset Lattice(size_t n, int ys, int ss, uint64_t seed) {
  SynthSpec s;
  s.n = n;
  s.y_classes = ys;
  s.s_classes = ss;
  s.noise_sigma = 0.05;
  s.seed = seed;
  return SplitDataset(GenLattice(s), {0.72, 0.08, 0.2}, seed);
}

MlpSpec SmallNet(size_t in, size_t out) {
  MlpSpec s;
  s.widths = {in, 16, out};
  return s;
}

TrainConfig Regularized(double beta_s) {
  TrainConfig c;
  c.scenario = Scenario::kHbcSoft;
  c.attack_kind = AttackKind::kRegularized;
  c.betas = {0.0, 1.0 - beta_s, beta_s};
  return c;
}

TrainConfig Parameterized(Scenario sc, BetaWeights b) {
  TrainConfig c;
  c.scenario = sc;
  c.attack_kind = AttackKind::kParameterized;
  c.betas = b;
  return c;
}

fs::path TempDir(const std::string& tag) {
  const auto dir = fs::temp_directory_path() / ("hbc_trainloop_" + tag);
  fs::remove_all(dir);
  return dir;
}

TEST(TrainConfigTest, Validation) {
  TrainConfig c;
  EXPECT_NO_THROW(c.Validate());
  c.betas.s = 0.2;
  EXPECT_THROW(c.Validate(), InvalidArgument);
  c = Regularized(0.5);
  EXPECT_NO_THROW(c.Validate());
  c.scenario = Scenario::kHbcRaw;
  EXPECT_THROW(c.Validate(), InvalidArgument);
  c = Regularized(0.5);
  c.betas.x = 0.1;
  EXPECT_THROW(c.Validate(), InvalidArgument);
  c = Regularized(0.5);
  c.betas.y = 0.9;
  EXPECT_THROW(c.Validate(), InvalidArgument);
  c = Parameterized(Scenario::kNc, {0, 0.7, 0.3});
  EXPECT_THROW(c.Validate(), InvalidArgument);
  c = TrainConfig{};
  c.scenario = Scenario::kHbcRaw;
  EXPECT_THROW(c.Validate(), InvalidArgument);
  c = TrainConfig{};
  c.epochs = 0;
  EXPECT_THROW(c.Validate(), InvalidArgument);
  c = TrainConfig{};
  c.kd = KdConfig{0.0, ""};
  EXPECT_THROW(c.Validate(), InvalidArgument);
}

TEST(TrainConfigTest, JsonRoundTripAndNames) {
  TrainConfig c = Parameterized(Scenario::kHbcRaw, {0.4, 0.7, 0.3});
  c.kd = KdConfig{10.0, "runs/teacher"};
  c.seed = 99;
  c.optimizer.kind = OptimizerKind::kSgd;
  EXPECT_EQ(TrainConfig::FromJson(c.ToJson()).ToJson(), c.ToJson());
  EXPECT_EQ(ParseScenario("HBC-P"), Scenario::kHbcSoft);
  EXPECT_STREQ(ScenarioName(Scenario::kHbcRaw), "HBC-R");
  EXPECT_THROW(ParseScenario("HBC"), ParseError);
  EXPECT_THROW(ParseAttackKind("mixture"), ParseError);
  EXPECT_EQ(ReleasedKind(Scenario::kHbcRaw), OutputKind::kRaw);
  EXPECT_EQ(ReleasedKind(Scenario::kHbcSoft), OutputKind::kSoft);
}

TEST(EpochRngTest, DeterministicAndStreamSeparated) {
  auto a = EpochRng(5, 3, 1), b = EpochRng(5, 3, 1);
  EXPECT_EQ(a(), b());
  EXPECT_NE(EpochRng(5, 3, 1)(), EpochRng(5, 3, 2)());
  EXPECT_NE(EpochRng(5, 3, 1)(), EpochRng(5, 4, 1)());
  EXPECT_NE(EpochRng(5, 3, 1)(), EpochRng(6, 3, 1)());
}

TEST(TrainStandardTest, LogisticOnQuadrantIsHonestAndLeaksNothing) {
  const auto d = Quadrant(4000, 7);
  TrainConfig c;
  c.optimizer.lr = 0.1;
  c.epochs = 20;
  c.probe_epochs = 20;
  const auto r = TrainStandard(d, LogisticSpec(2), c);
  EXPECT_GE(r.test_honesty, 0.99);
  EXPECT_GE(r.test_curiosity, 0.45);
  EXPECT_LE(r.test_curiosity, 0.55);
  EXPECT_TRUE(r.attack.probe);
  EXPECT_EQ(r.per_epoch.size(), 20u);
}

TEST(TrainStandardTest, SeparableLattice) {
  const auto d = Lattice(1500, 3, 3, 2);
  TrainConfig c;
  c.epochs = 10;
  c.optimizer.lr = 1e-2;
  c.probe_epochs = 2;
  const auto r = TrainStandard(d, SmallNet(2, 3), c);
  EXPECT_GE(r.test_honesty, 0.99);
}

TEST(TrainStandardTest, FixedSeedIsReproducible) {
  const auto d = Quadrant(600, 3);
  TrainConfig c;
  c.epochs = 3;
  c.probe_epochs = 2;
  c.seed = 11;
  const auto a = TrainStandard(d, SmallNet(2, 2), c);
  const auto b = TrainStandard(d, SmallNet(2, 2), c);
  EXPECT_EQ(a.ToJson().dump(), b.ToJson().dump());
  EXPECT_EQ(a.f_params, b.f_params);
  c.seed = 12;
  const auto other = TrainStandard(d, SmallNet(2, 2), c);
  EXPECT_NE(a.f_params, other.f_params);
}

TEST(TrainStandardTest, RejectsUnsplitData) {
  SynthSpec s;
  s.n = 50;
  TrainConfig c;
  EXPECT_THROW(TrainStandard(GenQuadrant(s), SmallNet(2, 2), c),
               InvalidArgument);
  EXPECT_THROW(TrainStandard(Quadrant(100, 1), SmallNet(3, 2), c),
               InvalidArgument);
}

TEST(TrainStandardTest, SelectedEpochMaximizesScore) {
  const auto d = Quadrant(600, 5);
  TrainConfig c;
  c.epochs = 6;
  c.probe_epochs = 1;
  const auto r = TrainStandard(d, SmallNet(2, 2), c);
  double best = -1.0;
  int best_epoch = 0;
  for (const auto& m : r.per_epoch) {
    EXPECT_DOUBLE_EQ(m.score, m.val_honesty);
    if (m.score >= best) {
      best = m.score;
      best_epoch = m.epoch;
    }
  }
  EXPECT_EQ(r.selected_epoch, best_epoch);
}

TEST(TrainStandardTest, DivergenceAborts) {
  const auto d = Quadrant(300, 1);
  TrainConfig c;
  c.optimizer.kind = OptimizerKind::kSgd;
  c.optimizer.lr = 1e300;
  c.epochs = 3;
  EXPECT_THROW(TrainStandard(d, SmallNet(2, 2), c), DivergenceError);
}

TEST(TrainRegularizedTest, RejectsMoreThanTwoSensitiveClasses) {
  const auto d = Lattice(300, 3, 3, 1);
  EXPECT_THROW(TrainRegularized(d, SmallNet(2, 3), Regularized(0.5)),
               InvalidArgument);
}

TEST(TrainRegularizedTest, ZeroBetaSensitiveStaysAtChance) {
  const auto d = Quadrant(3000, 4);
  TrainConfig c = Regularized(0.0);
  c.epochs = 5;
  c.optimizer.lr = 1e-2;
  const auto r = TrainRegularized(d, SmallNet(2, 2), c);
  EXPECT_GE(r.test_honesty, 0.97);
  EXPECT_GE(r.test_curiosity, 0.42);
  EXPECT_LE(r.test_curiosity, 0.58);
  ASSERT_TRUE(r.per_epoch.back().tau.has_value());
}

TEST(TrainRegularizedTest, CuriosityGrowsWithBetaS) {
  const auto d = Quadrant(2000, 6);
  double prev = 0.0;
  for (double bs : {0.3, 0.5, 0.7}) {
    TrainConfig c = Regularized(bs);
    c.epochs = 8;
    c.optimizer.lr = 1e-2;
    const auto r = TrainRegularized(d, DefaultClassifierSpec(2, 2), c);
    const double val = r.per_epoch[r.selected_epoch - 1].val_curiosity.value();
    EXPECT_GE(val, prev - 0.02) << "beta_s " << bs;
    prev = val;
  }
}

TEST(TrainParameterizedTest, ZeroBetaSensitiveStaysAtChance) {
  const auto d = Quadrant(2000, 8);
  TrainConfig c = Parameterized(Scenario::kHbcRaw, {0.0, 1.0, 0.0});
  c.epochs = 4;
  c.optimizer.lr = 1e-2;
  const auto r = TrainParameterized(d, SmallNet(2, 2),
                                    DefaultAttackSpec(SmallNet(2, 2),
                                                      OutputKind::kRaw, 2),
                                    c);
  EXPECT_GE(r.test_curiosity, 0.4);
  EXPECT_LE(r.test_curiosity, 0.6);
  EXPECT_TRUE(r.per_epoch.front().decoder_loss.has_value());
}

TEST(TrainParameterizedTest, RejectsMismatchedDecoder) {
  const auto d = Quadrant(300, 1);
  const auto c = Parameterized(Scenario::kHbcRaw, {0.0, 0.7, 0.3});
  EXPECT_THROW(TrainParameterized(d, SmallNet(2, 2), DefaultDecoderSpec(3, 2), c),
               InvalidArgument);
  EXPECT_THROW(TrainParameterized(d, SmallNet(2, 2), DefaultDecoderSpec(2, 3), c),
               InvalidArgument);
  // A log transform is only meaningful on probabilities.
  EXPECT_THROW(TrainParameterized(d, SmallNet(2, 2),
                                  DefaultAttackSpec(SmallNet(2, 2),
                                                    OutputKind::kSoft, 2),
                                  c),
               InvalidArgument);
}

TEST(TrainParameterizedTest, DecoderStepDoesNotIncreaseItsLoss) {
  // One decoder update of the joint step, on a fixed batch at lr 1e-3.
  const auto d = Quadrant(200, 2);
  const MlpSpec f_spec = SmallNet(2, 2);
  const ModelParams f = InitParams(f_spec, 1);
  MlpSpec g_spec = DefaultDecoderSpec(2, 2);
  g_spec.dropout.clear();
  ModelParams g = InitParams(g_spec, 2);
  const Tensor y_hat = Logits(f, f_spec, d.features);
  auto g_loss = [&](const ModelParams& gp) {
    return DecoderLoss(Probabilities(gp, g_spec, y_hat), d.s);
  };
  OptimizerConfig oc;
  Optimizer opt(oc, g);
  for (int step = 0; step < 5; ++step) {
    const double before = g_loss(g);
    ad::Graph graph;
    const auto bound = Bind(graph, g, true);
    const auto fw = ForwardGraph(g_spec, bound, graph.Constant(y_hat), false,
                                 nullptr);
    graph.Backward(loss::Decoder(fw.probs, d.s));
    std::vector<Tensor> grads;
    for (size_t l = 0; l < bound.weights.size(); ++l) {
      grads.push_back(bound.weights[l].grad());
      grads.push_back(bound.biases[l].grad());
    }
    opt.Step(g, grads);
    EXPECT_LE(g_loss(g), before);
  }
}

TEST(TrainKdTest, NcTeacherTransfersNothing) {
  const auto d = Quadrant(2000, 9);
  TrainConfig c;
  c.epochs = 4;
  c.optimizer.lr = 1e-2;
  c.probe_epochs = 5;
  const auto teacher = TrainStandard(d, SmallNet(2, 2), c);
  TrainConfig sc = c;
  sc.kd = KdConfig{3.0, ""};
  const auto student = TrainKdStudent(d.Subset(Split::kTrain).features, d,
                                      teacher, SmallNet(2, 2), sc);
  EXPECT_GE(student.test_honesty, 0.95);
  EXPECT_GE(student.test_curiosity, 0.4);
  EXPECT_LE(student.test_curiosity, 0.6);
}

TEST(TrainKdTest, TeacherWithoutAttackIsRejected) {
  const auto d = Quadrant(300, 9);
  RunResult teacher;
  teacher.f_spec = SmallNet(2, 2);
  teacher.f_params = InitParams(teacher.f_spec, 0);
  TrainConfig c;
  EXPECT_THROW(TrainKdStudent(d.Subset(Split::kTrain).features, d, teacher,
                              SmallNet(2, 2), c),
               InvalidArgument);
}

TEST(PruningTest, FractionZeroMatchesRun) {
  const auto d = Quadrant(1000, 10);
  TrainConfig c = Regularized(0.5);
  c.epochs = 3;
  c.optimizer.lr = 1e-2;
  const auto r = TrainRegularized(d, SmallNet(2, 2), c);
  const std::vector<double> fractions = {0.0, 0.1, 0.2, 0.5, 0.9};
  const auto curve = RunPruningCurve(r, d, fractions);
  ASSERT_EQ(curve.size(), fractions.size());
  for (size_t i = 0; i < curve.size(); ++i) {
    EXPECT_EQ(curve[i].fraction, fractions[i]);
  }
  EXPECT_EQ(curve[0].honesty, r.test_honesty);
  EXPECT_EQ(curve[0].curiosity, r.test_curiosity);
}

TEST(CheckpointTest, ResumeReproducesRemainingEpochs) {
  const auto d = Quadrant(600, 12);
  TrainConfig c = Parameterized(Scenario::kHbcRaw, {0.0, 0.7, 0.3});
  c.epochs = 4;
  const MlpSpec f = SmallNet(2, 2);
  const MlpSpec g = DefaultAttackSpec(f, OutputKind::kRaw, 2);
  const auto direct = TrainParameterized(d, f, g, c);

  TrainOptions o;
  o.checkpoint_dir = TempDir("resume");
  TrainConfig shorter = c;
  shorter.epochs = 2;
  TrainParameterized(d, f, g, shorter, o);
  EXPECT_TRUE(fs::exists(o.checkpoint_dir / "state.json"));
  o.resume = true;
  std::vector<int> seen;
  o.on_epoch = [&](const EpochMetrics& m) { seen.push_back(m.epoch); };
  auto resumed = TrainParameterized(d, f, g, c, o);
  EXPECT_EQ(seen, (std::vector<int>{3, 4}));
  resumed.checkpoint_paths.clear();
  EXPECT_EQ(resumed.ToJson().dump(), direct.ToJson().dump());
  EXPECT_EQ(resumed.f_params, direct.f_params);

  TrainConfig other = c;
  other.seed = 5;
  EXPECT_THROW(TrainParameterized(d, f, g, other, o), InvalidArgument);
}

TEST(RunResultTest, JsonRoundTrip) {
  const auto d = Quadrant(400, 13);
  TrainConfig c = Parameterized(Scenario::kHbcSoft, {0.1, 0.6, 0.4});
  c.epochs = 2;
  const MlpSpec f = SmallNet(2, 2);
  const auto r =
      TrainParameterized(d, f, DefaultAttackSpec(f, OutputKind::kSoft, 2), c);
  const auto j = r.ToJson();
  for (const char* key : {"config", "per_epoch", "selected_epoch", "test",
                          "mean_entropy_bits", "attack", "checkpoint_paths"}) {
    EXPECT_TRUE(j.contains(key)) << key;
  }
  EXPECT_EQ(RunResult::FromJson(j).ToJson(), j);
  EXPECT_THROW(RunResult::FromJson({{"config", 3}}), ParseError);
}

TEST(EvaluateTest, DecodesWithTheRunAttack) {
  const auto d = Quadrant(400, 14);
  TrainConfig c = Regularized(0.5);
  c.epochs = 2;
  const auto r = TrainRegularized(d, SmallNet(2, 2), c);
  const auto test = d.Subset(Split::kTest);
  const auto e = Evaluate(r.f_spec, r.f_params, test, r.attack);
  EXPECT_DOUBLE_EQ(e.honesty, r.test_honesty);
  EXPECT_DOUBLE_EQ(*e.curiosity, r.test_curiosity);
  EXPECT_DOUBLE_EQ(e.mean_entropy_bits, r.mean_entropy_bits);
  EXPECT_EQ(e.entropies_bits.size(), test.size());
}

TEST(ConvexLogisticTest, PureTargetIsHonest) {
  const auto d = Quadrant(2000, 15);
  TrainConfig c;
  c.optimizer.lr = 0.1;
  c.epochs = 20;
  const auto r = TrainConvexLogistic(d, 1.0, 0.0, c);
  EXPECT_GE(r.honesty, 0.99);
  EXPECT_EQ(r.theta.size(), 3u);
  EXPECT_THROW(TrainConvexLogistic(Lattice(200, 3, 3, 1), 0.5, 0.5, c),
               InvalidArgument);
}

}  // namespace
}  // namespace hbc
