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

#include "cli/commands.h"

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "cli/experiment_config.h"
#include "gtest/gtest.h"
#include "hbc/errors.h"
#include "nlohmann/json.hpp"

namespace hbc::cli {
namespace {

using nlohmann::json;

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    root_ = fs::temp_directory_path() / (std::string("hbc_cli_") + info->name());
    fs::remove_all(root_);
    fs::create_directories(root_);
  }

  // Small quadrant run that trains in well under a second.
  json BaseConfig(const std::string& id) const {
    return {{"id", id},
            {"output_dir", (root_ / "runs").string()},
            {"dataset",
             {{"generator", "quadrant"},
              {"spec", {{"n", 600}, {"margin", 0.1}, {"seed", 3}}},
              {"split_seed", 3}}},
            {"model", {{"f", {{"widths", {2, 16, 2}}}}}},
            {"train",
             {{"scenario", "NC"},
              {"attack_kind", "none"},
              {"betas", {{"x", 0}, {"y", 1}, {"s", 0}}},
              {"epochs", 3},
              {"probe_epochs", 3},
              {"optimizer", {{"lr", 0.01}}}}}};
  }

  fs::path Write(const json& j, const std::string& name) const {
    const fs::path p = root_ / name;
    std::ofstream(p) << j.dump(2);
    return p;
  }

  static int Run(std::vector<std::string> args) {
    args.insert(args.begin(), "hbc");
    std::vector<char*> argv;
    for (auto& a : args) argv.push_back(a.data());
    return Main(static_cast<int>(argv.size()), argv.data());
  }

  static std::string Slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  }

  static size_t LineCount(const fs::path& p) {
    std::ifstream in(p);
    size_t n = 0;
    for (std::string line; std::getline(in, line);) ++n;
    return n;
  }

  fs::path root_;
};

TEST_F(CliTest, PrintConfigIsLoadable) {
  ::testing::internal::CaptureStdout();
  EXPECT_EQ(Run({"print-config"}), 0);
  const json printed = json::parse(testing::internal::GetCapturedStdout());
  EXPECT_NO_THROW(ExperimentConfig::FromJson(printed));
  EXPECT_NE(Run({"no-such-command"}), 0);
}

TEST_F(CliTest, GenDataIsByteStable) {
  const auto cfg = Write(BaseConfig("gen"), "gen.json");
  const auto a = root_ / "a.csv", b = root_ / "b.csv";
  EXPECT_EQ(Run({"gen-data", "-c", cfg.string(), "-o", a.string()}), 0);
  EXPECT_EQ(Run({"gen-data", "-c", cfg.string(), "-o", b.string()}), 0);
  EXPECT_TRUE(fs::exists(a.string() + ".meta.json"));
  EXPECT_EQ(Slurp(a), Slurp(b));
  EXPECT_EQ(LineCount(a), 601u);
  const json meta = ReadJsonFile(a.string() + ".meta.json");
  EXPECT_EQ(meta["spec"]["seed"], 3);
}

TEST_F(CliTest, GenDataRejectsBadMargin) {
  json j = BaseConfig("bad");
  j["dataset"]["spec"]["margin"] = 0.7;
  const auto cfg = Write(j, "bad.json");
  ::testing::internal::CaptureStderr();
  EXPECT_NE(Run({"gen-data", "-c", cfg.string(), "-o",
                 (root_ / "x.csv").string()}),
            0);
  EXPECT_NE(testing::internal::GetCapturedStderr().find("margin"),
            std::string::npos);
}

TEST_F(CliTest, TrainWritesRunLayout) {
  const auto cfg = Write(BaseConfig("nc"), "nc.json");
  EXPECT_EQ(Run({"train", "-c", cfg.string()}), 0);
  const fs::path dir = root_ / "runs" / "nc";
  for (const char* f : {"config.json", "result.json", "checkpoints/state.json",
                        "checkpoints/best_f.json", "report/test_outputs.csv",
                        "report/test_sensitive.csv", "report/metrics.csv"}) {
    EXPECT_TRUE(fs::exists(dir / f)) << f;
  }
  const json result = ReadJsonFile(dir / "result.json");
  EXPECT_GT(result["test"]["honesty"].get<double>(), 0.9);
  const RunResult back = LoadRun(dir);
  EXPECT_EQ(back.ToJson(), result);
}

TEST_F(CliTest, RegularizedWithThreeSensitiveClassesFailsBeforeTraining) {
  json j = BaseConfig("reg3");
  j["dataset"] = {{"generator", "lattice"},
                  {"spec",
                   {{"n", 300}, {"y_classes", 3}, {"s_classes", 3}}}};
  j["model"] = json::object();
  j["train"]["scenario"] = "HBC-P";
  j["train"]["attack_kind"] = "regularized";
  j["train"]["betas"] = {{"x", 0}, {"y", 0.5}, {"s", 0.5}};
  const auto cfg = Write(j, "reg3.json");
  ::testing::internal::CaptureStderr();
  EXPECT_NE(Run({"train", "-c", cfg.string()}), 0);
  ::testing::internal::GetCapturedStderr();
  EXPECT_FALSE(fs::exists(root_ / "runs" / "reg3" / "checkpoints"));
  EXPECT_FALSE(fs::exists(root_ / "runs" / "reg3" / "result.json"));
}

TEST_F(CliTest, ResumeMatchesUninterruptedRun) {
  json j = BaseConfig("full");
  j["train"]["epochs"] = 4;
  j["train"]["scenario"] = "HBC-R";
  j["train"]["attack_kind"] = "parameterized";
  j["train"]["betas"] = {{"x", 0}, {"y", 0.7}, {"s", 0.3}};
  EXPECT_EQ(Run({"train", "-c", Write(j, "full.json").string()}), 0);
  j["id"] = "split";
  j["train"]["epochs"] = 2;
  EXPECT_EQ(Run({"train", "-c", Write(j, "split2.json").string()}), 0);
  j["train"]["epochs"] = 4;
  EXPECT_EQ(Run({"train", "-c", Write(j, "split4.json").string(), "--resume"}),
            0);
  EXPECT_EQ(Slurp(root_ / "runs" / "full" / "result.json"),
            Slurp(root_ / "runs" / "split" / "result.json"));
}

TEST_F(CliTest, SweepWritesOneRowPerCell) {
  json j = BaseConfig("grid");
  j["train"]["epochs"] = 2;
  j["train"]["scenario"] = "HBC-R";
  j["train"]["attack_kind"] = "parameterized";
  j["train"]["betas"] = {{"x", 0}, {"y", 0.7}, {"s", 0.3}};
  j["sweep"] = {{"betas", {{0, 0.7, 0.3}, {0, 0.5, 0.5}, {0.4, 0.7, 0.3}}},
                {"scenarios", {"HBC-R", "HBC-P"}}};
  const auto rows = Sweep(ExperimentConfig::FromJson(j), 3);
  EXPECT_EQ(rows.size(), 6u);
  for (const auto& r : rows) EXPECT_TRUE(r.ok) << r.cell << ": " << r.error;
  const fs::path csv = root_ / "runs" / "grid" / "sweep.csv";
  EXPECT_EQ(LineCount(csv), 7u);
  std::ifstream in(csv);
  std::string header;
  std::getline(in, header);
  EXPECT_NE(header.find("mean_entropy_bits"), std::string::npos);
}

TEST_F(CliTest, SweepMarksFailedCellsAndContinues) {
  json j = BaseConfig("partial");
  j["train"]["epochs"] = 1;
  // NC takes beta_s = 0, so the second cell is invalid.
  j["sweep"] = {{"betas", {{0, 1, 0}, {0, 0.7, 0.3}}}, {"scenarios", json::array({"NC"})}};
  const auto cfg = Write(j, "partial.json");
  ::testing::internal::CaptureStdout();
  EXPECT_EQ(Run({"sweep", "-c", cfg.string()}), 1);
  ::testing::internal::GetCapturedStdout();
  const std::string csv = Slurp(root_ / "runs" / "partial" / "sweep.csv");
  EXPECT_NE(csv.find(",ok,"), std::string::npos);
  EXPECT_NE(csv.find(",failed,"), std::string::npos);
}

TEST_F(CliTest, KdWithoutTeacherIsError) {
  const auto cfg = Write(BaseConfig("student"), "student.json");
  ::testing::internal::CaptureStderr();
  EXPECT_NE(Run({"kd", "-c", cfg.string()}), 0);
  EXPECT_NE(testing::internal::GetCapturedStderr().find("teacher"),
            std::string::npos);
}

TEST_F(CliTest, KdPruneAndReport) {
  json t = BaseConfig("teacher");
  t["train"]["scenario"] = "HBC-P";
  t["train"]["attack_kind"] = "regularized";
  t["train"]["betas"] = {{"x", 0}, {"y", 0.5}, {"s", 0.5}};
  EXPECT_EQ(Run({"train", "-c", Write(t, "teacher.json").string()}), 0);
  const fs::path teacher = root_ / "runs" / "teacher";
  json s = BaseConfig("student");
  s["model"] = json::object();
  s["train"]["kd"] = {{"temperature", 3.0}, {"teacher", ""}};
  EXPECT_EQ(Run({"kd", "-c", Write(s, "student.json").string(), "--teacher",
                 teacher.string()}),
            0);
  const json student = ReadJsonFile(root_ / "runs" / "student" / "result.json");
  EXPECT_EQ(student["config"]["kd"]["teacher"], teacher.string());

  EXPECT_EQ(Run({"prune", "-r", teacher.string(), "--fractions", "0", "0.5",
                 "0.9"}),
            0);
  EXPECT_EQ(LineCount(teacher / "report" / "pruning.csv"), 1u + 3 * 2);

  EXPECT_EQ(Run({"train", "-c", Write(BaseConfig("nc"), "nc.json").string()}),
            0);
  const fs::path out = root_ / "paired";
  EXPECT_EQ(Run({"report", "-r", (root_ / "runs" / "nc").string(), "-r",
                 teacher.string(), "-o", out.string(), "--bins", "10"}),
            0);
  const std::string hist = Slurp(out / "entropy_histogram.csv");
  EXPECT_EQ(LineCount(out / "entropy_histogram.csv"), 1u + 2 * 10);
  EXPECT_NE(hist.find("nc,"), std::string::npos);
  EXPECT_NE(hist.find("teacher,"), std::string::npos);
  EXPECT_TRUE(fs::exists(out / "roc.csv"));
}

TEST_F(CliTest, OutputsCsvRoundTrip) {
  const Tensor v = Tensor::Matrix(2, 3, {0.1, 0.2, 0.7, 0.3, 0.3, 0.4});
  const auto p = root_ / "out.csv";
  WriteOutputsCsv(v, OutputKind::kSoft, p);
  const auto back = ReadOutputsCsv(p);
  EXPECT_EQ(back.values, v);
  EXPECT_EQ(back.kind, OutputKind::kSoft);
  WriteLabelsCsv({0, 1, 1}, root_ / "s.csv");
  EXPECT_EQ(ReadLabelsCsv(root_ / "s.csv"), (std::vector<int>{0, 1, 1}));
}

TEST_F(CliTest, AuditRejectsMalformedHeader) {
  std::ofstream(root_ / "bad.csv") << "q0,q1\n0.5,0.5\n";
  std::ofstream(root_ / "gap.csv") << "p0,p2\n0.5,0.5\n";
  WriteLabelsCsv({0}, root_ / "s.csv");
  AuditInputs in;
  in.labels = root_ / "s.csv";
  in.outputs = root_ / "bad.csv";
  EXPECT_THROW(Audit(in), ParseError);
  in.outputs = root_ / "gap.csv";
  EXPECT_THROW(Audit(in), ParseError);
  ::testing::internal::CaptureStderr();
  EXPECT_NE(Run({"audit", "--outputs", (root_ / "bad.csv").string(),
                 "--labels", (root_ / "s.csv").string()}),
            0);
  ::testing::internal::GetCapturedStderr();
}

TEST_F(CliTest, AuditSeparatesHonestFromCuriousOutputs) {
  json nc = BaseConfig("nc");
  nc["dataset"]["spec"]["n"] = 3000;
  nc["train"]["epochs"] = 10;
  EXPECT_EQ(Run({"train", "-c", Write(nc, "nc.json").string()}), 0);
  json hbc = nc;
  hbc["id"] = "hbc";
  hbc["train"]["scenario"] = "HBC-R";
  hbc["train"]["attack_kind"] = "parameterized";
  hbc["train"]["betas"] = {{"x", 0}, {"y", 0.7}, {"s", 0.3}};
  EXPECT_EQ(Run({"train", "-c", Write(hbc, "hbc.json").string()}), 0);

  const fs::path nc_dir = root_ / "runs" / "nc" / "report";
  const fs::path hbc_dir = root_ / "runs" / "hbc" / "report";
  AuditInputs in;
  in.outputs = hbc_dir / "test_outputs.csv";
  in.labels = hbc_dir / "test_sensitive.csv";
  in.baseline_outputs = nc_dir / "test_outputs.csv";
  in.baseline_labels = nc_dir / "test_sensitive.csv";
  const json r = Audit(in);
  EXPECT_EQ(r["outputs"], "raw");
  EXPECT_GE(r["probe_delta_s"].get<double>(), 0.9);
  EXPECT_LE(r["baseline"]["probe_delta_s"].get<double>(), 0.6);
  EXPECT_GE(r["baseline"]["probe_delta_s"].get<double>(), 0.4);
  EXPECT_GT(r["deltas"]["probe_delta_s"].get<double>(), 0.3);
  for (const char* key : {"n", "mean_entropy_bits", "tail_mass_over_1bit"}) {
    EXPECT_TRUE(r.contains(key)) << key;
  }
}

TEST(ExperimentConfigTest, Validation) {
  json j = {{"dataset", {{"generator", "quadrant"}}}};
  EXPECT_NO_THROW(ExperimentConfig::FromJson(j));
  j["dataset"]["csv"] = "data.csv";
  EXPECT_THROW(ExperimentConfig::FromJson(j), InvalidArgument);
  j["dataset"].erase("generator");
  EXPECT_NO_THROW(ExperimentConfig::FromJson(j));
  j["sweep"] = {{"betas", json::array()}};
  EXPECT_THROW(ExperimentConfig::FromJson(j), InvalidArgument);
  j["sweep"] = {{"betas", json::array({json::array({0, 1})})}};
  EXPECT_THROW(ExperimentConfig::FromJson(j), ParseError);
  EXPECT_THROW(ExperimentConfig::FromJson(json::object()), InvalidArgument);
  const ExperimentConfig c = ExperimentConfig::FromJson(
      {{"dataset", {{"generator", "lattice"}}}, {"id", "x"}});
  EXPECT_EQ(ExperimentConfig::FromJson(c.ToJson()).ToJson(), c.ToJson());
}

}  // namespace
}  // namespace hbc::cli
