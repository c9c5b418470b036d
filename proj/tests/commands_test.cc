/*
 * Copyright 2026 The dcaudit Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */


#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "absl/strings/str_cat.h"
#include "dcaudit/commands.h"
#include "gmock/gmock.h"
#include "gtest/gtest.h"
#include "json.hpp"

namespace dcaudit::cli {
namespace {

namespace fs = std::filesystem;
using ::testing::HasSubstr;

std::string ReadFile(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void WriteFile(const fs::path& path, const std::string& text) {
  std::ofstream(path, std::ios::binary) << text;
}

class CommandsTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::path(::testing::TempDir()) /
           ::testing::UnitTest::GetInstance()->current_test_info()->name();
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  RunConfig SmallAudit(const std::string& csv, const std::string& out) {
    RunConfig config;
    config.data_path = csv;
    config.outer_folds = 2;
    config.inner_folds = 2;
    config.seed = 3;
    config.max_bins = 32;
    config.resamples = 100;
    config.train.learning_rate = 0.1;
    config.train.max_rounds = 200;
    config.out_dir = (dir_ / out).string();
    return config;
  }

  fs::path dir_;
};

TEST(StageTest, ExitCodes) {
  EXPECT_EQ(ExitCode(Stage::kConfig), 2);
  EXPECT_EQ(ExitCode(Stage::kData), 3);
  EXPECT_EQ(ExitCode(Stage::kTraining), 4);
  EXPECT_EQ(ExitCode(Stage::kStatistics), 5);
  const absl::Status tagged =
      Tag(absl::InvalidArgumentError("bad"), Stage::kTraining);
  EXPECT_EQ(StageOf(tagged), Stage::kTraining);
  EXPECT_EQ(ExitCodeFor(tagged), 4);
  EXPECT_EQ(ExitCodeFor(absl::OkStatus()), 0);
  EXPECT_EQ(ExitCodeFor(absl::InternalError("x")), 1);
  EXPECT_TRUE(Tag(absl::OkStatus(), Stage::kData).ok());
  EXPECT_EQ(StageName(Stage::kStatistics), "statistics");
}

TEST_F(CommandsTest, AuditWritesArtifactsDeterministically) {
  const fs::path csv = dir_ / "data.csv";
  synthetic::GeneratorOptions gen;
  gen.rows = 1500;
  gen.seed = 4;
  ASSERT_TRUE(RunGenSynthetic("hidden-feature", gen, csv.string()).ok());

  RunConfig first = SmallAudit(csv.string(), "a");
  first.train.interaction_pairs = 1;
  auto report = RunAudit(first);
  ASSERT_TRUE(report.ok()) << report.status();
  const fs::path out(first.out_dir);
  for (const char* name :
       {"report.json", "run_metadata.json", "calibration.json",
        "models/schema.json", "models/plan.json", "models/mimic_gam.json",
        "models/outcome_gam.json", "models/linear.json",
        "models/error_pairs.csv", "curves/all_features.csv"}) {
    EXPECT_TRUE(fs::exists(out / name)) << name;
  }
  EXPECT_FALSE(fs::is_empty(out / "plots"));
  EXPECT_TRUE((*report).contains("fidelity"));
  EXPECT_TRUE((*report)["fidelity"].contains("linear"));
  EXPECT_TRUE((*report)["missing_feature_test"].contains("verdict"));

  RunConfig second = SmallAudit(csv.string(), "b");
  second.train.interaction_pairs = 1;
  second.jobs = 3;
  ASSERT_TRUE(RunAudit(second).ok());
  EXPECT_EQ(ReadFile(out / "report.json"),
            ReadFile(fs::path(second.out_dir) / "report.json"));

  // The error pairs feed the standalone test.
  TestMissingConfig test;
  test.errors_path = (out / "models/error_pairs.csv").string();
  test.options.resamples = 100;
  test.out_dir = (dir_ / "missing").string();
  fs::create_directories(test.out_dir);
  auto standalone = RunTestMissing(test);
  ASSERT_TRUE(standalone.ok()) << standalone.status();
  EXPECT_TRUE(fs::exists(dir_ / "missing/missing_feature_test.json"));
}

TEST_F(CommandsTest, MissingOutcomeColumnIsADataError) {
  const fs::path csv = dir_ / "data.csv";
  WriteFile(csv, "x,score\n1,0.5\n2,0.7\n");
  RunConfig config = SmallAudit(csv.string(), "out");
  auto report = RunAudit(config);
  ASSERT_FALSE(report.ok());
  EXPECT_EQ(ExitCodeFor(report.status()), 3);
  EXPECT_THAT(report.status().message(), HasSubstr("outcome"));
  const nlohmann::json partial =
      nlohmann::json::parse(ReadFile(fs::path(config.out_dir) / "report.json"));
  EXPECT_EQ(partial["failure"]["stage"], "data");
}

TEST_F(CommandsTest, MissingDataFileIsAConfigError) {
  RunConfig config = SmallAudit((dir_ / "nope.csv").string(), "out");
  EXPECT_EQ(ExitCodeFor(RunAudit(config).status()), 2);
}

TEST_F(CommandsTest, TooFewErrorPairsIsAStatisticsError) {
  std::string text = "mimic_error,outcome_error\n";
  for (int i = 0; i < 10; ++i) text += absl::StrCat(i, ",", 10 - i, "\n");
  WriteFile(dir_ / "pairs.csv", text);
  TestMissingConfig config;
  config.errors_path = (dir_ / "pairs.csv").string();
  config.out_dir = dir_.string();
  auto result = RunTestMissing(config);
  ASSERT_FALSE(result.ok());
  EXPECT_THAT(result.status().message(), HasSubstr("too few pairs"));
  EXPECT_EQ(ExitCodeFor(result.status()), 5);
}

TEST_F(CommandsTest, CalibrateCommandRespectsMode) {
  const fs::path csv = dir_ / "kinked.csv";
  synthetic::GeneratorOptions gen;
  gen.rows = 5000;
  gen.seed = 8;
  ASSERT_TRUE(RunGenSynthetic("kinked", gen, csv.string()).ok());
  RunConfig config;
  config.data_path = csv.string();
  config.out_dir = (dir_ / "auto").string();
  ASSERT_TRUE(RunCalibrate(config).ok());
  const nlohmann::json automatic =
      nlohmann::json::parse(ReadFile(fs::path(config.out_dir) / "calibration.json"));
  EXPECT_TRUE(automatic["decision"]["calibrated"].get<bool>());
  EXPECT_TRUE(fs::exists(fs::path(config.out_dir) / "plots/calibration_after.svg"));

  config.calibration = calibrate::CalibrationMode::kOff;
  config.out_dir = (dir_ / "off").string();
  ASSERT_TRUE(RunCalibrate(config).ok());
  const nlohmann::json off =
      nlohmann::json::parse(ReadFile(fs::path(config.out_dir) / "calibration.json"));
  EXPECT_FALSE(off["decision"]["calibrated"].get<bool>());
}

TEST_F(CommandsTest, BinaryExitCodes) {
  const std::string binary = DCAUDIT_BINARY;
  const auto run = [&](const std::string& args) {
    const int status = std::system((binary + " " + args + " > /dev/null 2>&1").c_str());
    return WEXITSTATUS(status);
  };
  const fs::path csv = dir_ / "data.csv";
  EXPECT_EQ(run("gen-synthetic --kind noise --rows 200 --out " + csv.string()), 0);
  EXPECT_TRUE(fs::exists(csv));
  EXPECT_EQ(run("audit --data " + csv.string()), 2);
  EXPECT_EQ(run("audit --bogus"), 2);
  EXPECT_EQ(run("audit --data " + csv.string() + " --K 1 --out " +
                (dir_ / "o").string()),
            2);
  WriteFile(dir_ / "bad.csv", "x,score\n1,2\n");
  EXPECT_EQ(run("audit --data " + (dir_ / "bad.csv").string() + " --out " +
                (dir_ / "o2").string()),
            3);
  EXPECT_EQ(run("gen-synthetic --kind unknown --out " + (dir_ / "u.csv").string()), 2);
}

}  // namespace
}  // namespace dcaudit::cli
