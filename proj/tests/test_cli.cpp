/*
 * Copyright 2026 The FheFL Authors.
 *
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

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "cli.hpp"

namespace {

namespace fs = std::filesystem;
using fhefl::cli::run;

struct Invocation {
  int code;
  std::string out;
  std::string err;
};

Invocation invoke(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = run(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  auto dir = fs::temp_directory_path() / ("fhefl_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

TEST(Cli, ParamsPrintsChain) {
  const auto r = invoke({"params", "--preset", "test-1024"});
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("1024"), std::string::npos);
}

TEST(Cli, UnknownPresetIsUsageError) {
  EXPECT_EQ(invoke({"params", "--preset", "nope"}).code, 2);
}

TEST(Cli, NoSubcommandIsUsageError) { EXPECT_EQ(invoke({}).code, 2); }

TEST(Cli, CheckBound) {
  const auto r = invoke({"check-bound", "--B", "8", "--M", "2", "--Gsq", "1", "--Zsq", "1"});
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("\"satisfied\""), std::string::npos);
  EXPECT_NE(r.out.find("3.857"), std::string::npos);
  EXPECT_EQ(invoke({"check-bound", "--B", "8", "--M", "0", "--Gsq", "1", "--Zsq", "1"}).code, 2);
}

TEST(Cli, MissingConfigIsUsageError) {
  EXPECT_EQ(invoke({"simulate", "--config", "/nonexistent/cfg.json"}).code, 2);
}

TEST(Cli, SimulateWritesPerSeedOutputs) {
  const auto dir = scratch("sim");
  const auto r = invoke({"simulate", "--config", FHEFL_CONFIG_DIR "/example.json", "--out", dir.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  for (int seed : {1, 2}) {
    std::ifstream csv(dir / ("metrics_seed" + std::to_string(seed) + ".csv"));
    ASSERT_TRUE(csv.good());
    std::string header;
    std::getline(csv, header);
    EXPECT_EQ(header.rfind("epoch,accuracy,aasr,", 0), 0u);
    EXPECT_TRUE(fs::exists(dir / ("summary_seed" + std::to_string(seed) + ".json")));
  }
  EXPECT_TRUE(fs::exists(dir / "summary.json"));
  fs::remove_all(dir);
}

TEST(Cli, SeedOverride) {
  const auto dir = scratch("seed");
  const auto r = invoke({"simulate", "--config", FHEFL_CONFIG_DIR "/example.json", "--mode", "plain", "--seed", "9",
                         "--out", dir.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(fs::exists(dir / "metrics_seed9.csv"));
  EXPECT_FALSE(fs::exists(dir / "metrics_seed1.csv"));
  fs::remove_all(dir);
}

TEST(Cli, BenchRejectsZeroReps) { EXPECT_EQ(invoke({"bench", "--preset", "test-1024", "--reps", "0"}).code, 2); }

TEST(Cli, BenchRows) {
  const auto rows = fhefl::cli::bench("test-1024", 2);
  std::vector<std::string> ops;
  for (const auto& row : rows) {
    ops.push_back(row.op);
    EXPECT_GT(row.mean_us, 0.0);
    EXPECT_GE(row.p95_us, 0.0);
  }
  EXPECT_EQ(ops, (std::vector<std::string>{"encrypt", "add", "mult_relin", "secure_round_10"}));
}

}  // namespace
