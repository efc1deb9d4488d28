// Copyright 2026 The Kinepipe Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "kinepipe/cli.h"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

namespace kinepipe {
namespace {

namespace fs = std::filesystem;

struct Result {
  int code = 0;
  std::string out;
  std::string err;
};

Result Cli(std::vector<std::string> args) {
  args.insert(args.begin(), "kinepipe");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = RunCli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

int LineCount(const std::string& s) {
  return static_cast<int>(std::count(s.begin(), s.end(), '\n'));
}

void WriteFile(const fs::path& path, const std::string& text) {
  std::ofstream(path) << text;
}

std::string ReadFile(const fs::path& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("kinepipe_cli_" +
            std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string P(const std::string& name) const { return (dir_ / name).string(); }

  // Synthesizes a short sequence and returns its descriptor path.
  std::string Synth(int frames = 12) {
    const Result r = Cli({"synth", "--out-dir", P("seq"), "--seed", "5",
                          "--frames", std::to_string(frames)});
    EXPECT_EQ(r.code, kExitOk) << r.err;
    return P("seq/sequence.cfg");
  }

  fs::path dir_;
};

TEST_F(CliTest, NoSubcommandIsUsageError) {
  const Result r = Cli({});
  EXPECT_EQ(r.code, kExitUsage);
  EXPECT_EQ(LineCount(r.err), 1);
}

TEST_F(CliTest, UnknownOptionIsUsageError) {
  const Result r = Cli({"run", "--bogus"});
  EXPECT_EQ(r.code, kExitUsage);
  EXPECT_EQ(r.err.rfind("kinepipe: usage error: ", 0), 0u);
  EXPECT_EQ(LineCount(r.err), 1);
}

TEST_F(CliTest, SynthWritesGroundTruthAndDescriptor) {
  const std::string cfg = Synth(9);
  EXPECT_TRUE(fs::exists(P("seq/ground_truth.csv")));
  const std::string descriptor = ReadFile(cfg);
  EXPECT_NE(descriptor.find("seed=5\n"), std::string::npos);
  EXPECT_NE(descriptor.find("frames=9\n"), std::string::npos);
  EXPECT_EQ(LineCount(ReadFile(P("seq/ground_truth.csv"))), 10);
}

TEST_F(CliTest, SynthZeroFramesIsUsageError) {
  const Result r = Cli({"synth", "--out-dir", P("x"), "--frames", "0"});
  EXPECT_EQ(r.code, kExitUsage);
  EXPECT_NE(r.err.find("frames"), std::string::npos);
  EXPECT_EQ(LineCount(r.err), 1);
}

TEST_F(CliTest, MissingConfigNamesThePath) {
  const std::string missing = P("absent.cfg");
  const Result r = Cli({"run", "--sequence", missing, "--out-dir", P("o")});
  EXPECT_EQ(r.code, kExitUsage);
  EXPECT_NE(r.err.find(missing), std::string::npos);
  EXPECT_EQ(LineCount(r.err), 1);
}

TEST_F(CliTest, InvalidModeIsUsageError) {
  const std::string seq = Synth();
  const Result r = Cli({"run", "--sequence", seq, "--mode", "turbo", "--out-dir", P("o")});
  EXPECT_EQ(r.code, kExitUsage);
  EXPECT_NE(r.err.find("turbo"), std::string::npos);
}

TEST_F(CliTest, ConfigSyntaxErrorReportsLine) {
  const std::string seq = Synth();
  WriteFile(P("bad.cfg"), "mode=optimized\nworkers\n");
  const Result r = Cli({"run", "--sequence", seq, "--config", P("bad.cfg"),
                        "--out-dir", P("o")});
  EXPECT_EQ(r.code, kExitUsage);
  EXPECT_NE(r.err.find("line 2"), std::string::npos) << r.err;
  EXPECT_NE(r.err.find("bad.cfg"), std::string::npos) << r.err;
}

TEST_F(CliTest, BaselineRunWritesTwoArchives) {
  const std::string seq = Synth();
  const Result r = Cli({"run", "--sequence", seq, "--mode", "baseline",
                        "--out-dir", P("base")});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_NE(r.out.find("intermediates_written=2\n"), std::string::npos);
  int archives = 0;
  for (const auto& e : fs::directory_iterator(P("base/intermediates"))) {
    archives += e.path().extension() == ".kia";
  }
  EXPECT_EQ(archives, 2);
  EXPECT_TRUE(fs::exists(P("base/trajectory.csv")));
  EXPECT_TRUE(fs::exists(P("base/positions.csv")));
  EXPECT_TRUE(fs::exists(P("base/run_record.txt")));
}

TEST_F(CliTest, OptimizedRunWritesNoArchives) {
  const std::string seq = Synth();
  const Result r = Cli({"run", "--sequence", seq, "--workers", "2",
                        "--out-dir", P("opt")});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_NE(r.out.find("intermediates_written=0\n"), std::string::npos);
  EXPECT_NE(r.out.find("mode=optimized\n"), std::string::npos);
  EXPECT_FALSE(fs::exists(P("opt/intermediates")));
}

TEST_F(CliTest, CompareAgainstItselfIsPerfectAgreement) {
  const std::string seq = Synth();
  ASSERT_EQ(Cli({"run", "--sequence", seq, "--out-dir", P("a")}).code, kExitOk);
  const Result r = Cli({"compare", "--traj-a", P("a/trajectory.csv"), "--traj-b",
                        P("a/trajectory.csv"), "--pos-a", P("a/positions.csv"),
                        "--pos-b", P("a/positions.csv"), "--out", P("report.txt"),
                        "--plot-out", P("plot.csv")});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_NE(r.out.find("pooled.mad_deg=0\n"), std::string::npos);
  EXPECT_NE(r.out.find("pooled.pearson_r=1\n"), std::string::npos);
  EXPECT_NE(r.out.find("pooled.mpjpe_joints_mm=0\n"), std::string::npos);
  EXPECT_EQ(ReadFile(P("report.txt")), r.out);
  EXPECT_TRUE(fs::exists(P("plot.csv")));
}

TEST_F(CliTest, CompareShapeMismatchNamesBothShapes) {
  const std::string seq = Synth(12);
  ASSERT_EQ(Cli({"run", "--sequence", seq, "--out-dir", P("a")}).code, kExitOk);
  ASSERT_EQ(Cli({"synth", "--out-dir", P("seq2"), "--frames", "10"}).code, kExitOk);
  ASSERT_EQ(Cli({"run", "--sequence", P("seq2/sequence.cfg"), "--out-dir", P("b")}).code,
            kExitOk);
  const Result r = Cli({"compare", "--traj-a", P("a/trajectory.csv"), "--traj-b",
                        P("b/trajectory.csv"), "--pos-a", P("a/positions.csv"),
                        "--pos-b", P("b/positions.csv")});
  EXPECT_EQ(r.code, kExitFailure);
  EXPECT_NE(r.err.find("12x40"), std::string::npos) << r.err;
  EXPECT_NE(r.err.find("10x40"), std::string::npos) << r.err;
  EXPECT_EQ(LineCount(r.err), 1);
}

TEST_F(CliTest, CompareMissingFileIsUsageError) {
  const Result r = Cli({"compare", "--traj-a", P("x.csv"), "--traj-b", P("x.csv"),
                        "--pos-a", P("y.csv"), "--pos-b", P("y.csv")});
  EXPECT_EQ(r.code, kExitUsage);
  EXPECT_NE(r.err.find("x.csv"), std::string::npos);
}

TEST_F(CliTest, BenchZeroTrialsIsUsageError) {
  const std::string seq = Synth();
  WriteFile(P("a.cfg"), "mode=optimized\n");
  const Result r = Cli({"bench", "--trials", "0", "--sequences", seq, "--config-a",
                        P("a.cfg"), "--config-b", P("a.cfg"), "--report-out",
                        P("r.txt")});
  EXPECT_EQ(r.code, kExitUsage);
  EXPECT_NE(r.err.find("trials"), std::string::npos);
}

TEST_F(CliTest, BenchWritesReportAndKeyValues) {
  const std::string seq = Synth(6);
  WriteFile(P("a.cfg"), "mode=baseline\n");
  WriteFile(P("b.cfg"), "mode=optimized\nworkers=2\n");
  const Result r = Cli({"bench", "--trials", "1", "--sequences", seq + "," + seq,
                        "--config-a", P("a.cfg"), "--config-b", P("b.cfg"),
                        "--report-out", P("out/report.txt")});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const std::string report = ReadFile(P("out/report.txt"));
  EXPECT_EQ(report, r.out);
  EXPECT_NE(report.find("Improvement"), std::string::npos);
  const std::string kv = ReadFile(P("out/report.txt.kv"));
  EXPECT_NE(kv.find("a.trials=1\n"), std::string::npos);
  EXPECT_NE(kv.find("b.sequences=2\n"), std::string::npos);
  EXPECT_NE(kv.find("comparison.init_speedup="), std::string::npos);
}

}  // namespace
}  // namespace kinepipe
