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

#include "kinepipe/pipeline.h"

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <numbers>
#include <numeric>
#include <random>

#include <gtest/gtest.h>

#include "kinepipe/error.h"
#include "kinepipe/filesystem.h"
#include "kinepipe/worker_pool.h"
#include "tests/oracles.h"

namespace kinepipe {
namespace {

namespace fs = std::filesystem;

const KinematicModel& Model() { return DefaultHumanoid(); }

fs::path TempDir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("kinepipe_pipeline_" + name);
  fs::remove_all(dir);
  return dir;
}

SyntheticSequence Sequence(std::uint64_t seed, int frames) {
  return GenerateSyntheticSequence(Model(), seed, frames, GaitParameters{});
}

PipelineConfig Baseline(const fs::path& dir) {
  PipelineConfig c = PipelineConfig::Baseline();
  c.intermediate_dir = dir;
  return c;
}

// Restores KINEPIPE_WORKERS on scope exit.
class ScopedWorkersEnv {
 public:
  explicit ScopedWorkersEnv(const char* value) {
    if (const char* old = std::getenv("KINEPIPE_WORKERS")) saved_ = old;
    if (value) {
      setenv("KINEPIPE_WORKERS", value, 1);
    } else {
      unsetenv("KINEPIPE_WORKERS");
    }
  }
  ~ScopedWorkersEnv() {
    if (saved_) {
      setenv("KINEPIPE_WORKERS", saved_->c_str(), 1);
    } else {
      unsetenv("KINEPIPE_WORKERS");
    }
  }

 private:
  std::optional<std::string> saved_;
};

TEST(SplitBatchesTest, Examples) {
  EXPECT_EQ(SplitBatches(25, 10),
            (std::vector<FrameRange>{{0, 10}, {10, 20}, {20, 25}}));
  EXPECT_EQ(SplitBatches(5, 10), (std::vector<FrameRange>{{0, 5}}));
  EXPECT_EQ(SplitBatches(20, 20), (std::vector<FrameRange>{{0, 20}}));
  EXPECT_THROW(SplitBatches(0, 10), InputError);
  EXPECT_THROW(SplitBatches(10, 0), InputError);
}

TEST(SplitBatchesTest, TilesTheSequence) {
  for (int t = 1; t < 40; ++t) {
    for (int len = 1; len < 15; ++len) {
      const auto ranges = SplitBatches(t, len);
      int expect = 0;
      for (size_t i = 0; i < ranges.size(); ++i) {
        EXPECT_EQ(ranges[i].begin, expect);
        EXPECT_GT(ranges[i].size(), 0);
        if (i + 1 < ranges.size()) EXPECT_EQ(ranges[i].size(), len);
        EXPECT_LE(ranges[i].size(), len);
        expect = ranges[i].end;
      }
      EXPECT_EQ(expect, t);
    }
  }
}

std::vector<FitResult> FitBatches(const DetectionSequence& det,
                                  const std::vector<FrameRange>& ranges,
                                  const SolverConfig& solver) {
  std::vector<FitResult> out;
  for (const FrameRange& r : ranges) {
    DetectionSequence part;
    part.keypoints = PointSeries(r.size(), det.sites());
    for (int t = r.begin; t < r.end; ++t) {
      const auto src = det.keypoints.frame(t);
      std::copy(src.begin(), src.end(), part.keypoints.frame(t - r.begin).begin());
      const auto c = det.frame_confidences(t);
      part.confidences.insert(part.confidences.end(), c.begin(), c.end());
    }
    out.push_back(FitSequence(Model(), part, solver));
  }
  return out;
}

TEST(AssembleBatchesTest, SingleBatchIsIdentity) {
  const SyntheticSequence seq = Sequence(1, 6);
  const DetectionSequence det =
      testing::DetectionsFromTrajectory(Model(), seq.ground_truth);
  const auto ranges = SplitBatches(6, 10);
  const auto batches = FitBatches(det, ranges, SolverConfig{});
  const AssembledFit out = AssembleBatches(batches, ranges);
  EXPECT_EQ(out.result.trajectory, batches[0].trajectory);
  EXPECT_EQ(out.result.iterations_used, batches[0].iterations_used);
  EXPECT_EQ(out.max_boundary_discontinuity, 0.0);
}

// The literal boundary jump includes the subject's own motion between the
// two frames, so on a moving sequence we compare against the true jump.
TEST(AssembleBatchesTest, NoiselessBoundariesAddLittleJump) {
  for (std::uint64_t seed : {2, 3, 4}) {
    const SyntheticSequence seq = Sequence(seed, 20);
    const DetectionSequence det =
        testing::DetectionsFromTrajectory(Model(), seq.ground_truth);
    const auto ranges = SplitBatches(20, 10);
    const AssembledFit out =
        AssembleBatches(FitBatches(det, ranges, SolverConfig{}), ranges);
    const CoordinateTrajectory& q = out.result.trajectory;
    const CoordinateTrajectory& truth = seq.ground_truth;
    for (int d = 0; d < Model().nq(); ++d) {
      if (Model().dof_kinds()[d] != DofKind::kRevolute) continue;
      const double fitted = q.at(10, d) - q.at(9, d);
      const double actual = truth.at(10, d) - truth.at(9, d);
      EXPECT_LT(std::abs(fitted - actual) * 180.0 / std::numbers::pi, 0.5) << d;
    }
  }
}

TEST(AssembleBatchesTest, StaticNoiselessBoundaryIsSmall) {
  const SyntheticSequence seq =
      GenerateSyntheticSequence(Model(), 2, 20, GaitParameters{0.5, 0.0});
  const DetectionSequence det =
      testing::DetectionsFromTrajectory(Model(), seq.ground_truth);
  const auto ranges = SplitBatches(20, 10);
  const AssembledFit out =
      AssembleBatches(FitBatches(det, ranges, SolverConfig{}), ranges);
  EXPECT_LT(out.max_boundary_dof_jump_deg, 0.5);
}

TEST(AssembleBatchesTest, OrderIndependentAndFrameCorrect) {
  const SyntheticSequence seq = Sequence(3, 23);
  const DetectionSequence det =
      testing::DetectionsFromTrajectory(Model(), seq.ground_truth);
  const auto ranges = SplitBatches(23, 5);
  const auto batches = FitBatches(det, ranges, SolverConfig{});
  const AssembledFit in_order = AssembleBatches(batches, ranges);

  std::vector<int> perm(ranges.size());
  std::iota(perm.begin(), perm.end(), 0);
  std::mt19937_64 rng(3);
  std::shuffle(perm.begin(), perm.end(), rng);
  std::vector<FitResult> pb;
  std::vector<FrameRange> pr;
  for (int i : perm) {
    pb.push_back(batches[i]);
    pr.push_back(ranges[i]);
  }
  const AssembledFit shuffled = AssembleBatches(pb, pr);
  EXPECT_EQ(shuffled.result.trajectory, in_order.result.trajectory);
  EXPECT_EQ(shuffled.max_boundary_discontinuity, in_order.max_boundary_discontinuity);

  for (size_t k = 0; k < ranges.size(); ++k) {
    for (int t = ranges[k].begin; t < ranges[k].end; ++t) {
      for (int d = 0; d < Model().nq(); ++d) {
        EXPECT_EQ(in_order.result.trajectory.at(t, d),
                  batches[k].trajectory.at(t - ranges[k].begin, d));
      }
    }
  }
}

TEST(AssembleBatchesTest, MissingBatchIsAnError) {
  const SyntheticSequence seq = Sequence(4, 12);
  const DetectionSequence det =
      testing::DetectionsFromTrajectory(Model(), seq.ground_truth);
  auto ranges = SplitBatches(12, 4);
  auto batches = FitBatches(det, ranges, SolverConfig{});
  ranges.erase(ranges.begin() + 1);
  batches.erase(batches.begin() + 1);
  EXPECT_THROW(AssembleBatches(batches, ranges), InputError);
  EXPECT_THROW(AssembleBatches({}, {}), InputError);
}

TEST(PipelineTest, ModesAgreeBitForBitUnderEqualSolvers) {
  const SyntheticSequence seq = Sequence(5, 25);
  PipelineConfig base = Baseline(TempDir("equal"));
  base.estimator.noise = NoiseModel::Noiseless();
  PipelineConfig opt = PipelineConfig::Optimized();
  opt.estimator.noise = NoiseModel::Noiseless();
  opt.solver = base.solver;
  opt.workers = 1;
  opt.sample_length = seq.size();
  const auto a = RunPipeline(Model(), seq, base);
  const auto b = RunPipeline(Model(), seq, opt);
  EXPECT_EQ(a.fit_result.trajectory, b.fit_result.trajectory);
  fs::remove_all(base.intermediate_dir);
}

TEST(PipelineTest, BaselineWritesTwoArchivesOptimizedNone) {
  const SyntheticSequence seq = Sequence(6, 12);
  const fs::path dir = TempDir("io");
  RecordingFileSystem rec_a(DefaultFileSystem());
  const auto a = RunPipeline(Model(), seq, Baseline(dir), rec_a, "walk");
  EXPECT_EQ(a.intermediates_written, 2);
  EXPECT_EQ(rec_a.writes(), 2);
  EXPECT_EQ(rec_a.reads(), 2);
  EXPECT_TRUE(fs::exists(dir / "walk_bboxes.kia"));
  EXPECT_TRUE(fs::exists(dir / "walk_keypoints.kia"));

  RecordingFileSystem rec_b(DefaultFileSystem());
  const auto b = RunPipeline(Model(), seq, PipelineConfig::Optimized(), rec_b);
  EXPECT_EQ(b.intermediates_written, 0);
  EXPECT_EQ(rec_b.writes(), 0);
  EXPECT_EQ(rec_b.reads(), 0);
  EXPECT_EQ(rec_b.directory_creations(), 0);
  fs::remove_all(dir);
}

TEST(PipelineTest, BaselineSurfacesIoFailure) {
  const SyntheticSequence seq = Sequence(7, 4);
  const fs::path blocker = TempDir("blocked");
  DefaultFileSystem().WriteFile(blocker, std::vector<std::uint8_t>{1});
  PipelineConfig c = Baseline(blocker / "sub");
  EXPECT_THROW(RunPipeline(Model(), seq, c), IoError);
  fs::remove_all(blocker);
}

TEST(PipelineTest, ParallelStagesBeatSequentialUnderInjectedLatency) {
  ScopedWorkersEnv env(nullptr);
  const SyntheticSequence seq = Sequence(8, 25);
  PipelineConfig base = Baseline(TempDir("latency"));
  base.stage_profile.per_frame_inference_ms = 100;
  PipelineConfig opt = PipelineConfig::Optimized();
  opt.stage_profile.per_frame_inference_ms = 100;
  opt.workers = 4;
  opt.sample_length = 7;
  const auto a = RunPipeline(Model(), seq, base);
  const auto b = RunPipeline(Model(), seq, opt);
  const double base_stages = a.per_stage_wall_s.detect_s + a.per_stage_wall_s.estimate_s;
  const double opt_stages = b.per_stage_wall_s.detect_s + b.per_stage_wall_s.estimate_s;
  EXPECT_GE(base_stages, 5.0);
  EXPECT_LE(opt_stages, base_stages / 3.0 * 1.05);
  EXPECT_EQ(b.workers_used, 4);
  EXPECT_EQ(b.batches, 4);
  fs::remove_all(base.intermediate_dir);
}

TEST(PipelineTest, BaselineTimeGrowsWithInferenceLatency) {
  const SyntheticSequence seq = Sequence(9, 10);
  PipelineConfig fast = Baseline(TempDir("mono"));
  PipelineConfig slow = fast;
  slow.stage_profile.per_frame_inference_ms = 20;
  const auto a = RunPipeline(Model(), seq, fast);
  const auto b = RunPipeline(Model(), seq, slow);
  EXPECT_GT(b.total_video_s, a.total_video_s);
  EXPECT_GE(b.total_video_s - a.total_video_s, 0.4 * 0.9);
  fs::remove_all(fast.intermediate_dir);
}

TEST(PipelineTest, RecordIsSelfConsistent) {
  const SyntheticSequence seq = Sequence(10, 15);
  PipelineConfig c = Baseline(TempDir("record"));
  c.stage_profile.simulated_fetch_ms = 50;
  const auto r = RunPipeline(Model(), seq, c);
  EXPECT_GE(r.init_latency_s, 0.05);
  EXPECT_EQ(r.frames, 15);
  EXPECT_EQ(r.workers_used, 1);
  EXPECT_GT(r.fps, 0.0);
  EXPECT_NEAR(r.fps, r.frames / r.total_video_s, 1e-9 * r.fps);
  const double parts = r.per_stage_wall_s.detect_s + r.per_stage_wall_s.estimate_s +
                       r.per_stage_wall_s.fit_s + r.serialize_wall_s;
  EXPECT_GE(r.total_video_s, parts - 1e-3);
  EXPECT_EQ(r.fit_result.frames(), 15);
  EXPECT_EQ(r.detections.frames(), 15);
  fs::remove_all(c.intermediate_dir);
}

TEST(PipelineTest, DefaultsAgreeWithinToleranceAcrossModes) {
  ScopedWorkersEnv env(nullptr);
  const SyntheticSequence seq = Sequence(11, 60);
  PipelineConfig base = Baseline(TempDir("defaults"));
  const auto a = RunPipeline(Model(), seq, base);
  const auto b = RunPipeline(Model(), seq, PipelineConfig::Optimized());
  EXPECT_LT(testing::BruteMadDeg(a.fit_result.trajectory, b.fit_result.trajectory), 0.5);
  EXPECT_GT(testing::BrutePearson(a.fit_result.trajectory, b.fit_result.trajectory), 0.99);
  fs::remove_all(base.intermediate_dir);
}

TEST(PipelineTest, OptimizedOutputDoesNotDependOnWorkers) {
  ScopedWorkersEnv env(nullptr);
  const SyntheticSequence seq = Sequence(12, 30);
  PipelineConfig one = PipelineConfig::Optimized();
  one.workers = 1;
  PipelineConfig four = one;
  four.workers = 4;
  EXPECT_EQ(RunPipeline(Model(), seq, one).fit_result.trajectory,
            RunPipeline(Model(), seq, four).fit_result.trajectory);
}

TEST(EffectiveWorkersTest, EnvironmentOverridesOptimizedOnly) {
  PipelineConfig opt = PipelineConfig::Optimized();
  opt.workers = 4;
  {
    ScopedWorkersEnv env(nullptr);
    EXPECT_EQ(EffectiveWorkers(opt), 4);
  }
  {
    ScopedWorkersEnv env("2");
    EXPECT_EQ(EffectiveWorkers(opt), 2);
    PipelineConfig base = PipelineConfig::Baseline();
    base.workers = 8;
    EXPECT_EQ(EffectiveWorkers(base), 1);
  }
  {
    ScopedWorkersEnv env("zero");
    EXPECT_THROW(EffectiveWorkers(opt), InputError);
  }
  {
    ScopedWorkersEnv env("0");
    EXPECT_THROW(EffectiveWorkers(opt), InputError);
  }
}

TEST(PipelineConfigTest, PresetsAndValidation) {
  EXPECT_EQ(PipelineConfig::Baseline().solver.max_iters, 100);
  EXPECT_EQ(PipelineConfig::Optimized().solver.max_iters, 10);
  EXPECT_EQ(PipelineConfig::Baseline().stage_profile.mode, InitMode::kMonolithic);
  EXPECT_EQ(PipelineConfig::Optimized().stage_profile.mode, InitMode::kModular);
  PipelineConfig c = PipelineConfig::Optimized();
  c.sample_length = 0;
  EXPECT_THROW(c.Validate(Model().num_sites()), InputError);
  c = PipelineConfig::Optimized();
  c.workers = 0;
  EXPECT_THROW(c.Validate(Model().num_sites()), InputError);
  c = PipelineConfig::Baseline();
  c.intermediate_dir.clear();
  EXPECT_THROW(c.Validate(Model().num_sites()), InputError);
  EXPECT_EQ(ParsePipelineMode("baseline"), PipelineMode::kBaseline);
  EXPECT_EQ(ParsePipelineMode("optimized"), PipelineMode::kOptimized);
  EXPECT_THROW(ParsePipelineMode("fast"), InputError);
  EXPECT_STREQ(PipelineModeName(PipelineMode::kOptimized), "optimized");
}

TEST(PipelineTest, InitIsPaidOncePerPipeline) {
  PipelineConfig c = Baseline(TempDir("once"));
  c.stage_profile.simulated_fetch_ms = 100;
  FetchLog log;
  const Pipeline p(Model(), c, DefaultFileSystem(), &log);
  EXPECT_GE(p.init_latency_s(), 0.1);
  p.Run(Sequence(13, 4), "a");
  p.Run(Sequence(14, 4), "b");
  EXPECT_EQ(log.events(), 1);
  fs::remove_all(c.intermediate_dir);
}

}  // namespace
}  // namespace kinepipe
