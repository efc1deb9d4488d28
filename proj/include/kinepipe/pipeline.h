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

#ifndef KINEPIPE_PIPELINE_H_
#define KINEPIPE_PIPELINE_H_

#include <filesystem>
#include <string>
#include <vector>

#include "kinepipe/filesystem.h"
#include "kinepipe/fitting.h"
#include "kinepipe/kinematics.h"
#include "kinepipe/stages.h"
#include "kinepipe/types.h"

namespace kinepipe {

enum class PipelineMode { kBaseline, kOptimized };

const char* PipelineModeName(PipelineMode mode);
// Accepts "baseline" or "optimized"; throws InputError otherwise.
PipelineMode ParsePipelineMode(const std::string& text);

struct PipelineConfig {
  PipelineMode mode = PipelineMode::kOptimized;
  int sample_length = 10;  // frames per batch (optimized mode)
  int workers = 4;         // optimized mode; baseline always runs on one
  std::filesystem::path intermediate_dir = "kinepipe_intermediates";
  SolverConfig solver;
  // The init mode follows the pipeline mode: baseline initializes the
  // monolithic stages, optimized the modular ones.
  StageInitProfile stage_profile;
  EstimatorSettings estimator;

  // Paper-default settings per mode (max_iters 100 vs 10).
  static PipelineConfig Baseline();
  static PipelineConfig Optimized();

  void Validate(int num_sites) const;
  bool operator==(const PipelineConfig&) const = default;
};

// Worker count actually used: 1 in baseline mode, otherwise KINEPIPE_WORKERS
// when set, otherwise config.workers.
int EffectiveWorkers(const PipelineConfig& config);

struct FrameRange {
  int begin = 0;
  int end = 0;  // exclusive

  int size() const { return end - begin; }
  bool operator==(const FrameRange&) const = default;
};

// Consecutive half-open ranges covering [0, frames), each sample_length long
// except possibly the last.
std::vector<FrameRange> SplitBatches(int frames, int sample_length);

struct AssembledFit {
  FitResult result;
  // Largest |q_last(k) - q_first(k+1)| over batch boundaries: Euclidean norm
  // over all DOFs, and the largest single revolute DOF jump in degrees.
  double max_boundary_discontinuity = 0.0;
  double max_boundary_dof_jump_deg = 0.0;
};

// Concatenates per-batch fits in frame order. batches[i] belongs to
// ranges[i]; the pairs may come in any order but must tile [0, T) exactly.
AssembledFit AssembleBatches(const std::vector<FitResult>& batches,
                             const std::vector<FrameRange>& ranges);

struct StageWall {
  double detect_s = 0.0;
  double estimate_s = 0.0;
  double fit_s = 0.0;
};

struct PipelineRunRecord {
  double init_latency_s = 0.0;
  // Baseline: wall-clock of each phase. Optimized: the busiest worker's time
  // in each stage (phases overlap across workers).
  StageWall per_stage_wall_s;
  double serialize_wall_s = 0.0;  // archive writes and reloads
  double total_video_s = 0.0;     // processing wall-clock, init excluded
  double fps = 0.0;               // frames / total_video_s
  int frames = 0;
  int workers_used = 0;
  int batches = 0;
  int intermediates_written = 0;
  double max_boundary_discontinuity = 0.0;
  FitResult fit_result;
  DetectionSequence detections;
};

// An initialized pipeline. Construction performs (and times) stage
// initialization once; Run may then process any number of sequences.
class Pipeline {
 public:
  Pipeline(const KinematicModel& model, PipelineConfig config,
           FileSystem& fs = DefaultFileSystem(), FetchLog* fetch_log = nullptr);

  double init_latency_s() const { return init_latency_s_; }
  const PipelineConfig& config() const { return config_; }

  // `name` keys the intermediate archive file names in baseline mode. The
  // returned record carries this pipeline's init latency.
  PipelineRunRecord Run(const SyntheticSequence& sequence,
                        const std::string& name) const;

 private:
  PipelineRunRecord RunBaseline(const SyntheticSequence& sequence,
                                const std::string& name) const;
  PipelineRunRecord RunOptimized(const SyntheticSequence& sequence) const;

  const KinematicModel& model_;
  PipelineConfig config_;
  FileSystem& fs_;
  StageSet stages_;
  double init_latency_s_ = 0.0;
};

// Init + one run.
PipelineRunRecord RunPipeline(const KinematicModel& model,
                              const SyntheticSequence& sequence,
                              const PipelineConfig& config,
                              FileSystem& fs = DefaultFileSystem(),
                              const std::string& name = "sequence");

}  // namespace kinepipe

#endif  // KINEPIPE_PIPELINE_H_
