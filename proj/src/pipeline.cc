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
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <mutex>
#include <numbers>

#include "kinepipe/archive.h"
#include "kinepipe/error.h"
#include "kinepipe/worker_pool.h"

namespace kinepipe {
namespace {

using Clock = std::chrono::steady_clock;

double SecondsSince(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::vector<BoundingBox> DetectRange(const Detector& detector,
                                     const std::vector<FrameHandle>& frames,
                                     FrameRange range) {
  std::vector<BoundingBox> boxes;
  boxes.reserve(range.size());
  for (int t = range.begin; t < range.end; ++t) {
    auto found = detector.Detect(frames[t]);
    if (found.empty()) {
      throw InputError("no subject detected in frame " + std::to_string(t));
    }
    boxes.push_back(found.front());
  }
  return boxes;
}

DetectionSequence EstimateRange(const PoseEstimator& estimator,
                                const std::vector<FrameHandle>& frames,
                                FrameRange range,
                                const std::vector<BoundingBox>& boxes,
                                int sites) {
  DetectionSequence det;
  det.source_tag = estimator.source_tag();
  det.keypoints = PointSeries(range.size(), sites);
  det.confidences.reserve(static_cast<size_t>(range.size()) * sites);
  det.bboxes = boxes;
  for (int t = range.begin; t < range.end; ++t) {
    FrameEstimate est = estimator.Estimate(frames[t], boxes[t - range.begin]);
    if (est.confidences.size() != static_cast<size_t>(sites)) {
      throw DimensionError("estimator returned " +
                           std::to_string(est.confidences.size()) +
                           " sites, model has " + std::to_string(sites));
    }
    std::copy(est.keypoints.begin(), est.keypoints.end(),
              det.keypoints.frame(t - range.begin).begin());
    det.confidences.insert(det.confidences.end(), est.confidences.begin(),
                           est.confidences.end());
  }
  return det;
}

ArrayArchive BoxArchive(const std::vector<BoundingBox>& boxes) {
  NamedArray index{"frame_index", {boxes.size()}, std::vector<std::uint32_t>()};
  NamedArray geometry{"bboxes", {boxes.size(), 5}, std::vector<double>()};
  auto& idx = std::get<std::vector<std::uint32_t>>(index.data);
  auto& geo = std::get<std::vector<double>>(geometry.data);
  for (const auto& b : boxes) {
    idx.push_back(static_cast<std::uint32_t>(b.frame_index));
    geo.insert(geo.end(), {b.x, b.y, b.w, b.h, b.score});
  }
  return {std::move(index), std::move(geometry)};
}

std::vector<BoundingBox> BoxesFromArchive(const ArrayArchive& archive) {
  const auto& index = ArrayData<std::uint32_t>(FindArray(archive, "frame_index"));
  const NamedArray& geometry = FindArray(archive, "bboxes");
  const auto& geo = ArrayData<double>(geometry);
  if (geometry.dims != std::vector<std::uint64_t>{index.size(), 5}) {
    throw ArchiveError(ArchiveError::Kind::kFormat, "bboxes array has wrong shape");
  }
  std::vector<BoundingBox> boxes(index.size());
  for (size_t i = 0; i < index.size(); ++i) {
    boxes[i] = {static_cast<int>(index[i]), geo[5 * i], geo[5 * i + 1],
                geo[5 * i + 2], geo[5 * i + 3], geo[5 * i + 4]};
  }
  return boxes;
}

ArrayArchive KeypointArchive(const DetectionSequence& det) {
  const auto frames = static_cast<std::uint64_t>(det.frames());
  const auto sites = static_cast<std::uint64_t>(det.sites());
  return {NamedArray{"keypoints3d", {frames, sites, 3}, det.keypoints.xyz},
          NamedArray{"confidences", {frames, sites}, det.confidences}};
}

void KeypointsFromArchive(const ArrayArchive& archive, DetectionSequence* det) {
  const NamedArray& kp = FindArray(archive, "keypoints3d");
  const NamedArray& conf = FindArray(archive, "confidences");
  if (kp.dims.size() != 3 || kp.dims[2] != 3 || conf.dims.size() != 2 ||
      conf.dims[0] != kp.dims[0] || conf.dims[1] != kp.dims[1]) {
    throw ArchiveError(ArchiveError::Kind::kFormat,
                       "keypoint arrays have inconsistent shapes");
  }
  det->keypoints = PointSeries(static_cast<int>(kp.dims[0]),
                               static_cast<int>(kp.dims[1]));
  det->keypoints.xyz = ArrayData<double>(kp);
  det->confidences = ArrayData<double>(conf);
}

DetectionSequence ConcatDetections(const std::vector<DetectionSequence>& parts,
                                   int frames, int sites) {
  DetectionSequence out;
  out.keypoints = PointSeries(frames, sites);
  out.confidences.reserve(static_cast<size_t>(frames) * sites);
  size_t offset = 0;
  for (const auto& p : parts) {
    std::copy(p.keypoints.xyz.begin(), p.keypoints.xyz.end(),
              out.keypoints.xyz.begin() + offset);
    offset += p.keypoints.xyz.size();
    out.confidences.insert(out.confidences.end(), p.confidences.begin(),
                           p.confidences.end());
    out.bboxes.insert(out.bboxes.end(), p.bboxes.begin(), p.bboxes.end());
    out.source_tag = p.source_tag;
  }
  return out;
}

double WrappedAbs(double d) {
  constexpr double kTwoPi = 2.0 * std::numbers::pi;
  d = std::remainder(d, kTwoPi);
  return std::fabs(d);
}

}  // namespace

const char* PipelineModeName(PipelineMode mode) {
  return mode == PipelineMode::kBaseline ? "baseline" : "optimized";
}

PipelineMode ParsePipelineMode(const std::string& text) {
  if (text == "baseline") return PipelineMode::kBaseline;
  if (text == "optimized") return PipelineMode::kOptimized;
  throw InputError("unknown pipeline mode '" + text +
                   "' (expected baseline or optimized)");
}

PipelineConfig PipelineConfig::Baseline() {
  PipelineConfig c;
  c.mode = PipelineMode::kBaseline;
  c.workers = 1;
  c.solver.max_iters = SolverConfig::kBaselineMaxIters;
  c.stage_profile.mode = InitMode::kMonolithic;
  return c;
}

PipelineConfig PipelineConfig::Optimized() {
  PipelineConfig c;
  c.mode = PipelineMode::kOptimized;
  c.solver.max_iters = SolverConfig::kOptimizedMaxIters;
  c.stage_profile.mode = InitMode::kModular;
  return c;
}

void PipelineConfig::Validate(int num_sites) const {
  if (sample_length < 1) throw InputError("sample_length must be >= 1");
  if (workers < 1) throw InputError("workers must be >= 1");
  if (mode == PipelineMode::kBaseline && intermediate_dir.empty()) {
    throw InputError("baseline mode needs an intermediate_dir");
  }
  solver.Validate(num_sites);
  stage_profile.Validate();
  estimator.noise.Validate();
}

int EffectiveWorkers(const PipelineConfig& config) {
  if (config.mode == PipelineMode::kBaseline) return 1;
  if (const char* env = std::getenv("KINEPIPE_WORKERS")) {
    char* end = nullptr;
    const long n = std::strtol(env, &end, 10);
    if (end == env || *end != '\0' || n < 1 || n > 1024) {
      throw InputError(std::string("KINEPIPE_WORKERS must be an integer in "
                                   "[1, 1024], got '") + env + "'");
    }
    return static_cast<int>(n);
  }
  return config.workers;
}

std::vector<FrameRange> SplitBatches(int frames, int sample_length) {
  if (frames < 1) throw InputError("cannot split an empty sequence");
  if (sample_length < 1) throw InputError("sample_length must be >= 1");
  std::vector<FrameRange> ranges;
  for (int begin = 0; begin < frames; begin += sample_length) {
    ranges.push_back({begin, std::min(frames, begin + sample_length)});
  }
  return ranges;
}

AssembledFit AssembleBatches(const std::vector<FitResult>& batches,
                             const std::vector<FrameRange>& ranges) {
  if (batches.size() != ranges.size()) {
    throw InputError("got " + std::to_string(batches.size()) +
                     " batch results for " + std::to_string(ranges.size()) +
                     " ranges");
  }
  if (batches.empty()) throw InputError("no batches to assemble");
  std::vector<size_t> order(ranges.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    return ranges[a].begin < ranges[b].begin;
  });

  int expected = 0;
  for (size_t k : order) {
    if (ranges[k].begin != expected) {
      throw InputError("missing batch covering frame " +
                       std::to_string(expected));
    }
    if (ranges[k].size() < 1 || batches[k].frames() != ranges[k].size()) {
      throw DimensionError("batch for [" + std::to_string(ranges[k].begin) +
                           ", " + std::to_string(ranges[k].end) + ") has " +
                           std::to_string(batches[k].frames()) + " frames");
    }
    expected = ranges[k].end;
  }
  const int frames = expected;
  const auto& kinds = batches[order.front()].trajectory.dof_kinds();

  AssembledFit out;
  FitResult& r = out.result;
  r.trajectory = CoordinateTrajectory(frames, kinds);
  for (size_t pos = 0; pos < order.size(); ++pos) {
    const FitResult& b = batches[order[pos]];
    const FrameRange range = ranges[order[pos]];
    if (b.trajectory.dof_kinds() != kinds) {
      throw DimensionError("batches disagree on DOF layout");
    }
    for (int t = 0; t < range.size(); ++t) {
      r.trajectory.SetRow(range.begin + t, b.trajectory.RowPose(t));
    }
    r.fitted_configurations.insert(r.fitted_configurations.end(),
                                   b.fitted_configurations.begin(),
                                   b.fitted_configurations.end());
    r.per_frame_residual_mm.insert(r.per_frame_residual_mm.end(),
                                   b.per_frame_residual_mm.begin(),
                                   b.per_frame_residual_mm.end());
    r.iterations_used.insert(r.iterations_used.end(), b.iterations_used.begin(),
                             b.iterations_used.end());
    if (pos > 0) {
      const Pose before = r.trajectory.RowPose(range.begin - 1);
      const Pose after = r.trajectory.RowPose(range.begin);
      out.max_boundary_discontinuity =
          std::max(out.max_boundary_discontinuity, (after - before).norm());
      for (int d = 0; d < before.size(); ++d) {
        if (kinds[d] != DofKind::kRevolute) continue;
        out.max_boundary_dof_jump_deg =
            std::max(out.max_boundary_dof_jump_deg,
                     WrappedAbs(after[d] - before[d]) * 180.0 / std::numbers::pi);
      }
    }
  }
  return out;
}

Pipeline::Pipeline(const KinematicModel& model, PipelineConfig config,
                   FileSystem& fs, FetchLog* fetch_log)
    : model_(model), config_(std::move(config)), fs_(fs) {
  config_.Validate(model_.num_sites());
  StageInitProfile profile = config_.stage_profile;
  profile.mode = config_.mode == PipelineMode::kBaseline ? InitMode::kMonolithic
                                                         : InitMode::kModular;
  const auto start = Clock::now();
  stages_ = InitStages(profile, config_.estimator, fetch_log);
  init_latency_s_ = SecondsSince(start);
}

PipelineRunRecord Pipeline::Run(const SyntheticSequence& sequence,
                                const std::string& name) const {
  if (sequence.size() < 1) throw InputError("sequence has no frames");
  PipelineRunRecord record = config_.mode == PipelineMode::kBaseline
                                 ? RunBaseline(sequence, name)
                                 : RunOptimized(sequence);
  record.init_latency_s = init_latency_s_;
  record.frames = sequence.size();
  record.fps = record.total_video_s > 0.0 ? record.frames / record.total_video_s
                                          : 0.0;
  return record;
}

PipelineRunRecord Pipeline::RunBaseline(const SyntheticSequence& sequence,
                                        const std::string& name) const {
  PipelineRunRecord record;
  record.workers_used = 1;
  record.batches = 1;
  const auto total_start = Clock::now();
  const FrameRange all{0, sequence.size()};
  const auto dir = config_.intermediate_dir;
  const auto box_path = dir / (name + "_bboxes.kia");
  const auto keypoint_path = dir / (name + "_keypoints.kia");

  auto t = Clock::now();
  const auto detected = DetectRange(*stages_.detector, sequence.frames, all);
  record.per_stage_wall_s.detect_s = SecondsSince(t);

  t = Clock::now();
  fs_.CreateDirectories(dir);
  WriteIntermediate(fs_, box_path, BoxArchive(detected));
  ++record.intermediates_written;
  const auto boxes = BoxesFromArchive(ReadIntermediate(fs_, box_path));
  record.serialize_wall_s += SecondsSince(t);

  t = Clock::now();
  DetectionSequence estimated = EstimateRange(
      *stages_.estimator, sequence.frames, all, boxes, model_.num_sites());
  record.per_stage_wall_s.estimate_s = SecondsSince(t);

  t = Clock::now();
  WriteIntermediate(fs_, keypoint_path, KeypointArchive(estimated));
  ++record.intermediates_written;
  DetectionSequence reloaded;
  reloaded.bboxes = boxes;
  reloaded.source_tag = estimated.source_tag;
  KeypointsFromArchive(ReadIntermediate(fs_, keypoint_path), &reloaded);
  record.serialize_wall_s += SecondsSince(t);

  t = Clock::now();
  record.fit_result = FitSequence(model_, reloaded, config_.solver);
  record.per_stage_wall_s.fit_s = SecondsSince(t);

  record.detections = std::move(reloaded);
  record.total_video_s = SecondsSince(total_start);
  return record;
}

PipelineRunRecord Pipeline::RunOptimized(
    const SyntheticSequence& sequence) const {
  struct BatchOutput {
    DetectionSequence detections;
    FitResult fit;
  };
  PipelineRunRecord record;
  const auto total_start = Clock::now();
  const auto ranges = SplitBatches(sequence.size(), config_.sample_length);
  const int workers = EffectiveWorkers(config_);
  record.workers_used = std::min<int>(workers, ranges.size());
  record.batches = static_cast<int>(ranges.size());

  // Busy time per worker and stage; each worker writes only its own slot.
  std::vector<StageWall> busy(workers);
  std::vector<BatchOutput> outputs(ranges.size());
  RunIndexed(static_cast<int>(ranges.size()), workers,
             [&](int batch, int worker) {
               const FrameRange range = ranges[batch];
               StageWall& wall = busy[worker];
               auto t = Clock::now();
               const auto boxes =
                   DetectRange(*stages_.detector, sequence.frames, range);
               wall.detect_s += SecondsSince(t);
               t = Clock::now();
               BatchOutput& out = outputs[batch];
               out.detections =
                   EstimateRange(*stages_.estimator, sequence.frames, range,
                                 boxes, model_.num_sites());
               wall.estimate_s += SecondsSince(t);
               t = Clock::now();
               out.fit = FitSequence(model_, out.detections, config_.solver);
               wall.fit_s += SecondsSince(t);
             });

  std::vector<FitResult> fits;
  std::vector<DetectionSequence> parts;
  fits.reserve(outputs.size());
  parts.reserve(outputs.size());
  for (auto& o : outputs) {
    fits.push_back(std::move(o.fit));
    parts.push_back(std::move(o.detections));
  }
  AssembledFit assembled = AssembleBatches(fits, ranges);
  record.fit_result = std::move(assembled.result);
  record.max_boundary_discontinuity = assembled.max_boundary_discontinuity;
  record.detections =
      ConcatDetections(parts, sequence.size(), model_.num_sites());
  for (const StageWall& w : busy) {
    record.per_stage_wall_s.detect_s =
        std::max(record.per_stage_wall_s.detect_s, w.detect_s);
    record.per_stage_wall_s.estimate_s =
        std::max(record.per_stage_wall_s.estimate_s, w.estimate_s);
    record.per_stage_wall_s.fit_s =
        std::max(record.per_stage_wall_s.fit_s, w.fit_s);
  }
  record.total_video_s = SecondsSince(total_start);
  return record;
}

PipelineRunRecord RunPipeline(const KinematicModel& model,
                              const SyntheticSequence& sequence,
                              const PipelineConfig& config, FileSystem& fs,
                              const std::string& name) {
  Pipeline pipeline(model, config, fs);
  return pipeline.Run(sequence, name);
}

}  // namespace kinepipe
