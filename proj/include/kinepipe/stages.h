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

#ifndef KINEPIPE_STAGES_H_
#define KINEPIPE_STAGES_H_

#include <atomic>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "kinepipe/kinematics.h"
#include "kinepipe/types.h"

namespace kinepipe {

// Pinhole camera used to project the synthetic subject into pixels.
struct Camera {
  int width = 1920;
  int height = 1080;
  double focal_px = 800.0;
  Eigen::Vector3d position{0.0, -6.0, 0.0};  // looks along +y, z up
};

// Opaque stand-in for a decoded video frame. Carries the ground-truth site
// positions of the subject (absent for an empty frame).
struct FrameHandle {
  int index = 0;
  std::uint64_t sequence_seed = 0;  // keys the estimator noise streams
  std::optional<std::vector<double>> subject_sites;  // 3 * S meters
  Camera camera;
};

struct GaitParameters {
  double amplitude = 0.5;    // hip flexion amplitude, radians
  double frequency = 0.02;   // strides per frame

  void Validate() const;
  bool operator==(const GaitParameters&) const = default;
};

struct SyntheticSequence {
  std::uint64_t seed = 0;
  GaitParameters gait;
  CoordinateTrajectory ground_truth;
  std::vector<FrameHandle> frames;

  int size() const { return static_cast<int>(frames.size()); }
};

// Band-limited gait-like motion over `model` (the bundled humanoid layout is
// assumed for the per-DOF profile; unknown DOFs stay at zero).
SyntheticSequence GenerateSyntheticSequence(const KinematicModel& model,
                                            std::uint64_t seed, int frames,
                                            const GaitParameters& gait);

// Detection noise of a pose-estimator variant.
//
// The estimator reports a calibrated confidence: the probability, under its
// own noise model, that a keypoint lies within `confidence_radius` of the
// truth (the chi distribution CDF with three degrees of freedom).
struct NoiseModel {
  double sigma = 0.02;               // per-coordinate Gaussian, meters
  double rigid_offset_sigma = 0.0;   // per-stream constant shift, meters
  double confidence_radius = 0.025;  // meters

  double ReportedConfidence() const;

  static NoiseModel Default();
  static NoiseModel Noiseless();
  // Strongly diverging architecture: large noise plus a rigid offset.
  static NoiseModel Divergent();

  void Validate() const;
  bool operator==(const NoiseModel&) const = default;
};

enum class InitMode { kMonolithic, kModular };

struct StageInitProfile {
  InitMode mode = InitMode::kModular;
  int simulated_fetch_ms = 0;       // monolithic only
  int per_frame_inference_ms = 0;   // slept by detect and by estimate_pose

  void Validate() const;
  bool operator==(const StageInitProfile&) const = default;
};

// Counts simulated remote fetches. Shared by reference so callers can
// observe what an initialization did.
class FetchLog {
 public:
  void Record() { events_.fetch_add(1, std::memory_order_relaxed); }
  int events() const { return events_.load(std::memory_order_relaxed); }

 private:
  std::atomic<int> events_{0};
};

struct FrameEstimate {
  std::vector<double> keypoints;    // 3 * S meters
  std::vector<double> confidences;  // S
};

// Bounding-box detector. Immutable after construction.
class Detector {
 public:
  explicit Detector(int per_frame_inference_ms)
      : per_frame_inference_ms_(per_frame_inference_ms) {}

  // Tight box around the projected subject grown by 5% of its extent on
  // every side; empty when the frame has no subject.
  std::vector<BoundingBox> Detect(const FrameHandle& frame) const;

 private:
  int per_frame_inference_ms_;
};

// Crop-based 3D pose estimator: ground truth plus its noise model.
class PoseEstimator {
 public:
  PoseEstimator(int per_frame_inference_ms, NoiseModel noise,
                std::string source_tag)
      : per_frame_inference_ms_(per_frame_inference_ms),
        noise_(noise),
        source_tag_(std::move(source_tag)) {}

  // Noise is a pure function of (sequence seed, frame index, source tag).

  FrameEstimate Estimate(const FrameHandle& frame,
                         const BoundingBox& bbox) const;

  const std::string& source_tag() const { return source_tag_; }
  const NoiseModel& noise() const { return noise_; }

 private:
  int per_frame_inference_ms_;
  NoiseModel noise_;
  std::string source_tag_;
};

struct EstimatorSettings {
  NoiseModel noise = NoiseModel::Default();
  std::string source_tag = "metrabs";

  bool operator==(const EstimatorSettings&) const = default;
};

// Initialized detector + estimator pair. Handles are immutable and may be
// shared across worker threads.
struct StageSet {
  std::shared_ptr<const Detector> detector;
  std::shared_ptr<const PoseEstimator> estimator;
  InitMode mode = InitMode::kModular;
};

// Monolithic mode sleeps `simulated_fetch_ms` once (remote graph fetch and
// compile) and records one fetch event; modular mode builds both stages from
// local state with no fetch.
StageSet InitStages(const StageInitProfile& profile,
                    const EstimatorSettings& estimator,
                    FetchLog* fetch_log = nullptr);

// Runs detect + estimate over the given frames; returns one detection row per
// frame. Frames without a subject are an InputError.
DetectionSequence RunStages(const StageSet& stages,
                            const std::vector<FrameHandle>& frames,
                            int begin, int end);

// Projects a world point into pixel coordinates.
Eigen::Vector2d Project(const Camera& camera, const Eigen::Vector3d& point);

}  // namespace kinepipe

#endif  // KINEPIPE_STAGES_H_
