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

#ifndef KINEPIPE_TYPES_H_
#define KINEPIPE_TYPES_H_

#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "kinepipe/kinematics.h"

namespace kinepipe {

// T x nq generalized coordinates, stored row-major (one row per frame).
// Rates derived from it are per-frame (rad/frame), not per-second.
class CoordinateTrajectory {
 public:
  CoordinateTrajectory() = default;
  CoordinateTrajectory(int frames, std::vector<DofKind> dof_kinds);

  int frames() const { return frames_; }
  int nq() const { return static_cast<int>(dof_kinds_.size()); }
  const std::vector<DofKind>& dof_kinds() const { return dof_kinds_; }

  double& at(int t, int d) { return values_[Index(t, d)]; }
  double at(int t, int d) const { return values_[Index(t, d)]; }

  std::span<const double> row(int t) const {
    return {values_.data() + Index(t, 0), static_cast<size_t>(nq())};
  }
  Pose RowPose(int t) const;
  void SetRow(int t, const Pose& q);

  std::span<const double> values() const { return values_; }
  std::span<double> mutable_values() { return values_; }

  bool operator==(const CoordinateTrajectory&) const = default;

 private:
  size_t Index(int t, int d) const {
    return static_cast<size_t>(t) * dof_kinds_.size() + d;
  }

  int frames_ = 0;
  std::vector<DofKind> dof_kinds_;
  std::vector<double> values_;
};

// T x K x 3 point positions in meters, flat row-major.
struct PointSeries {
  int frames = 0;
  int points = 0;
  std::vector<double> xyz;

  PointSeries() = default;
  PointSeries(int t, int k)
      : frames(t), points(k), xyz(static_cast<size_t>(t) * k * 3, 0.0) {}

  std::span<const double> frame(int t) const {
    return {xyz.data() + static_cast<size_t>(t) * points * 3,
            static_cast<size_t>(points) * 3};
  }
  std::span<double> frame(int t) {
    return {xyz.data() + static_cast<size_t>(t) * points * 3,
            static_cast<size_t>(points) * 3};
  }

  bool operator==(const PointSeries&) const = default;
};

struct BoundingBox {
  int frame_index = 0;
  double x = 0.0;  // pixels, top-left corner
  double y = 0.0;
  double w = 0.0;
  double h = 0.0;
  double score = 0.0;

  bool operator==(const BoundingBox&) const = default;
};

// Per-frame 3D keypoints (one per model site) and confidences.
struct DetectionSequence {
  PointSeries keypoints;
  std::vector<double> confidences;  // T x S
  std::vector<BoundingBox> bboxes;
  std::string source_tag;

  int frames() const { return keypoints.frames; }
  int sites() const { return keypoints.points; }
  std::span<const double> frame_confidences(int t) const {
    return {confidences.data() + static_cast<size_t>(t) * sites(),
            static_cast<size_t>(sites())};
  }

  // Throws DimensionError / InputError when the arrays disagree or a
  // confidence leaves [0, 1].
  void Validate() const;
};

// One frame of detections, as consumed by the fitter.
struct FrameDetections {
  std::span<const double> keypoints;    // 3 * S
  std::span<const double> confidences;  // S
};

inline FrameDetections FrameOf(const DetectionSequence& det, int t) {
  return {det.keypoints.frame(t), det.frame_confidences(t)};
}

}  // namespace kinepipe

#endif  // KINEPIPE_TYPES_H_
