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

#include "kinepipe/types.h"

#include <cmath>
#include <string>
#include <utility>

#include "kinepipe/error.h"

namespace kinepipe {

CoordinateTrajectory::CoordinateTrajectory(int frames,
                                           std::vector<DofKind> dof_kinds)
    : frames_(frames), dof_kinds_(std::move(dof_kinds)) {
  if (frames < 0) throw InputError("negative frame count");
  values_.assign(static_cast<size_t>(frames) * dof_kinds_.size(), 0.0);
}

Pose CoordinateTrajectory::RowPose(int t) const {
  auto r = row(t);
  return Eigen::Map<const Eigen::VectorXd>(r.data(), nq());
}

void CoordinateTrajectory::SetRow(int t, const Pose& q) {
  if (q.size() != nq()) {
    throw DimensionError("row has " + std::to_string(q.size()) +
                         " entries, trajectory has " + std::to_string(nq()));
  }
  Eigen::Map<Eigen::VectorXd>(values_.data() + Index(t, 0), nq()) = q;
}

void DetectionSequence::Validate() const {
  const size_t expected_kp = static_cast<size_t>(frames()) * sites() * 3;
  if (keypoints.xyz.size() != expected_kp) {
    throw DimensionError("keypoint array has " +
                         std::to_string(keypoints.xyz.size()) +
                         " values, expected " + std::to_string(expected_kp));
  }
  if (confidences.size() != static_cast<size_t>(frames()) * sites()) {
    throw DimensionError("confidence array has " +
                         std::to_string(confidences.size()) + " values, expected " +
                         std::to_string(frames() * sites()));
  }
  for (double c : confidences) {
    if (!(c >= 0.0 && c <= 1.0)) {
      throw InputError("confidence " + std::to_string(c) + " outside [0, 1]");
    }
  }
}

}  // namespace kinepipe
