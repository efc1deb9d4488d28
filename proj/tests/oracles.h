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

#ifndef KINEPIPE_TESTS_ORACLES_H_
#define KINEPIPE_TESTS_ORACLES_H_

// Independent reference implementations used only by the tests. They
// deliberately avoid the library's code paths: FK composes 4x4 homogeneous
// matrices, derivatives come from finite differences, statistics are
// written as textbook double loops.

#include <random>
#include <vector>

#include <Eigen/Core>

#include "kinepipe/fitting.h"
#include "kinepipe/kinematics.h"
#include "kinepipe/types.h"

namespace kinepipe::testing {

struct NaiveBody {
  std::vector<Eigen::Vector3d> joints;
  std::vector<Eigen::Vector3d> sites;
};

NaiveBody NaiveForwardKinematics(const KinematicModel& model, const Pose& q);

// Central differences of all site positions, step h.
Eigen::MatrixXd FiniteDifferenceJacobian(const KinematicModel& model,
                                         const Pose& q, double h);

double BruteObjective(const KinematicModel& model, const Pose& q,
                      const FrameDetections& det, const Pose* q_prev,
                      const SolverConfig& config);

double BruteMadDeg(const CoordinateTrajectory& a, const CoordinateTrajectory& b);
double BruteMpjpeMm(const PointSeries& a, const PointSeries& b);
double BrutePearson(const CoordinateTrajectory& a, const CoordinateTrajectory& b);

struct BruteBlandAltman {
  double mean = 0.0, sd = 0.0, low = 0.0, high = 0.0;
};
BruteBlandAltman BruteBlandAltmanDeg(const CoordinateTrajectory& a,
                                     const CoordinateTrajectory& b);

// Mean |first| and |third| differences over revolute DOFs.
std::pair<double, double> BruteSmoothness(const CoordinateTrajectory& q);

// Angle difference b - a in degrees, mapped to (-180, 180].
double WrapDeg(double deg);

Pose RandomPose(const KinematicModel& model, std::mt19937_64& rng,
                double angle_range = 1.5, double translation_range = 1.0);

CoordinateTrajectory RandomTrajectory(const std::vector<DofKind>& kinds,
                                      int frames, std::mt19937_64& rng);

// Noiseless detections: FK of every frame of `q`, confidence 1.
DetectionSequence DetectionsFromTrajectory(const KinematicModel& model,
                                           const CoordinateTrajectory& q);

}  // namespace kinepipe::testing

#endif  // KINEPIPE_TESTS_ORACLES_H_
