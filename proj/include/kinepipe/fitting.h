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

#ifndef KINEPIPE_FITTING_H_
#define KINEPIPE_FITTING_H_

#include <vector>

#include <Eigen/Core>

#include "kinepipe/kinematics.h"
#include "kinepipe/types.h"

namespace kinepipe {

// Per-frame Levenberg solver settings.
//
// The frame objective is
//   sum_s w_s * c_s * |FK_s(q) - d_s|^2 + temporal_weight * |q - q_prev|^2
// where c_s is the detector confidence of site s and w_s its keypoint weight.
struct SolverConfig {
  static constexpr int kBaselineMaxIters = 100;
  static constexpr int kOptimizedMaxIters = 10;
  // Per m^2 of site residual: a 3 cm miss on one site costs about as much
  // as a 1 rad frame-to-frame coordinate change at temporal_weight = 1.
  static constexpr double kDefaultKeypointWeight = 1000.0;

  int max_iters = kOptimizedMaxIters;
  double step_tol = 1e-6;           // stop when |dq| < step_tol
  double damping = 1e-3;            // initial Levenberg lambda
  double temporal_weight = 1.0;     // mu
  // One weight per site; empty means kDefaultKeypointWeight for every site.
  std::vector<double> keypoint_weights;

  // Throws InputError when a field violates its range.
  void Validate(int num_sites) const;
  double KeypointWeight(int site) const {
    return keypoint_weights.empty() ? kDefaultKeypointWeight
                                    : keypoint_weights[site];
  }

  bool operator==(const SolverConfig&) const = default;
};

struct FrameFit {
  Pose q;
  double objective = 0.0;
  double residual_mm = 0.0;  // mean site-to-detection distance
  int iterations = 0;
};

struct FitResult {
  CoordinateTrajectory trajectory;
  std::vector<BodyConfiguration> fitted_configurations;
  std::vector<double> per_frame_residual_mm;
  std::vector<int> iterations_used;

  int frames() const { return trajectory.frames(); }
};

// q_prev == nullptr drops the temporal term (first frame of a sequence).
double FrameObjective(const KinematicModel& model, const Pose& q,
                      const FrameDetections& detections, const Pose* q_prev,
                      const SolverConfig& config);

// Analytic gradient of FrameObjective, assembled from PositionJacobian.
Eigen::VectorXd FrameGradient(const KinematicModel& model, const Pose& q,
                              const FrameDetections& detections,
                              const Pose* q_prev, const SolverConfig& config);

// Damped Gauss-Newton descent from q_init. When `accepted_objectives` is
// given it receives the objective at q_init followed by the objective after
// every accepted step.
FrameFit FitFrame(const KinematicModel& model,
                  const FrameDetections& detections, const Pose& q_init,
                  const Pose* q_prev, const SolverConfig& config,
                  std::vector<double>* accepted_objectives = nullptr);

// Neutral pose with the root translated so the model's site centroid lands
// on the detection centroid.
Pose InitialPose(const KinematicModel& model,
                 const FrameDetections& detections);

// Fits every frame in order, warm-starting from the previous solution.
FitResult FitSequence(const KinematicModel& model,
                      const DetectionSequence& detections,
                      const SolverConfig& config);

// Fitted joint/site positions as T x K x 3 series.
PointSeries FittedJointPositions(const FitResult& result);
PointSeries FittedSitePositions(const FitResult& result);

}  // namespace kinepipe

#endif  // KINEPIPE_FITTING_H_
