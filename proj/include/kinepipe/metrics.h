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

#ifndef KINEPIPE_METRICS_H_
#define KINEPIPE_METRICS_H_

#include <optional>
#include <string>
#include <vector>

#include "kinepipe/fitting.h"
#include "kinepipe/types.h"

namespace kinepipe {

// All angle metrics compare revolute DOFs only, using differences wrapped to
// (-180, 180] degrees. Position metrics use no root or Procrustes alignment:
// both inputs are assumed to live in the same world frame.

// Mean |wrap(B - A)| over every revolute (frame, DOF) entry, in degrees.
double MadDegrees(const CoordinateTrajectory& a, const CoordinateTrajectory& b);

struct PearsonResult {
  double r = 0.0;              // mean of per-DOF correlations
  int dofs_used = 0;
  int dofs_excluded = 0;       // zero variance in A or B
};

// Per-DOF Pearson correlation over time, averaged uniformly over DOFs.
// Throws InputError when every DOF has zero variance.
PearsonResult PearsonR(const CoordinateTrajectory& a,
                       const CoordinateTrajectory& b);

// Mean Euclidean distance between corresponding points, in millimeters.
double MpjpeMm(const PointSeries& a, const PointSeries& b);

struct BlandAltman {
  double mean_diff_deg = 0.0;   // mean of wrap(B - A)
  double sd_diff_deg = 0.0;     // sample standard deviation (n - 1)
  double loa_low_deg = 0.0;     // mean - 1.96 sd
  double loa_high_deg = 0.0;    // mean + 1.96 sd
  long long samples = 0;
};

BlandAltman BlandAltmanDegrees(const CoordinateTrajectory& a,
                               const CoordinateTrajectory& b);

struct SmoothnessReport {
  double mean_abs_qdot = 0.0;     // rad / frame
  double mean_abs_qdddot = 0.0;   // rad / frame^3
  // Relative to a reference trajectory, in percent; set by the two-argument
  // overload only.
  std::optional<double> qdot_percent_change;
  std::optional<double> qdddot_percent_change;
};

// Forward first and third differences over revolute DOFs. Needs T >= 4.
SmoothnessReport Smoothness(const CoordinateTrajectory& q);
SmoothnessReport Smoothness(const CoordinateTrajectory& q,
                            const CoordinateTrajectory& reference);

struct StageConvergence {
  double detection_mpjpe_mm = 0.0;
  double fitted_sites_mpjpe_mm = 0.0;
  double fitted_joints_mpjpe_mm = 0.0;
  double mad_deg = 0.0;

  // detection divergence / fitted-site divergence.
  double AbsorptionFactor() const;
};

// Divergence between two pipeline variants at the detection stage and after
// fitting.
StageConvergence ComputeStageConvergence(const DetectionSequence& det_a,
                                         const DetectionSequence& det_b,
                                         const FitResult& fit_a,
                                         const FitResult& fit_b);

// Outputs of two pipeline variants on one sequence.
struct SequenceComparison {
  std::string name;
  const CoordinateTrajectory* trajectory_a = nullptr;
  const CoordinateTrajectory* trajectory_b = nullptr;
  const PointSeries* joints_a = nullptr;
  const PointSeries* joints_b = nullptr;
  const PointSeries* sites_a = nullptr;
  const PointSeries* sites_b = nullptr;
};

struct ConsistencyRow {
  std::string name;
  double mad_deg = 0.0;
  PearsonResult pearson;
  double mpjpe_joints_mm = 0.0;
  double mpjpe_sites_mm = 0.0;
  BlandAltman bland_altman;
};

struct ConsistencyReport {
  std::vector<ConsistencyRow> per_sequence;
  // MAD, MPJPE and Bland-Altman pool every (frame, DOF) or (frame, point)
  // sample across sequences; r is the mean over all (sequence, DOF) pairs.
  ConsistencyRow pooled;
};

ConsistencyReport CompareSequences(
    const std::vector<SequenceComparison>& sequences);

// Fixed-width table: one row per sequence plus a pooled "Mean" row.
std::string FormatConsistencyTable(const ConsistencyReport& report);
// key=value lines for machine consumption.
std::string ConsistencyKeyValues(const ConsistencyReport& report);

std::string FormatSmoothnessTable(const SmoothnessReport& report,
                                  const std::string& label);
std::string SmoothnessKeyValues(const SmoothnessReport& report);

}  // namespace kinepipe

#endif  // KINEPIPE_METRICS_H_
