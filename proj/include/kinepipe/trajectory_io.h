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

#ifndef KINEPIPE_TRAJECTORY_IO_H_
#define KINEPIPE_TRAJECTORY_IO_H_

#include <string>
#include <string_view>
#include <vector>

#include "kinepipe/fitting.h"
#include "kinepipe/types.h"

namespace kinepipe {

// Trajectory CSV: header `frame,dof_0,...,dof_{nq-1}`, one row per frame,
// radians / meters. Values are written in shortest round-trip form, so a
// write/read cycle is lossless.
std::string FormatTrajectoryCsv(const CoordinateTrajectory& q);

// Untyped table as read from a trajectory CSV.
struct TrajectoryTable {
  int frames = 0;
  int nq = 0;
  std::vector<double> values;  // row-major
};

TrajectoryTable ParseTrajectoryCsv(std::string_view text);

// Attaches DOF kinds; throws DimensionError when nq disagrees.
CoordinateTrajectory ToTrajectory(const TrajectoryTable& table,
                                  const std::vector<DofKind>& dof_kinds);

// Positions CSV in long form: `frame,kind,index,x,y,z` with kind "joint" or
// "site", meters.
std::string FormatPositionsCsv(const PointSeries& joints,
                               const PointSeries& sites);

struct PositionTables {
  PointSeries joints;
  PointSeries sites;
};

PositionTables ParsePositionsCsv(std::string_view text);

// Bland-Altman plot data over revolute DOFs:
// `frame,dof,mean_deg,diff_deg` with diff = B - A wrapped to (-180, 180]
// and mean = A + diff / 2 (the midpoint along the short arc).
std::string FormatBlandAltmanPlotCsv(const CoordinateTrajectory& a,
                                     const CoordinateTrajectory& b);

}  // namespace kinepipe

#endif  // KINEPIPE_TRAJECTORY_IO_H_
