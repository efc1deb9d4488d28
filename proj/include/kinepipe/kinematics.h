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

#ifndef KINEPIPE_KINEMATICS_H_
#define KINEPIPE_KINEMATICS_H_

#include <array>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

namespace kinepipe {

enum class JointType {
  kRevoluteX,
  kRevoluteY,
  kRevoluteZ,
  kTranslationalX,
  kTranslationalY,
  kTranslationalZ,
};

inline bool IsRevolute(JointType type) {
  return type == JointType::kRevoluteX || type == JointType::kRevoluteY ||
         type == JointType::kRevoluteZ;
}

// Unit axis index (0, 1, 2) of an elementary joint.
int JointAxis(JointType type);

std::string_view JointTypeName(JointType type);

enum class DofKind { kRevolute, kTranslational };

struct Segment {
  std::string name;
  int parent = -1;  // -1 for the root
  Eigen::Vector3d offset = Eigen::Vector3d::Zero();
  // Generalized coordinate indices owned by this segment, in the order the
  // elementary transforms are applied.
  std::vector<int> dofs;
};

struct Dof {
  int segment = 0;
  JointType type = JointType::kRevoluteZ;
};

struct Site {
  std::string name;
  int segment = 0;
  Eigen::Vector3d offset = Eigen::Vector3d::Zero();
};

// Generalized coordinates: radians for revolute DOFs, meters for
// translational DOFs.
using Pose = Eigen::VectorXd;

// World positions of every segment frame and every site, in meters.
struct BodyConfiguration {
  std::vector<Eigen::Vector3d> joint_positions;
  std::vector<Eigen::Vector3d> site_positions;
};

// An articulated chain. Immutable after construction; segments are stored
// in topological order (parent index < own index).
class KinematicModel {
 public:
  // Validates topology and DOF/site references; throws InputError.
  KinematicModel(std::vector<Segment> segments, std::vector<Dof> dofs,
                 std::vector<Site> sites);

  int nq() const { return static_cast<int>(dofs_.size()); }
  int num_segments() const { return static_cast<int>(segments_.size()); }
  int num_sites() const { return static_cast<int>(sites_.size()); }

  const std::vector<Segment>& segments() const { return segments_; }
  const std::vector<Dof>& dofs() const { return dofs_; }
  const std::vector<Site>& sites() const { return sites_; }

  std::vector<DofKind> dof_kinds() const;

  // Index of a named segment or site, -1 when absent.
  int SegmentIndex(std::string_view name) const;
  int SiteIndex(std::string_view name) const;

  // True when coordinate `dof` moves points attached to `segment`.
  bool DofAffectsSegment(int dof, int segment) const {
    return affects_[static_cast<size_t>(dof) * segments_.size() + segment];
  }

  // Coordinates of the free root translation (x, y, z), or -1 entries when
  // the root has no translational DOF along that axis.
  std::array<int, 3> root_translation_dofs() const;

 private:
  std::vector<Segment> segments_;
  std::vector<Dof> dofs_;
  std::vector<Site> sites_;
  std::vector<bool> affects_;
};

// Parses the line-oriented description format:
//   segment <name> parent=<name|none> offset=<x,y,z>
//   dof <segment> <revolute-x|...|translational-z>
//   site <name> <segment> offset=<x,y,z>
// '#' starts a comment. Throws ParseError with the offending line.
KinematicModel LoadModel(std::string_view description);

// The bundled 40-DOF humanoid (6-DOF free root + 34 revolute DOFs).
const KinematicModel& DefaultHumanoid();
std::string_view DefaultHumanoidDescription();

BodyConfiguration ForwardKinematics(const KinematicModel& model,
                                    const Pose& pose);

// Site positions only, written as a flat (3*S) vector.
Eigen::VectorXd SitePositions(const KinematicModel& model, const Pose& pose);

// Analytic (3 * sites.size()) x nq Jacobian of the selected site positions.
Eigen::MatrixXd PositionJacobian(const KinematicModel& model, const Pose& pose,
                                 std::span<const int> sites);

// Same as PositionJacobian over all sites, also returning the positions.
void SitePositionsAndJacobian(const KinematicModel& model, const Pose& pose,
                              Eigen::VectorXd* positions,
                              Eigen::MatrixXd* jacobian);

// Zero vector of length nq.
Pose NeutralPose(const KinematicModel& model);

}  // namespace kinepipe

#endif  // KINEPIPE_KINEMATICS_H_
