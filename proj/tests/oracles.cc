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

#include "tests/oracles.h"

#include <cmath>
#include <numbers>

#include <Eigen/Geometry>

namespace kinepipe::testing {
namespace {

using Mat4 = Eigen::Matrix4d;

Mat4 Translation(const Eigen::Vector3d& t) {
  Mat4 m = Mat4::Identity();
  m.block<3, 1>(0, 3) = t;
  return m;
}

Mat4 ElementaryTransform(JointType type, double value) {
  Mat4 m = Mat4::Identity();
  const double c = std::cos(value), s = std::sin(value);
  switch (type) {
    case JointType::kRevoluteX:
      m(1, 1) = c; m(1, 2) = -s;
      m(2, 1) = s; m(2, 2) = c;
      break;
    case JointType::kRevoluteY:
      m(0, 0) = c; m(0, 2) = s;
      m(2, 0) = -s; m(2, 2) = c;
      break;
    case JointType::kRevoluteZ:
      m(0, 0) = c; m(0, 1) = -s;
      m(1, 0) = s; m(1, 1) = c;
      break;
    case JointType::kTranslationalX:
      m(0, 3) = value;
      break;
    case JointType::kTranslationalY:
      m(1, 3) = value;
      break;
    case JointType::kTranslationalZ:
      m(2, 3) = value;
      break;
  }
  return m;
}

constexpr double kRadToDeg = 180.0 / std::numbers::pi;

}  // namespace

NaiveBody NaiveForwardKinematics(const KinematicModel& model, const Pose& q) {
  const auto& segments = model.segments();
  std::vector<Mat4> world(segments.size());
  NaiveBody body;
  for (size_t i = 0; i < segments.size(); ++i) {
    const Segment& seg = segments[i];
    Mat4 m = seg.parent < 0 ? Mat4::Identity() : world[seg.parent];
    m = m * Translation(seg.offset);
    for (int d : seg.dofs) {
      m = m * ElementaryTransform(model.dofs()[d].type, q[d]);
    }
    world[i] = m;
    body.joints.push_back(m.block<3, 1>(0, 3));
  }
  for (const Site& site : model.sites()) {
    const Eigen::Vector4d p =
        world[site.segment] * Eigen::Vector4d(site.offset.x(), site.offset.y(),
                                              site.offset.z(), 1.0);
    body.sites.push_back(p.head<3>());
  }
  return body;
}

Eigen::MatrixXd FiniteDifferenceJacobian(const KinematicModel& model,
                                         const Pose& q, double h) {
  const int s = model.num_sites();
  Eigen::MatrixXd jac(3 * s, model.nq());
  for (int d = 0; d < model.nq(); ++d) {
    Pose plus = q, minus = q;
    plus[d] += h;
    minus[d] -= h;
    const NaiveBody bp = NaiveForwardKinematics(model, plus);
    const NaiveBody bm = NaiveForwardKinematics(model, minus);
    for (int i = 0; i < s; ++i) {
      jac.block<3, 1>(3 * i, d) = (bp.sites[i] - bm.sites[i]) / (2.0 * h);
    }
  }
  return jac;
}

double BruteObjective(const KinematicModel& model, const Pose& q,
                      const FrameDetections& det, const Pose* q_prev,
                      const SolverConfig& config) {
  const NaiveBody body = NaiveForwardKinematics(model, q);
  double total = 0.0;
  for (int s = 0; s < model.num_sites(); ++s) {
    const double w = (config.keypoint_weights.empty()
                          ? SolverConfig::kDefaultKeypointWeight
                          : config.keypoint_weights[s]) *
                     det.confidences[s];
    for (int a = 0; a < 3; ++a) {
      const double r = body.sites[s][a] - det.keypoints[3 * s + a];
      total += w * r * r;
    }
  }
  if (q_prev != nullptr) {
    for (int d = 0; d < q.size(); ++d) {
      const double r = q[d] - (*q_prev)[d];
      total += config.temporal_weight * r * r;
    }
  }
  return total;
}

double WrapDeg(double deg) {
  double w = std::fmod(deg, 360.0);
  if (w <= -180.0) w += 360.0;
  if (w > 180.0) w -= 360.0;
  return w;
}

double BruteMadDeg(const CoordinateTrajectory& a,
                   const CoordinateTrajectory& b) {
  double sum = 0.0;
  long n = 0;
  for (int t = 0; t < a.frames(); ++t) {
    for (int d = 0; d < a.nq(); ++d) {
      if (a.dof_kinds()[d] != DofKind::kRevolute) continue;
      sum += std::fabs(WrapDeg((b.at(t, d) - a.at(t, d)) * kRadToDeg));
      ++n;
    }
  }
  return n == 0 ? 0.0 : sum / n;
}

double BruteMpjpeMm(const PointSeries& a, const PointSeries& b) {
  double sum = 0.0;
  for (int t = 0; t < a.frames; ++t) {
    for (int k = 0; k < a.points; ++k) {
      double sq = 0.0;
      for (int c = 0; c < 3; ++c) {
        const double d = a.frame(t)[3 * k + c] - b.frame(t)[3 * k + c];
        sq += d * d;
      }
      sum += std::sqrt(sq);
    }
  }
  return 1000.0 * sum / (static_cast<double>(a.frames) * a.points);
}

double BrutePearson(const CoordinateTrajectory& a,
                    const CoordinateTrajectory& b) {
  double total = 0.0;
  int used = 0;
  const int n = a.frames();
  for (int d = 0; d < a.nq(); ++d) {
    double ma = 0.0, mb = 0.0;
    for (int t = 0; t < n; ++t) {
      ma += a.at(t, d);
      mb += b.at(t, d);
    }
    ma /= n;
    mb /= n;
    double cov = 0.0, va = 0.0, vb = 0.0;
    for (int t = 0; t < n; ++t) {
      cov += (a.at(t, d) - ma) * (b.at(t, d) - mb);
      va += (a.at(t, d) - ma) * (a.at(t, d) - ma);
      vb += (b.at(t, d) - mb) * (b.at(t, d) - mb);
    }
    if (va == 0.0 || vb == 0.0) continue;
    total += cov / std::sqrt(va * vb);
    ++used;
  }
  return total / used;
}

BruteBlandAltman BruteBlandAltmanDeg(const CoordinateTrajectory& a,
                                     const CoordinateTrajectory& b) {
  std::vector<double> diffs;
  for (int t = 0; t < a.frames(); ++t) {
    for (int d = 0; d < a.nq(); ++d) {
      if (a.dof_kinds()[d] != DofKind::kRevolute) continue;
      diffs.push_back(WrapDeg((b.at(t, d) - a.at(t, d)) * kRadToDeg));
    }
  }
  BruteBlandAltman out;
  for (double x : diffs) out.mean += x;
  out.mean /= diffs.size();
  double ss = 0.0;
  for (double x : diffs) ss += (x - out.mean) * (x - out.mean);
  out.sd = diffs.size() > 1 ? std::sqrt(ss / (diffs.size() - 1)) : 0.0;
  out.low = out.mean - 1.96 * out.sd;
  out.high = out.mean + 1.96 * out.sd;
  return out;
}

std::pair<double, double> BruteSmoothness(const CoordinateTrajectory& q) {
  double v = 0.0, j = 0.0;
  long nv = 0, nj = 0;
  for (int d = 0; d < q.nq(); ++d) {
    if (q.dof_kinds()[d] != DofKind::kRevolute) continue;
    for (int t = 0; t + 1 < q.frames(); ++t) {
      v += std::fabs(q.at(t + 1, d) - q.at(t, d));
      ++nv;
    }
    for (int t = 0; t + 3 < q.frames(); ++t) {
      j += std::fabs(q.at(t + 3, d) - 3 * q.at(t + 2, d) + 3 * q.at(t + 1, d) -
                     q.at(t, d));
      ++nj;
    }
  }
  return {v / nv, j / nj};
}

Pose RandomPose(const KinematicModel& model, std::mt19937_64& rng,
                double angle_range, double translation_range) {
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  Pose q(model.nq());
  for (int d = 0; d < model.nq(); ++d) {
    q[d] = (IsRevolute(model.dofs()[d].type) ? angle_range
                                             : translation_range) *
           unit(rng);
  }
  return q;
}

CoordinateTrajectory RandomTrajectory(const std::vector<DofKind>& kinds,
                                      int frames, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  CoordinateTrajectory q(frames, kinds);
  for (double& v : q.mutable_values()) v = normal(rng);
  return q;
}

DetectionSequence DetectionsFromTrajectory(const KinematicModel& model,
                                           const CoordinateTrajectory& q) {
  DetectionSequence det;
  det.source_tag = "fk";
  det.keypoints = PointSeries(q.frames(), model.num_sites());
  det.confidences.assign(static_cast<size_t>(q.frames()) * model.num_sites(),
                         1.0);
  for (int t = 0; t < q.frames(); ++t) {
    const Eigen::VectorXd p = SitePositions(model, q.RowPose(t));
    std::copy(p.data(), p.data() + p.size(), det.keypoints.frame(t).begin());
  }
  return det;
}

}  // namespace kinepipe::testing
