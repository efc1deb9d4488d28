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

#include "kinepipe/metrics.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <sstream>

#include "kinepipe/error.h"
#include "kinepipe/simd/kernels.h"

namespace kinepipe {
namespace {

constexpr double kRadToDeg = 180.0 / std::numbers::pi;

std::string Shape(const CoordinateTrajectory& q) {
  return std::to_string(q.frames()) + "x" + std::to_string(q.nq());
}

std::string Shape(const PointSeries& p) {
  return std::to_string(p.frames) + "x" + std::to_string(p.points) + "x3";
}

void CheckSameShape(const CoordinateTrajectory& a,
                    const CoordinateTrajectory& b) {
  if (a.frames() != b.frames() || a.nq() != b.nq()) {
    throw DimensionError("trajectory shape mismatch: " + Shape(a) + " vs " +
                         Shape(b));
  }
  if (a.dof_kinds() != b.dof_kinds()) {
    throw DimensionError("trajectories disagree on DOF kinds");
  }
}

void CheckSameShape(const PointSeries& a, const PointSeries& b) {
  if (a.frames != b.frames || a.points != b.points) {
    throw DimensionError("position shape mismatch: " + Shape(a) + " vs " +
                         Shape(b));
  }
}

std::vector<double> RevoluteMask(const CoordinateTrajectory& q) {
  std::vector<double> mask(q.nq());
  for (int d = 0; d < q.nq(); ++d) {
    mask[d] = q.dof_kinds()[d] == DofKind::kRevolute ? 1.0 : 0.0;
  }
  return mask;
}

long long RevoluteCount(const CoordinateTrajectory& q) {
  return static_cast<long long>(std::count(q.dof_kinds().begin(),
                                           q.dof_kinds().end(),
                                           DofKind::kRevolute));
}

// Running sums for the pooled angle statistics.
struct AngleSums {
  double abs_sum = 0.0;
  double sum = 0.0;
  long long n = 0;
};

AngleSums AngleDiffSums(const CoordinateTrajectory& a,
                        const CoordinateTrajectory& b) {
  CheckSameShape(a, b);
  const auto mask = RevoluteMask(a);
  AngleSums s;
  simd::ActiveKernels().wrapped_diff_sums(a.values().data(), b.values().data(),
                                          a.frames(), a.nq(), mask.data(),
                                          &s.abs_sum, &s.sum);
  s.n = RevoluteCount(a) * a.frames();
  return s;
}

double AngleSqDev(const CoordinateTrajectory& a, const CoordinateTrajectory& b,
                  double mean_rad) {
  const auto mask = RevoluteMask(a);
  return simd::ActiveKernels().wrapped_diff_sq_dev(
      a.values().data(), b.values().data(), a.frames(), a.nq(), mask.data(),
      mean_rad);
}

BlandAltman FinishBlandAltman(double mean_rad, double sq_dev, long long n) {
  BlandAltman ba;
  ba.samples = n;
  if (n == 0) return ba;
  ba.mean_diff_deg = mean_rad * kRadToDeg;
  ba.sd_diff_deg = n > 1 ? std::sqrt(sq_dev / static_cast<double>(n - 1)) *
                               kRadToDeg
                         : 0.0;
  ba.loa_low_deg = ba.mean_diff_deg - 1.96 * ba.sd_diff_deg;
  ba.loa_high_deg = ba.mean_diff_deg + 1.96 * ba.sd_diff_deg;
  return ba;
}

struct DistanceSums {
  double sum = 0.0;
  long long n = 0;
};

DistanceSums PointDistanceSums(const PointSeries& a, const PointSeries& b) {
  CheckSameShape(a, b);
  DistanceSums s;
  s.n = static_cast<long long>(a.frames) * a.points;
  s.sum = simd::ActiveKernels().point_distance_sum(a.xyz.data(), b.xyz.data(),
                                                   static_cast<size_t>(s.n));
  return s;
}

struct PearsonSums {
  double r_sum = 0.0;
  int used = 0;
  int excluded = 0;
};

PearsonSums PearsonPerDof(const CoordinateTrajectory& a,
                          const CoordinateTrajectory& b) {
  CheckSameShape(a, b);
  const int rows = a.frames();
  const int cols = a.nq();
  const auto& k = simd::ActiveKernels();
  std::vector<double> mean_a(cols), mean_b(cols), saa(cols), sbb(cols),
      sab(cols);
  k.column_sums(a.values().data(), rows, cols, mean_a.data());
  k.column_sums(b.values().data(), rows, cols, mean_b.data());
  for (int c = 0; c < cols; ++c) {
    mean_a[c] /= rows;
    mean_b[c] /= rows;
  }
  k.centered_moments(a.values().data(), b.values().data(), rows, cols,
                     mean_a.data(), mean_b.data(), saa.data(), sbb.data(),
                     sab.data());
  PearsonSums s;
  for (int c = 0; c < cols; ++c) {
    // A column that is constant up to rounding has no defined correlation.
    auto negligible = [rows](double ss, double mean) {
      const double scale = 1e-12 * std::max(1.0, std::fabs(mean));
      return ss <= rows * scale * scale;
    };
    if (negligible(saa[c], mean_a[c]) || negligible(sbb[c], mean_b[c])) {
      ++s.excluded;
      continue;
    }
    const double r = sab[c] / std::sqrt(saa[c] * sbb[c]);
    s.r_sum += std::clamp(r, -1.0, 1.0);
    ++s.used;
  }
  return s;
}

PearsonResult FinishPearson(const PearsonSums& s) {
  if (s.used == 0) {
    throw InputError("correlation undefined: all " +
                     std::to_string(s.excluded) + " DOFs have zero variance");
  }
  return {s.r_sum / s.used, s.used, s.excluded};
}

double PercentChange(double value, double reference) {
  if (reference == 0.0) return value == 0.0 ? 0.0 : INFINITY;
  return 100.0 * (value - reference) / reference;
}

std::string Fixed(double v, int precision) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", precision, v);
  return buf;
}

}  // namespace

double MadDegrees(const CoordinateTrajectory& a,
                  const CoordinateTrajectory& b) {
  const AngleSums s = AngleDiffSums(a, b);
  return s.n == 0 ? 0.0 : s.abs_sum / static_cast<double>(s.n) * kRadToDeg;
}

PearsonResult PearsonR(const CoordinateTrajectory& a,
                       const CoordinateTrajectory& b) {
  return FinishPearson(PearsonPerDof(a, b));
}

double MpjpeMm(const PointSeries& a, const PointSeries& b) {
  const DistanceSums s = PointDistanceSums(a, b);
  return s.n == 0 ? 0.0 : 1000.0 * s.sum / static_cast<double>(s.n);
}

BlandAltman BlandAltmanDegrees(const CoordinateTrajectory& a,
                               const CoordinateTrajectory& b) {
  const AngleSums s = AngleDiffSums(a, b);
  if (s.n == 0) return {};
  const double mean = s.sum / static_cast<double>(s.n);
  return FinishBlandAltman(mean, AngleSqDev(a, b, mean), s.n);
}

SmoothnessReport Smoothness(const CoordinateTrajectory& q) {
  if (q.frames() < 4) {
    throw InputError("smoothness needs at least 4 frames, got " +
                     std::to_string(q.frames()));
  }
  const long long revolute = RevoluteCount(q);
  if (revolute == 0) throw InputError("smoothness needs a revolute DOF");
  const auto mask = RevoluteMask(q);
  const auto& k = simd::ActiveKernels();
  SmoothnessReport r;
  r.mean_abs_qdot = k.diff_abs_sum(q.values().data(), q.frames(), q.nq(),
                                   mask.data(), 1) /
                    static_cast<double>(revolute * (q.frames() - 1));
  r.mean_abs_qdddot = k.diff_abs_sum(q.values().data(), q.frames(), q.nq(),
                                     mask.data(), 3) /
                      static_cast<double>(revolute * (q.frames() - 3));
  return r;
}

SmoothnessReport Smoothness(const CoordinateTrajectory& q,
                            const CoordinateTrajectory& reference) {
  SmoothnessReport r = Smoothness(q);
  const SmoothnessReport ref = Smoothness(reference);
  r.qdot_percent_change = PercentChange(r.mean_abs_qdot, ref.mean_abs_qdot);
  r.qdddot_percent_change =
      PercentChange(r.mean_abs_qdddot, ref.mean_abs_qdddot);
  return r;
}

double StageConvergence::AbsorptionFactor() const {
  if (fitted_sites_mpjpe_mm == 0.0) {
    return detection_mpjpe_mm == 0.0 ? 1.0 : INFINITY;
  }
  return detection_mpjpe_mm / fitted_sites_mpjpe_mm;
}

StageConvergence ComputeStageConvergence(const DetectionSequence& det_a,
                                         const DetectionSequence& det_b,
                                         const FitResult& fit_a,
                                         const FitResult& fit_b) {
  if (det_a.frames() != fit_a.frames() || det_b.frames() != fit_b.frames()) {
    throw DimensionError("detections and fits cover different frame counts");
  }
  StageConvergence c;
  c.detection_mpjpe_mm = MpjpeMm(det_a.keypoints, det_b.keypoints);
  c.fitted_sites_mpjpe_mm =
      MpjpeMm(FittedSitePositions(fit_a), FittedSitePositions(fit_b));
  c.fitted_joints_mpjpe_mm =
      MpjpeMm(FittedJointPositions(fit_a), FittedJointPositions(fit_b));
  c.mad_deg = MadDegrees(fit_a.trajectory, fit_b.trajectory);
  return c;
}

ConsistencyReport CompareSequences(
    const std::vector<SequenceComparison>& sequences) {
  if (sequences.empty()) throw InputError("no sequences to compare");
  ConsistencyReport report;
  AngleSums angles;
  DistanceSums joints, sites;
  PearsonSums pearson;
  for (const auto& s : sequences) {
    if (!s.trajectory_a || !s.trajectory_b || !s.joints_a || !s.joints_b ||
        !s.sites_a || !s.sites_b) {
      throw InputError("sequence '" + s.name + "' is missing an input");
    }
    ConsistencyRow row;
    row.name = s.name;
    const AngleSums a = AngleDiffSums(*s.trajectory_a, *s.trajectory_b);
    row.mad_deg = a.n == 0 ? 0.0 : a.abs_sum / a.n * kRadToDeg;
    const PearsonSums p = PearsonPerDof(*s.trajectory_a, *s.trajectory_b);
    row.pearson = FinishPearson(p);
    const DistanceSums j = PointDistanceSums(*s.joints_a, *s.joints_b);
    const DistanceSums st = PointDistanceSums(*s.sites_a, *s.sites_b);
    row.mpjpe_joints_mm = j.n == 0 ? 0.0 : 1000.0 * j.sum / j.n;
    row.mpjpe_sites_mm = st.n == 0 ? 0.0 : 1000.0 * st.sum / st.n;
    row.bland_altman = BlandAltmanDegrees(*s.trajectory_a, *s.trajectory_b);
    report.per_sequence.push_back(row);

    angles.abs_sum += a.abs_sum;
    angles.sum += a.sum;
    angles.n += a.n;
    joints.sum += j.sum;
    joints.n += j.n;
    sites.sum += st.sum;
    sites.n += st.n;
    pearson.r_sum += p.r_sum;
    pearson.used += p.used;
    pearson.excluded += p.excluded;
  }

  ConsistencyRow& pooled = report.pooled;
  pooled.name = "Mean";
  pooled.mad_deg = angles.n == 0 ? 0.0 : angles.abs_sum / angles.n * kRadToDeg;
  pooled.pearson = FinishPearson(pearson);
  pooled.mpjpe_joints_mm = joints.n == 0 ? 0.0 : 1000.0 * joints.sum / joints.n;
  pooled.mpjpe_sites_mm = sites.n == 0 ? 0.0 : 1000.0 * sites.sum / sites.n;
  if (angles.n > 0) {
    const double mean = angles.sum / angles.n;
    double sq_dev = 0.0;
    for (const auto& s : sequences) {
      sq_dev += AngleSqDev(*s.trajectory_a, *s.trajectory_b, mean);
    }
    pooled.bland_altman = FinishBlandAltman(mean, sq_dev, angles.n);
  }
  return report;
}

std::string FormatConsistencyTable(const ConsistencyReport& report) {
  std::ostringstream out;
  char line[256];
  std::snprintf(line, sizeof(line), "%-16s %10s %8s %12s %12s %10s %21s\n",
                "Sequence", "MAD(deg)", "r", "Joints(mm)", "Sites(mm)",
                "BA mean", "BA 95% LoA");
  out << line;
  auto row = [&](const ConsistencyRow& r) {
    const std::string loa = "[" + Fixed(r.bland_altman.loa_low_deg, 4) + ", " +
                            Fixed(r.bland_altman.loa_high_deg, 4) + "]";
    std::snprintf(line, sizeof(line),
                  "%-16s %10.4f %8.4f %12.3f %12.3f %10.4f %21s\n",
                  r.name.c_str(), r.mad_deg, r.pearson.r, r.mpjpe_joints_mm,
                  r.mpjpe_sites_mm, r.bland_altman.mean_diff_deg, loa.c_str());
    out << line;
  };
  for (const auto& r : report.per_sequence) row(r);
  row(report.pooled);
  return out.str();
}

std::string ConsistencyKeyValues(const ConsistencyReport& report) {
  std::ostringstream out;
  out.precision(17);
  auto emit = [&out](const std::string& prefix, const ConsistencyRow& r) {
    out << prefix << "mad_deg=" << r.mad_deg << "\n"
        << prefix << "pearson_r=" << r.pearson.r << "\n"
        << prefix << "pearson_dofs_used=" << r.pearson.dofs_used << "\n"
        << prefix << "pearson_dofs_excluded=" << r.pearson.dofs_excluded << "\n"
        << prefix << "mpjpe_joints_mm=" << r.mpjpe_joints_mm << "\n"
        << prefix << "mpjpe_sites_mm=" << r.mpjpe_sites_mm << "\n"
        << prefix << "bland_altman.mean_diff_deg="
        << r.bland_altman.mean_diff_deg << "\n"
        << prefix << "bland_altman.sd_diff_deg=" << r.bland_altman.sd_diff_deg
        << "\n"
        << prefix << "bland_altman.loa_low_deg=" << r.bland_altman.loa_low_deg
        << "\n"
        << prefix << "bland_altman.loa_high_deg="
        << r.bland_altman.loa_high_deg << "\n";
  };
  emit("pooled.", report.pooled);
  out << "sequences=" << report.per_sequence.size() << "\n";
  for (size_t i = 0; i < report.per_sequence.size(); ++i) {
    const auto& r = report.per_sequence[i];
    out << "sequence." << i << ".name=" << r.name << "\n";
    emit("sequence." + std::to_string(i) + ".", r);
  }
  return out.str();
}

std::string FormatSmoothnessTable(const SmoothnessReport& report,
                                  const std::string& label) {
  char line[256];
  std::string out;
  std::snprintf(line, sizeof(line), "%-16s %16s %18s\n", "Trajectory",
                "|qdot| (rad/f)", "|qdddot| (rad/f^3)");
  out += line;
  std::snprintf(line, sizeof(line), "%-16s %16.6g %18.6g\n", label.c_str(),
                report.mean_abs_qdot, report.mean_abs_qdddot);
  out += line;
  if (report.qdot_percent_change && report.qdddot_percent_change) {
    const std::string a = Fixed(*report.qdot_percent_change, 1) + "%";
    const std::string b = Fixed(*report.qdddot_percent_change, 1) + "%";
    std::snprintf(line, sizeof(line), "%-16s %16s %18s\n", "Change", a.c_str(),
                  b.c_str());
    out += line;
  }
  return out;
}

std::string SmoothnessKeyValues(const SmoothnessReport& report) {
  std::ostringstream out;
  out.precision(17);
  out << "mean_abs_qdot_rad_per_frame=" << report.mean_abs_qdot << "\n"
      << "mean_abs_qdddot_rad_per_frame3=" << report.mean_abs_qdddot << "\n";
  if (report.qdot_percent_change) {
    out << "qdot_percent_change=" << *report.qdot_percent_change << "\n";
  }
  if (report.qdddot_percent_change) {
    out << "qdddot_percent_change=" << *report.qdddot_percent_change << "\n";
  }
  return out.str();
}

}  // namespace kinepipe
