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

#include "kinepipe/fitting.h"

#include <cmath>
#include <string>

#include <Eigen/Cholesky>

#include "kinepipe/error.h"

namespace kinepipe {
namespace {

// Lambda schedule: grow on rejection, shrink on acceptance.
constexpr double kDampingGrow = 10.0;
constexpr double kDampingShrink = 3.0;
constexpr double kDampingFloor = 1e-3;  // used once a rejection hits lambda=0
constexpr double kDampingCeiling = 1e12;

void CheckFrame(const KinematicModel& model, const FrameDetections& det,
                const Pose& q, const Pose* q_prev) {
  const size_t sites = static_cast<size_t>(model.num_sites());
  if (det.keypoints.size() != 3 * sites || det.confidences.size() != sites) {
    throw DimensionError("frame detections cover " +
                         std::to_string(det.confidences.size()) +
                         " sites, model has " + std::to_string(sites));
  }
  if (q.size() != model.nq() || (q_prev && q_prev->size() != model.nq())) {
    throw DimensionError("pose length does not match nq=" +
                         std::to_string(model.nq()));
  }
}

void CheckFinite(const FrameDetections& det) {
  for (double v : det.keypoints) {
    if (!std::isfinite(v)) throw InputError("non-finite detection coordinate");
  }
  for (double c : det.confidences) {
    if (!std::isfinite(c)) throw InputError("non-finite detection confidence");
  }
}

double SiteWeight(const SolverConfig& config, const FrameDetections& det,
                  int s) {
  return config.KeypointWeight(s) * det.confidences[s];
}

double ObjectiveAt(const Eigen::VectorXd& positions, const Pose& q,
                   const FrameDetections& det, const Pose* q_prev,
                   const SolverConfig& config) {
  double total = 0.0;
  const int sites = static_cast<int>(det.confidences.size());
  for (int s = 0; s < sites; ++s) {
    double sq = 0.0;
    for (int a = 0; a < 3; ++a) {
      const double r = positions[3 * s + a] - det.keypoints[3 * s + a];
      sq += r * r;
    }
    total += SiteWeight(config, det, s) * sq;
  }
  if (q_prev) total += config.temporal_weight * (q - *q_prev).squaredNorm();
  return total;
}

double MeanResidualMm(const Eigen::VectorXd& positions,
                      const FrameDetections& det) {
  const int sites = static_cast<int>(det.confidences.size());
  if (sites == 0) return 0.0;
  double sum = 0.0;
  for (int s = 0; s < sites; ++s) {
    double sq = 0.0;
    for (int a = 0; a < 3; ++a) {
      const double r = positions[3 * s + a] - det.keypoints[3 * s + a];
      sq += r * r;
    }
    sum += std::sqrt(sq);
  }
  return 1000.0 * sum / sites;
}

// Normal equations H = J'WJ + mu*I, g = J'W r + mu (q - q_prev).
void Linearize(const Eigen::VectorXd& positions, const Eigen::MatrixXd& jac,
               const Pose& q, const FrameDetections& det, const Pose* q_prev,
               const SolverConfig& config, Eigen::MatrixXd* hessian,
               Eigen::VectorXd* gradient) {
  const int sites = static_cast<int>(det.confidences.size());
  const Eigen::Index nq = q.size();
  Eigen::VectorXd w(3 * sites);
  Eigen::VectorXd r(3 * sites);
  for (int s = 0; s < sites; ++s) {
    const double ws = SiteWeight(config, det, s);
    for (int a = 0; a < 3; ++a) {
      w[3 * s + a] = ws;
      r[3 * s + a] = positions[3 * s + a] - det.keypoints[3 * s + a];
    }
  }
  const Eigen::MatrixXd wj = w.asDiagonal() * jac;
  hessian->resize(nq, nq);
  hessian->noalias() = jac.transpose() * wj;
  gradient->noalias() = wj.transpose() * r;
  if (q_prev) {
    hessian->diagonal().array() += config.temporal_weight;
    *gradient += config.temporal_weight * (q - *q_prev);
  }
}

}  // namespace

void SolverConfig::Validate(int num_sites) const {
  if (max_iters < 1) throw InputError("max_iters must be >= 1");
  if (!(step_tol >= 0.0) || !std::isfinite(step_tol)) {
    throw InputError("step_tol must be finite and >= 0");
  }
  if (!(damping >= 0.0) || !std::isfinite(damping)) {
    throw InputError("damping must be finite and >= 0");
  }
  if (!(temporal_weight >= 0.0) || !std::isfinite(temporal_weight)) {
    throw InputError("temporal_weight must be finite and >= 0");
  }
  if (!keypoint_weights.empty() &&
      keypoint_weights.size() != static_cast<size_t>(num_sites)) {
    throw DimensionError("keypoint_weights has " +
                         std::to_string(keypoint_weights.size()) +
                         " entries, model has " + std::to_string(num_sites) +
                         " sites");
  }
  for (double w : keypoint_weights) {
    if (!(w >= 0.0) || !std::isfinite(w)) {
      throw InputError("keypoint weights must be finite and >= 0");
    }
  }
}

double FrameObjective(const KinematicModel& model, const Pose& q,
                      const FrameDetections& detections, const Pose* q_prev,
                      const SolverConfig& config) {
  CheckFrame(model, detections, q, q_prev);
  return ObjectiveAt(SitePositions(model, q), q, detections, q_prev, config);
}

Eigen::VectorXd FrameGradient(const KinematicModel& model, const Pose& q,
                              const FrameDetections& detections,
                              const Pose* q_prev, const SolverConfig& config) {
  CheckFrame(model, detections, q, q_prev);
  Eigen::VectorXd positions;
  Eigen::MatrixXd jac;
  SitePositionsAndJacobian(model, q, &positions, &jac);
  Eigen::MatrixXd hessian;
  Eigen::VectorXd gradient;
  Linearize(positions, jac, q, detections, q_prev, config, &hessian, &gradient);
  return 2.0 * gradient;
}

FrameFit FitFrame(const KinematicModel& model,
                  const FrameDetections& detections, const Pose& q_init,
                  const Pose* q_prev, const SolverConfig& config,
                  std::vector<double>* accepted_objectives) {
  CheckFrame(model, detections, q_init, q_prev);
  CheckFinite(detections);
  if (!q_init.allFinite()) throw InputError("q_init is not finite");
  config.Validate(model.num_sites());

  FrameFit out;
  out.q = q_init;
  Eigen::VectorXd positions;
  Eigen::MatrixXd jac;
  SitePositionsAndJacobian(model, out.q, &positions, &jac);
  double objective = ObjectiveAt(positions, out.q, detections, q_prev, config);
  if (accepted_objectives) accepted_objectives->assign(1, objective);

  Eigen::MatrixXd hessian;
  Eigen::VectorXd gradient;
  Linearize(positions, jac, out.q, detections, q_prev, config, &hessian,
            &gradient);

  double lambda = config.damping;
  Eigen::LLT<Eigen::MatrixXd> llt;
  Eigen::MatrixXd damped;
  for (int iter = 1; iter <= config.max_iters; ++iter) {
    out.iterations = iter;
    damped = hessian;
    damped.diagonal().array() += lambda;
    llt.compute(damped);
    if (llt.info() != Eigen::Success) {
      if (lambda == 0.0) {
        throw SolverError("singular normal equations with zero damping");
      }
      lambda = std::min(lambda * kDampingGrow, kDampingCeiling);
      continue;
    }
    const Eigen::VectorXd step = llt.solve(-gradient);
    if (!step.allFinite()) {
      throw SolverError("non-finite Levenberg step");
    }
    if (step.norm() < config.step_tol) break;

    const Pose candidate = out.q + step;
    Eigen::VectorXd cand_positions = SitePositions(model, candidate);
    const double cand_objective =
        ObjectiveAt(cand_positions, candidate, detections, q_prev, config);
    if (cand_objective < objective) {
      out.q = candidate;
      objective = cand_objective;
      if (accepted_objectives) accepted_objectives->push_back(objective);
      lambda /= kDampingShrink;
      SitePositionsAndJacobian(model, out.q, &positions, &jac);
      Linearize(positions, jac, out.q, detections, q_prev, config, &hessian,
                &gradient);
    } else {
      if (lambda >= kDampingCeiling) break;
      lambda = lambda > 0.0 ? lambda * kDampingGrow : kDampingFloor;
    }
  }
  out.objective = objective;
  out.residual_mm = MeanResidualMm(positions, detections);
  return out;
}

Pose InitialPose(const KinematicModel& model,
                 const FrameDetections& detections) {
  Pose q = NeutralPose(model);
  const int sites = model.num_sites();
  if (sites == 0) return q;
  const Eigen::VectorXd rest = SitePositions(model, q);
  Eigen::Vector3d shift = Eigen::Vector3d::Zero();
  for (int s = 0; s < sites; ++s) {
    for (int a = 0; a < 3; ++a) {
      shift[a] += detections.keypoints[3 * s + a] - rest[3 * s + a];
    }
  }
  shift /= sites;
  const auto root = model.root_translation_dofs();
  for (int a = 0; a < 3; ++a) {
    if (root[a] >= 0) q[root[a]] = shift[a];
  }
  return q;
}

FitResult FitSequence(const KinematicModel& model,
                      const DetectionSequence& detections,
                      const SolverConfig& config) {
  const int frames = detections.frames();
  if (frames < 1) throw InputError("cannot fit an empty detection sequence");
  if (detections.sites() != model.num_sites()) {
    throw DimensionError("detections carry " +
                         std::to_string(detections.sites()) +
                         " sites, model has " +
                         std::to_string(model.num_sites()));
  }
  detections.Validate();
  config.Validate(model.num_sites());

  FitResult result;
  result.trajectory = CoordinateTrajectory(frames, model.dof_kinds());
  result.fitted_configurations.reserve(frames);
  result.per_frame_residual_mm.reserve(frames);
  result.iterations_used.reserve(frames);

  Pose previous;
  for (int t = 0; t < frames; ++t) {
    const FrameDetections frame = FrameOf(detections, t);
    FrameFit fit;
    try {
      if (t == 0) {
        fit = FitFrame(model, frame, InitialPose(model, frame), nullptr, config);
      } else {
        fit = FitFrame(model, frame, previous, &previous, config);
      }
    } catch (const SolverError& e) {
      throw SolverError("frame " + std::to_string(t) + ": " + e.what());
    } catch (const InputError& e) {
      throw InputError("frame " + std::to_string(t) + ": " + e.what());
    }
    result.trajectory.SetRow(t, fit.q);
    result.fitted_configurations.push_back(ForwardKinematics(model, fit.q));
    result.per_frame_residual_mm.push_back(fit.residual_mm);
    result.iterations_used.push_back(fit.iterations);
    previous = std::move(fit.q);
  }
  return result;
}

namespace {

PointSeries Collect(const FitResult& result, bool joints) {
  const int frames = static_cast<int>(result.fitted_configurations.size());
  const int points =
      frames == 0 ? 0
                  : static_cast<int>(
                        joints ? result.fitted_configurations[0].joint_positions.size()
                               : result.fitted_configurations[0].site_positions.size());
  PointSeries out(frames, points);
  for (int t = 0; t < frames; ++t) {
    const auto& cfg = result.fitted_configurations[t];
    const auto& src = joints ? cfg.joint_positions : cfg.site_positions;
    auto dst = out.frame(t);
    for (int k = 0; k < points; ++k) {
      for (int a = 0; a < 3; ++a) dst[3 * k + a] = src[k][a];
    }
  }
  return out;
}

}  // namespace

PointSeries FittedJointPositions(const FitResult& result) {
  return Collect(result, true);
}

PointSeries FittedSitePositions(const FitResult& result) {
  return Collect(result, false);
}

}  // namespace kinepipe
