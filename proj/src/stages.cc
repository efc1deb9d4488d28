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

#include "kinepipe/stages.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <string>
#include <thread>
#include <utility>

#include "kinepipe/error.h"

namespace kinepipe {
namespace {

void SleepMs(int ms) {
  if (ms > 0) std::this_thread::sleep_for(std::chrono::milliseconds(ms));
}

std::uint64_t SplitMix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// FNV-1a; stable across platforms, unlike std::hash.
std::uint64_t HashTag(const std::string& tag) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : tag) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t StreamSeed(std::uint64_t seed, const std::string& tag,
                         std::uint64_t frame_key) {
  return SplitMix64(SplitMix64(seed ^ HashTag(tag)) + frame_key);
}

// Per-DOF motion profile, relative to the gait amplitude.
struct DofProfile {
  double gain = 0.0;      // sinusoid amplitude / gait amplitude
  double bias = 0.0;      // constant offset / gait amplitude
  double phase = 0.0;     // radians, relative to the stride phase
  double harmonic = 0.0;  // second-harmonic amplitude / gain
  bool translational = false;
};

DofProfile ProfileFor(const std::string& segment, JointType type) {
  constexpr double kPi = std::numbers::pi;
  const int axis = JointAxis(type);
  const bool left = segment.rfind("l_", 0) == 0;
  const double side = left ? kPi : 0.0;
  const auto base = [&](std::string_view s) {
    return segment.size() > 2 && segment.substr(2) == s;
  };
  DofProfile p;
  if (segment == "pelvis") {
    if (!IsRevolute(type)) {
      p.translational = true;
      // Treadmill-style: the root oscillates in place.
      static constexpr double kGain[3] = {0.10, 0.04, 0.04};
      static constexpr double kPhase[3] = {0.0, kPi / 2, 0.0};
      p.gain = kGain[axis];
      p.phase = kPhase[axis];
      p.harmonic = axis == 2 ? 1.0 : 0.0;
      return p;
    }
    static constexpr double kGain[3] = {0.16, 0.12, 0.16};
    p.gain = kGain[axis];
    p.harmonic = 0.2;
    return p;
  }
  if (segment == "lumbar" || segment == "lower_thorax" ||
      segment == "upper_thorax" || segment == "neck" || segment == "head") {
    static constexpr double kGain[3] = {0.12, 0.10, 0.20};
    const double scale = segment == "lumbar"         ? 1.0
                         : segment == "lower_thorax" ? 0.8
                         : segment == "upper_thorax" ? 0.6
                                                     : 0.4;
    p.gain = kGain[axis] * scale;
    p.phase = axis == 2 ? kPi : 0.0;
    p.harmonic = 0.2;
    return p;
  }
  if (base("thigh")) {
    static constexpr double kGain[3] = {0.20, 1.0, 0.20};
    static constexpr double kBias[3] = {0.0, -0.2, 0.0};
    p.gain = kGain[axis];
    p.bias = kBias[axis];
    p.phase = side;
    p.harmonic = 0.15;
    return p;
  }
  if (base("shank")) {
    p.gain = 0.9;
    p.bias = 1.0;
    p.phase = side + kPi / 2;
    p.harmonic = 0.15;
    return p;
  }
  if (base("foot")) {
    p.gain = axis == 1 ? 0.4 : 0.1;
    p.phase = side - kPi / 2;
    p.harmonic = 0.1;
    return p;
  }
  if (base("upperarm")) {
    static constexpr double kGain[3] = {0.1, 0.7, 0.15};
    static constexpr double kBias[3] = {0.2, 0.0, 0.0};
    p.gain = kGain[axis];
    p.bias = kBias[axis] * (left ? -1.0 : 1.0);  // abduct away from the body
    p.phase = side + kPi;                        // arms swing against legs
    p.harmonic = 0.1;
    return p;
  }
  if (base("forearm")) {
    p.gain = 0.4;
    p.bias = -1.2;
    p.phase = side + kPi;
    p.harmonic = 0.1;
    return p;
  }
  return p;
}

}  // namespace

void GaitParameters::Validate() const {
  if (!(amplitude >= 0.0) || !std::isfinite(amplitude)) {
    throw InputError("gait amplitude must be finite and >= 0");
  }
  if (!(frequency >= 0.0) || !std::isfinite(frequency)) {
    throw InputError("gait frequency must be finite and >= 0");
  }
}

SyntheticSequence GenerateSyntheticSequence(const KinematicModel& model,
                                            std::uint64_t seed, int frames,
                                            const GaitParameters& gait) {
  if (frames < 1) throw InputError("synthetic sequence needs frames >= 1");
  gait.Validate();

  constexpr double kTwoPi = 2.0 * std::numbers::pi;
  // Profiles are tuned for this reference amplitude; translations scale
  // linearly with amplitude / kReferenceAmplitude.
  constexpr double kReferenceAmplitude = 0.5;

  std::mt19937_64 rng(SplitMix64(seed));
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  const double start_phase = kTwoPi * 0.5 * (unit(rng) + 1.0);

  struct Term {
    DofProfile profile;
    double gain_jitter;
    double phase_jitter;
    double harmonic_phase;
  };
  std::vector<Term> terms;
  terms.reserve(model.nq());
  for (const Dof& dof : model.dofs()) {
    Term term;
    term.profile = ProfileFor(model.segments()[dof.segment].name, dof.type);
    term.gain_jitter = 1.0 + 0.1 * unit(rng);
    term.phase_jitter = 0.2 * unit(rng);
    term.harmonic_phase = kTwoPi * 0.5 * (unit(rng) + 1.0);
    terms.push_back(term);
  }

  SyntheticSequence seq;
  seq.seed = seed;
  seq.gait = gait;
  seq.ground_truth = CoordinateTrajectory(frames, model.dof_kinds());
  const double scale = gait.amplitude;
  for (int t = 0; t < frames; ++t) {
    const double phase = kTwoPi * gait.frequency * t + start_phase;
    for (int d = 0; d < model.nq(); ++d) {
      const Term& term = terms[d];
      const DofProfile& p = term.profile;
      const double s = std::sin(phase + p.phase + term.phase_jitter) +
                       p.harmonic * std::sin(2.0 * (phase + p.phase) +
                                             term.harmonic_phase);
      const double amp = p.translational ? scale / kReferenceAmplitude : scale;
      seq.ground_truth.at(t, d) = amp * (p.bias + p.gain * term.gain_jitter * s);
    }
  }

  seq.frames.reserve(frames);
  for (int t = 0; t < frames; ++t) {
    FrameHandle frame;
    frame.index = t;
    frame.sequence_seed = seed;
    const Eigen::VectorXd sites =
        SitePositions(model, seq.ground_truth.RowPose(t));
    frame.subject_sites.emplace(sites.data(), sites.data() + sites.size());
    seq.frames.push_back(std::move(frame));
  }
  return seq;
}

NoiseModel NoiseModel::Default() { return NoiseModel{}; }

NoiseModel NoiseModel::Noiseless() {
  NoiseModel n;
  n.sigma = 0.0;
  return n;
}

NoiseModel NoiseModel::Divergent() {
  NoiseModel n;
  n.sigma = 0.15;
  n.rigid_offset_sigma = 0.01;
  return n;
}

double NoiseModel::ReportedConfidence() const {
  if (sigma == 0.0) return 1.0;
  const double x = confidence_radius / sigma;
  const double cdf = std::erf(x / std::numbers::sqrt2) -
                     std::sqrt(2.0 / std::numbers::pi) * x * std::exp(-0.5 * x * x);
  return std::clamp(cdf, 0.0, 1.0);
}

void NoiseModel::Validate() const {
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) {
    throw InputError("noise sigma must be finite and >= 0");
  }
  if (!(rigid_offset_sigma >= 0.0) || !std::isfinite(rigid_offset_sigma)) {
    throw InputError("rigid offset sigma must be finite and >= 0");
  }
  if (!(confidence_radius > 0.0) || !std::isfinite(confidence_radius)) {
    throw InputError("confidence radius must be finite and > 0");
  }
}

void StageInitProfile::Validate() const {
  if (simulated_fetch_ms < 0) throw InputError("simulated_fetch_ms must be >= 0");
  if (per_frame_inference_ms < 0) {
    throw InputError("per_frame_inference_ms must be >= 0");
  }
}

Eigen::Vector2d Project(const Camera& camera, const Eigen::Vector3d& point) {
  const double depth = point.y() - camera.position.y();
  if (depth <= 1e-6) throw InputError("point behind the camera");
  const double u = 0.5 * camera.width +
                   camera.focal_px * (point.x() - camera.position.x()) / depth;
  const double v = 0.5 * camera.height -
                   camera.focal_px * (point.z() - camera.position.z()) / depth;
  return {u, v};
}

std::vector<BoundingBox> Detector::Detect(const FrameHandle& frame) const {
  SleepMs(per_frame_inference_ms_);
  if (!frame.subject_sites || frame.subject_sites->empty()) return {};
  const auto& sites = *frame.subject_sites;
  double min_u = std::numeric_limits<double>::infinity();
  double min_v = min_u;
  double max_u = -min_u;
  double max_v = -min_u;
  for (size_t s = 0; s + 2 < sites.size(); s += 3) {
    const Eigen::Vector2d px =
        Project(frame.camera, {sites[s], sites[s + 1], sites[s + 2]});
    min_u = std::min(min_u, px.x());
    max_u = std::max(max_u, px.x());
    min_v = std::min(min_v, px.y());
    max_v = std::max(max_v, px.y());
  }
  // Degenerate extents (a single point) still get a positive size.
  const double w = std::max(max_u - min_u, 1.0);
  const double h = std::max(max_v - min_v, 1.0);
  BoundingBox box;
  box.frame_index = frame.index;
  box.x = min_u - 0.05 * w;
  box.y = min_v - 0.05 * h;
  box.w = 1.1 * w;
  box.h = 1.1 * h;
  box.score = 1.0;
  return {box};
}

FrameEstimate PoseEstimator::Estimate(const FrameHandle& frame,
                                      const BoundingBox& bbox) const {
  if (!frame.subject_sites) throw InputError("frame has no subject to estimate");
  if (bbox.frame_index != frame.index) {
    throw InputError("bounding box belongs to frame " +
                     std::to_string(bbox.frame_index) + ", not " +
                     std::to_string(frame.index));
  }
  if (!(bbox.w > 0.0 && bbox.h > 0.0) || bbox.x + bbox.w <= 0.0 ||
      bbox.y + bbox.h <= 0.0 || bbox.x >= frame.camera.width ||
      bbox.y >= frame.camera.height) {
    throw InputError("bounding box outside frame " + std::to_string(frame.index));
  }
  SleepMs(per_frame_inference_ms_);

  const auto& truth = *frame.subject_sites;
  FrameEstimate out;
  out.keypoints = truth;
  out.confidences.assign(truth.size() / 3, noise_.ReportedConfidence());

  Eigen::Vector3d offset = Eigen::Vector3d::Zero();
  if (noise_.rigid_offset_sigma > 0.0) {
    std::mt19937_64 rng(StreamSeed(frame.sequence_seed, source_tag_, ~0ULL));
    std::normal_distribution<double> normal(0.0, noise_.rigid_offset_sigma);
    for (int a = 0; a < 3; ++a) offset[a] = normal(rng);
  }
  if (noise_.sigma > 0.0 || noise_.rigid_offset_sigma > 0.0) {
    std::mt19937_64 rng(
        StreamSeed(frame.sequence_seed, source_tag_,
                   static_cast<std::uint64_t>(frame.index)));
    std::normal_distribution<double> normal(0.0, 1.0);
    for (size_t i = 0; i < out.keypoints.size(); ++i) {
      const double n = noise_.sigma > 0.0 ? noise_.sigma * normal(rng) : 0.0;
      out.keypoints[i] += n + offset[i % 3];
    }
  }
  return out;
}

StageSet InitStages(const StageInitProfile& profile,
                    const EstimatorSettings& estimator, FetchLog* fetch_log) {
  profile.Validate();
  estimator.noise.Validate();
  if (profile.mode == InitMode::kMonolithic) {
    // Remote graph fetch + compile of the single end-to-end model.
    SleepMs(profile.simulated_fetch_ms);
    if (fetch_log) fetch_log->Record();
  }
  StageSet set;
  set.mode = profile.mode;
  set.detector = std::make_shared<const Detector>(profile.per_frame_inference_ms);
  set.estimator = std::make_shared<const PoseEstimator>(
      profile.per_frame_inference_ms, estimator.noise, estimator.source_tag);
  return set;
}

DetectionSequence RunStages(const StageSet& stages,
                            const std::vector<FrameHandle>& frames, int begin,
                            int end) {
  if (begin < 0 || end > static_cast<int>(frames.size()) || begin >= end) {
    throw InputError("invalid frame range [" + std::to_string(begin) + ", " +
                     std::to_string(end) + ")");
  }
  const int count = end - begin;
  DetectionSequence out;
  out.source_tag = stages.estimator->source_tag();
  int sites = -1;
  for (int t = begin; t < end; ++t) {
    const FrameHandle& frame = frames[t];
    auto boxes = stages.detector->Detect(frame);
    if (boxes.empty()) {
      throw InputError("no subject detected in frame " + std::to_string(frame.index));
    }
    FrameEstimate est = stages.estimator->Estimate(frame, boxes.front());
    if (sites < 0) {
      sites = static_cast<int>(est.confidences.size());
      out.keypoints = PointSeries(count, sites);
      out.confidences.reserve(static_cast<size_t>(count) * sites);
    }
    std::copy(est.keypoints.begin(), est.keypoints.end(),
              out.keypoints.frame(t - begin).begin());
    out.confidences.insert(out.confidences.end(), est.confidences.begin(),
                           est.confidences.end());
    out.bboxes.push_back(boxes.front());
  }
  return out;
}

}  // namespace kinepipe
