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

#include "kinepipe/kinematics.h"

#include <charconv>
#include <cmath>
#include <sstream>
#include <string>
#include <unordered_map>
#include <utility>

#include <Eigen/Geometry>

#include "kinepipe/error.h"

namespace kinepipe {
namespace {

struct Frame {
  Eigen::Matrix3d rotation;
  Eigen::Vector3d position;
};

// Rotation about a coordinate axis by `angle` radians.
Eigen::Matrix3d AxisRotation(int axis, double angle) {
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  Eigen::Matrix3d r;
  switch (axis) {
    case 0:
      r << 1, 0, 0, 0, c, -s, 0, s, c;
      break;
    case 1:
      r << c, 0, s, 0, 1, 0, -s, 0, c;
      break;
    default:
      r << c, -s, 0, s, c, 0, 0, 0, 1;
      break;
  }
  return r;
}

// Walks the chain root-to-leaf. `dof_frames`, when given, receives the world
// frame in which each coordinate acts (before its own transform is applied).
void ComputeFrames(const KinematicModel& model, const Pose& pose,
                   std::vector<Frame>* segment_frames,
                   std::vector<Frame>* dof_frames) {
  if (pose.size() != model.nq()) {
    throw DimensionError("pose has " + std::to_string(pose.size()) +
                         " coordinates, model expects " +
                         std::to_string(model.nq()));
  }
  const auto& segments = model.segments();
  const auto& dofs = model.dofs();
  segment_frames->resize(segments.size());
  if (dof_frames) dof_frames->resize(dofs.size());

  for (size_t i = 0; i < segments.size(); ++i) {
    const Segment& seg = segments[i];
    Frame frame;
    if (seg.parent < 0) {
      frame.rotation.setIdentity();
      frame.position = seg.offset;
    } else {
      const Frame& parent = (*segment_frames)[seg.parent];
      frame.rotation = parent.rotation;
      frame.position = parent.position + parent.rotation * seg.offset;
    }
    for (int k : seg.dofs) {
      if (dof_frames) (*dof_frames)[k] = frame;
      const JointType type = dofs[k].type;
      const int axis = JointAxis(type);
      if (IsRevolute(type)) {
        frame.rotation = frame.rotation * AxisRotation(axis, pose[k]);
      } else {
        frame.position += frame.rotation.col(axis) * pose[k];
      }
    }
    (*segment_frames)[i] = frame;
  }
}

Eigen::Vector3d SiteWorld(const std::vector<Frame>& frames, const Site& site) {
  const Frame& f = frames[site.segment];
  return f.position + f.rotation * site.offset;
}

void FillJacobianBlock(const KinematicModel& model,
                       const std::vector<Frame>& dof_frames, int site_index,
                       const Eigen::Vector3d& point,
                       Eigen::Ref<Eigen::MatrixXd> block) {
  const int segment = model.sites()[site_index].segment;
  block.setZero();
  for (int k = 0; k < model.nq(); ++k) {
    if (!model.DofAffectsSegment(k, segment)) continue;
    const Frame& f = dof_frames[k];
    const JointType type = model.dofs()[k].type;
    const Eigen::Vector3d axis = f.rotation.col(JointAxis(type));
    if (IsRevolute(type)) {
      block.col(k) = axis.cross(point - f.position);
    } else {
      block.col(k) = axis;
    }
  }
}

bool ParseJointType(std::string_view text, JointType* type) {
  static const std::pair<std::string_view, JointType> kNames[] = {
      {"revolute-x", JointType::kRevoluteX},
      {"revolute-y", JointType::kRevoluteY},
      {"revolute-z", JointType::kRevoluteZ},
      {"translational-x", JointType::kTranslationalX},
      {"translational-y", JointType::kTranslationalY},
      {"translational-z", JointType::kTranslationalZ},
  };
  for (const auto& [name, value] : kNames) {
    if (name == text) {
      *type = value;
      return true;
    }
  }
  return false;
}

Eigen::Vector3d ParseVector(std::string_view text, int line) {
  Eigen::Vector3d v;
  size_t start = 0;
  for (int i = 0; i < 3; ++i) {
    size_t end = text.find(',', start);
    if ((i < 2) != (end != std::string_view::npos)) {
      throw ParseError("expected three comma-separated numbers, got '" +
                           std::string(text) + "'",
                       line);
    }
    std::string_view item = text.substr(start, end - start);
    const char* first = item.data();
    const char* last = item.data() + item.size();
    auto [ptr, ec] = std::from_chars(first, last, v[i]);
    if (ec != std::errc() || ptr != last || !std::isfinite(v[i])) {
      throw ParseError("bad number '" + std::string(item) + "'", line);
    }
    start = end + 1;
  }
  return v;
}

std::string_view KeyValue(std::string_view token, std::string_view key,
                          int line) {
  if (token.size() <= key.size() + 1 || token.substr(0, key.size()) != key ||
      token[key.size()] != '=') {
    throw ParseError("expected " + std::string(key) + "=..., got '" +
                         std::string(token) + "'",
                     line);
  }
  return token.substr(key.size() + 1);
}

}  // namespace

int JointAxis(JointType type) {
  switch (type) {
    case JointType::kRevoluteX:
    case JointType::kTranslationalX:
      return 0;
    case JointType::kRevoluteY:
    case JointType::kTranslationalY:
      return 1;
    default:
      return 2;
  }
}

std::string_view JointTypeName(JointType type) {
  switch (type) {
    case JointType::kRevoluteX:
      return "revolute-x";
    case JointType::kRevoluteY:
      return "revolute-y";
    case JointType::kRevoluteZ:
      return "revolute-z";
    case JointType::kTranslationalX:
      return "translational-x";
    case JointType::kTranslationalY:
      return "translational-y";
    case JointType::kTranslationalZ:
      return "translational-z";
  }
  return "unknown";
}

KinematicModel::KinematicModel(std::vector<Segment> segments,
                               std::vector<Dof> dofs, std::vector<Site> sites)
    : segments_(std::move(segments)),
      dofs_(std::move(dofs)),
      sites_(std::move(sites)) {
  const int n = num_segments();
  for (int i = 0; i < n; ++i) {
    const int parent = segments_[i].parent;
    if (parent == i) {
      throw InputError("segment '" + segments_[i].name + "' is its own parent");
    }
    if (parent >= i) {
      throw InputError("segment '" + segments_[i].name +
                       "' references a later parent (segments must be "
                       "topologically ordered)");
    }
    segments_[i].dofs.clear();
  }
  for (int k = 0; k < nq(); ++k) {
    const int seg = dofs_[k].segment;
    if (seg < 0 || seg >= n) {
      throw InputError("dof " + std::to_string(k) +
                       " references a missing segment");
    }
    for (int other : segments_[seg].dofs) {
      if (dofs_[other].type == dofs_[k].type) {
        throw InputError("duplicate " +
                         std::string(JointTypeName(dofs_[k].type)) +
                         " dof on segment '" + segments_[seg].name + "'");
      }
    }
    segments_[seg].dofs.push_back(k);
  }
  for (const Site& site : sites_) {
    if (site.segment < 0 || site.segment >= n) {
      throw InputError("site '" + site.name + "' references a missing segment");
    }
  }
  affects_.assign(static_cast<size_t>(nq()) * n, false);
  for (int s = 0; s < n; ++s) {
    for (int a = s; a >= 0; a = segments_[a].parent) {
      for (int k : segments_[a].dofs) affects_[static_cast<size_t>(k) * n + s] = true;
    }
  }
}

std::vector<DofKind> KinematicModel::dof_kinds() const {
  std::vector<DofKind> kinds;
  kinds.reserve(dofs_.size());
  for (const Dof& d : dofs_) {
    kinds.push_back(IsRevolute(d.type) ? DofKind::kRevolute
                                       : DofKind::kTranslational);
  }
  return kinds;
}

int KinematicModel::SegmentIndex(std::string_view name) const {
  for (int i = 0; i < num_segments(); ++i) {
    if (segments_[i].name == name) return i;
  }
  return -1;
}

int KinematicModel::SiteIndex(std::string_view name) const {
  for (int i = 0; i < num_sites(); ++i) {
    if (sites_[i].name == name) return i;
  }
  return -1;
}

std::array<int, 3> KinematicModel::root_translation_dofs() const {
  std::array<int, 3> out = {-1, -1, -1};
  if (segments_.empty()) return out;
  for (int k : segments_[0].dofs) {
    const JointType type = dofs_[k].type;
    if (IsRevolute(type)) break;  // translations after a rotation are not world-aligned
    out[JointAxis(type)] = k;
  }
  return out;
}

KinematicModel LoadModel(std::string_view description) {
  std::vector<Segment> segments;
  std::vector<Dof> dofs;
  std::vector<Site> sites;
  std::unordered_map<std::string, int> segment_index;
  std::unordered_map<std::string, int> site_index;

  std::istringstream in{std::string(description)};
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    if (auto hash = raw.find('#'); hash != std::string::npos) raw.resize(hash);
    std::istringstream tokens(raw);
    std::vector<std::string> words;
    for (std::string w; tokens >> w;) words.push_back(w);
    if (words.empty()) continue;

    const std::string& kind = words[0];
    if (kind == "segment") {
      if (words.size() != 4) {
        throw ParseError("segment needs: segment <name> parent=<p> offset=<x,y,z>",
                         line);
      }
      const std::string& name = words[1];
      if (segment_index.count(name)) {
        throw ParseError("duplicate segment '" + name + "'", line);
      }
      const std::string parent_name(KeyValue(words[2], "parent", line));
      Segment seg;
      seg.name = name;
      if (parent_name == name) {
        throw ParseError("cycle: segment '" + name + "' is its own parent", line);
      }
      if (parent_name != "none") {
        auto it = segment_index.find(parent_name);
        if (it == segment_index.end()) {
          throw ParseError("segment '" + name + "' references parent '" +
                               parent_name +
                               "' before it is defined (topological order)",
                           line);
        }
        seg.parent = it->second;
      } else if (!segments.empty()) {
        throw ParseError("only the first segment may have parent=none", line);
      }
      seg.offset = ParseVector(KeyValue(words[3], "offset", line), line);
      segment_index.emplace(name, static_cast<int>(segments.size()));
      segments.push_back(std::move(seg));
    } else if (kind == "dof") {
      if (words.size() != 3) {
        throw ParseError("dof needs: dof <segment> <type>", line);
      }
      auto it = segment_index.find(words[1]);
      if (it == segment_index.end()) {
        throw ParseError("dof references unknown segment '" + words[1] + "'",
                         line);
      }
      Dof dof;
      dof.segment = it->second;
      if (!ParseJointType(words[2], &dof.type)) {
        throw ParseError("unknown joint type '" + words[2] + "'", line);
      }
      for (const Dof& other : dofs) {
        if (other.segment == dof.segment && other.type == dof.type) {
          throw ParseError("duplicate dof assignment " + words[2] + " on '" +
                               words[1] + "'",
                           line);
        }
      }
      dofs.push_back(dof);
    } else if (kind == "site") {
      if (words.size() != 4) {
        throw ParseError("site needs: site <name> <segment> offset=<x,y,z>", line);
      }
      if (site_index.count(words[1])) {
        throw ParseError("duplicate site '" + words[1] + "'", line);
      }
      auto it = segment_index.find(words[2]);
      if (it == segment_index.end()) {
        throw ParseError("site references unknown segment '" + words[2] + "'",
                         line);
      }
      Site site;
      site.name = words[1];
      site.segment = it->second;
      site.offset = ParseVector(KeyValue(words[3], "offset", line), line);
      site_index.emplace(site.name, static_cast<int>(sites.size()));
      sites.push_back(std::move(site));
    } else {
      throw ParseError("unknown directive '" + kind + "'", line);
    }
  }
  if (segments.empty()) throw ParseError("model has no segments", 0);
  return KinematicModel(std::move(segments), std::move(dofs), std::move(sites));
}

const KinematicModel& DefaultHumanoid() {
  static const KinematicModel model = LoadModel(DefaultHumanoidDescription());
  return model;
}

BodyConfiguration ForwardKinematics(const KinematicModel& model,
                                    const Pose& pose) {
  std::vector<Frame> frames;
  ComputeFrames(model, pose, &frames, nullptr);
  BodyConfiguration out;
  out.joint_positions.reserve(frames.size());
  for (const Frame& f : frames) out.joint_positions.push_back(f.position);
  out.site_positions.reserve(model.sites().size());
  for (const Site& site : model.sites()) {
    out.site_positions.push_back(SiteWorld(frames, site));
  }
  return out;
}

Eigen::VectorXd SitePositions(const KinematicModel& model, const Pose& pose) {
  std::vector<Frame> frames;
  ComputeFrames(model, pose, &frames, nullptr);
  Eigen::VectorXd out(3 * model.num_sites());
  for (int s = 0; s < model.num_sites(); ++s) {
    out.segment<3>(3 * s) = SiteWorld(frames, model.sites()[s]);
  }
  return out;
}

Eigen::MatrixXd PositionJacobian(const KinematicModel& model, const Pose& pose,
                                 std::span<const int> sites) {
  if (sites.empty()) throw InputError("empty site selection");
  for (int s : sites) {
    if (s < 0 || s >= model.num_sites()) {
      throw DimensionError("site index " + std::to_string(s) + " out of range");
    }
  }
  std::vector<Frame> frames;
  std::vector<Frame> dof_frames;
  ComputeFrames(model, pose, &frames, &dof_frames);
  Eigen::MatrixXd jac(3 * sites.size(), model.nq());
  for (size_t i = 0; i < sites.size(); ++i) {
    const Eigen::Vector3d p = SiteWorld(frames, model.sites()[sites[i]]);
    FillJacobianBlock(model, dof_frames, sites[i], p,
                      jac.middleRows(3 * static_cast<Eigen::Index>(i), 3));
  }
  return jac;
}

void SitePositionsAndJacobian(const KinematicModel& model, const Pose& pose,
                              Eigen::VectorXd* positions,
                              Eigen::MatrixXd* jacobian) {
  std::vector<Frame> frames;
  std::vector<Frame> dof_frames;
  ComputeFrames(model, pose, &frames, &dof_frames);
  const int num_sites = model.num_sites();
  positions->resize(3 * num_sites);
  jacobian->resize(3 * num_sites, model.nq());
  for (int s = 0; s < num_sites; ++s) {
    const Eigen::Vector3d p = SiteWorld(frames, model.sites()[s]);
    positions->segment<3>(3 * s) = p;
    FillJacobianBlock(model, dof_frames, s, p, jacobian->middleRows(3 * s, 3));
  }
}

Pose NeutralPose(const KinematicModel& model) {
  return Pose::Zero(model.nq());
}

}  // namespace kinepipe
