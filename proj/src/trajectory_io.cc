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

#include "kinepipe/trajectory_io.h"

#include <array>
#include <charconv>
#include <cmath>
#include <map>
#include <numbers>

#include "kinepipe/error.h"

namespace kinepipe {
namespace {

void AppendNumber(std::string& out, double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  out.append(buf, res.ptr);
}

// Splits text into lines, dropping a trailing '\r' and empty lines; records
// 1-based line numbers for error messages.
std::vector<std::pair<int, std::string_view>> Lines(std::string_view text) {
  std::vector<std::pair<int, std::string_view>> lines;
  int line_no = 0;
  size_t pos = 0;
  while (pos < text.size()) {
    size_t nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view line = text.substr(pos, nl - pos);
    pos = nl + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (!line.empty()) lines.emplace_back(line_no, line);
  }
  return lines;
}

std::vector<std::string_view> Split(std::string_view line) {
  std::vector<std::string_view> fields;
  size_t pos = 0;
  for (;;) {
    const size_t comma = line.find(',', pos);
    if (comma == std::string_view::npos) {
      fields.push_back(line.substr(pos));
      return fields;
    }
    fields.push_back(line.substr(pos, comma - pos));
    pos = comma + 1;
  }
}

double ParseDouble(std::string_view field, int line) {
  double v = 0.0;
  const auto res = std::from_chars(field.data(), field.data() + field.size(), v);
  if (res.ec != std::errc() || res.ptr != field.data() + field.size() ||
      !std::isfinite(v)) {
    throw ParseError("invalid number '" + std::string(field) + "'", line);
  }
  return v;
}

long long ParseInt(std::string_view field, int line) {
  long long v = 0;
  const auto res = std::from_chars(field.data(), field.data() + field.size(), v);
  if (res.ec != std::errc() || res.ptr != field.data() + field.size()) {
    throw ParseError("invalid integer '" + std::string(field) + "'", line);
  }
  return v;
}

}  // namespace

std::string FormatTrajectoryCsv(const CoordinateTrajectory& q) {
  std::string out = "frame";
  for (int d = 0; d < q.nq(); ++d) out += ",dof_" + std::to_string(d);
  out += '\n';
  for (int t = 0; t < q.frames(); ++t) {
    out += std::to_string(t);
    for (double v : q.row(t)) {
      out += ',';
      AppendNumber(out, v);
    }
    out += '\n';
  }
  return out;
}

TrajectoryTable ParseTrajectoryCsv(std::string_view text) {
  const auto lines = Lines(text);
  if (lines.empty()) throw ParseError("empty trajectory file", 0);
  const auto header = Split(lines[0].second);
  if (header.empty() || header[0] != "frame") {
    throw ParseError("trajectory header must start with 'frame'",
                     lines[0].first);
  }
  TrajectoryTable table;
  table.nq = static_cast<int>(header.size()) - 1;
  for (int d = 0; d < table.nq; ++d) {
    if (header[d + 1] != "dof_" + std::to_string(d)) {
      throw ParseError("expected column 'dof_" + std::to_string(d) + "', got '" +
                           std::string(header[d + 1]) + "'",
                       lines[0].first);
    }
  }
  for (size_t i = 1; i < lines.size(); ++i) {
    const auto [line_no, line] = lines[i];
    const auto fields = Split(line);
    if (static_cast<int>(fields.size()) != table.nq + 1) {
      throw ParseError("expected " + std::to_string(table.nq + 1) +
                           " fields, got " + std::to_string(fields.size()),
                       line_no);
    }
    if (ParseInt(fields[0], line_no) != table.frames) {
      throw ParseError("frames must be numbered 0, 1, 2, ...", line_no);
    }
    for (int d = 0; d < table.nq; ++d) {
      table.values.push_back(ParseDouble(fields[d + 1], line_no));
    }
    ++table.frames;
  }
  return table;
}

CoordinateTrajectory ToTrajectory(const TrajectoryTable& table,
                                  const std::vector<DofKind>& dof_kinds) {
  if (static_cast<int>(dof_kinds.size()) != table.nq) {
    throw DimensionError("trajectory has " + std::to_string(table.nq) +
                         " DOFs, model has " + std::to_string(dof_kinds.size()));
  }
  CoordinateTrajectory q(table.frames, dof_kinds);
  std::copy(table.values.begin(), table.values.end(),
            q.mutable_values().begin());
  return q;
}

std::string FormatPositionsCsv(const PointSeries& joints,
                               const PointSeries& sites) {
  if (joints.frames != sites.frames) {
    throw DimensionError("joint and site series cover different frame counts");
  }
  std::string out = "frame,kind,index,x,y,z\n";
  auto emit = [&out](int t, const char* kind, const PointSeries& p) {
    const auto f = p.frame(t);
    for (int k = 0; k < p.points; ++k) {
      out += std::to_string(t) + ',' + kind + ',' + std::to_string(k);
      for (int a = 0; a < 3; ++a) {
        out += ',';
        AppendNumber(out, f[3 * k + a]);
      }
      out += '\n';
    }
  };
  for (int t = 0; t < joints.frames; ++t) {
    emit(t, "joint", joints);
    emit(t, "site", sites);
  }
  return out;
}

PositionTables ParsePositionsCsv(std::string_view text) {
  const auto lines = Lines(text);
  if (lines.empty() || lines[0].second != "frame,kind,index,x,y,z") {
    throw ParseError("positions header must be 'frame,kind,index,x,y,z'",
                     lines.empty() ? 0 : lines[0].first);
  }
  // (frame, index) -> xyz per kind, then densified.
  std::map<std::pair<long long, long long>, std::array<double, 3>> rows[2];
  long long max_frame = -1, max_index[2] = {-1, -1};
  for (size_t i = 1; i < lines.size(); ++i) {
    const auto [line_no, line] = lines[i];
    const auto fields = Split(line);
    if (fields.size() != 6) {
      throw ParseError("expected 6 fields, got " + std::to_string(fields.size()),
                       line_no);
    }
    int kind;
    if (fields[1] == "joint") {
      kind = 0;
    } else if (fields[1] == "site") {
      kind = 1;
    } else {
      throw ParseError("kind must be 'joint' or 'site'", line_no);
    }
    const long long t = ParseInt(fields[0], line_no);
    const long long k = ParseInt(fields[2], line_no);
    if (t < 0 || k < 0) throw ParseError("negative frame or index", line_no);
    const std::array<double, 3> xyz{ParseDouble(fields[3], line_no),
                                    ParseDouble(fields[4], line_no),
                                    ParseDouble(fields[5], line_no)};
    if (!rows[kind].emplace(std::make_pair(t, k), xyz).second) {
      throw ParseError("duplicate entry", line_no);
    }
    max_frame = std::max(max_frame, t);
    max_index[kind] = std::max(max_index[kind], k);
  }
  PositionTables out;
  PointSeries* series[2] = {&out.joints, &out.sites};
  for (int kind = 0; kind < 2; ++kind) {
    const int frames = static_cast<int>(max_frame + 1);
    const int points = static_cast<int>(max_index[kind] + 1);
    if (static_cast<long long>(rows[kind].size()) !=
        static_cast<long long>(frames) * points) {
      throw ParseError(std::string("incomplete ") +
                           (kind == 0 ? "joint" : "site") + " table",
                       0);
    }
    *series[kind] = PointSeries(frames, points);
    for (const auto& [key, xyz] : rows[kind]) {
      auto f = series[kind]->frame(static_cast<int>(key.first));
      std::copy(xyz.begin(), xyz.end(), f.begin() + 3 * key.second);
    }
  }
  return out;
}

std::string FormatBlandAltmanPlotCsv(const CoordinateTrajectory& a,
                                     const CoordinateTrajectory& b) {
  if (a.frames() != b.frames() || a.nq() != b.nq()) {
    throw DimensionError("trajectory shape mismatch");
  }
  constexpr double kDeg = 180.0 / std::numbers::pi;
  std::string out = "frame,dof,mean_deg,diff_deg\n";
  for (int t = 0; t < a.frames(); ++t) {
    for (int d = 0; d < a.nq(); ++d) {
      if (a.dof_kinds()[d] != DofKind::kRevolute) continue;
      double diff = std::remainder(b.at(t, d) - a.at(t, d), 2 * std::numbers::pi);
      if (diff == -std::numbers::pi) diff = std::numbers::pi;
      out += std::to_string(t) + ',' + std::to_string(d) + ',';
      // Midpoint along the short arc, so pairs straddling the wrap stay close.
      AppendNumber(out, (a.at(t, d) + 0.5 * diff) * kDeg);
      out += ',';
      AppendNumber(out, diff * kDeg);
      out += '\n';
    }
  }
  return out;
}

}  // namespace kinepipe
