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

#include "kinepipe/config.h"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "kinepipe/error.h"

namespace kinepipe {
namespace {

std::string_view Trim(std::string_view s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string_view::npos) return {};
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

std::string FormatDouble(double v) {
  std::ostringstream out;
  out.precision(17);
  out << v;
  return out.str();
}

}  // namespace

KeyValueConfig KeyValueConfig::Parse(std::string_view text) {
  KeyValueConfig cfg;
  int line_no = 0;
  size_t pos = 0;
  while (pos <= text.size()) {
    const size_t nl = text.find('\n', pos);
    std::string_view line =
        text.substr(pos, nl == std::string_view::npos ? text.size() - pos
                                                      : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) {
      line = line.substr(0, hash);
    }
    line = Trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ParseError("expected key=value, got '" + std::string(line) + "'",
                       line_no);
    }
    const std::string key(Trim(line.substr(0, eq)));
    const std::string value(Trim(line.substr(eq + 1)));
    if (key.empty()) throw ParseError("empty key", line_no);
    if (cfg.values_.count(key)) {
      throw ParseError("duplicate key '" + key + "'", line_no);
    }
    cfg.values_[key] = value;
    cfg.lines_[key] = line_no;
  }
  return cfg;
}

int KeyValueConfig::LineOf(const std::string& key) const {
  auto it = lines_.find(key);
  return it == lines_.end() ? 0 : it->second;
}

std::string KeyValueConfig::GetString(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) throw ParseError("missing key '" + key + "'", 0);
  return it->second;
}

double KeyValueConfig::GetDouble(const std::string& key) const {
  const std::string v = GetString(key);
  double out = 0.0;
  const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc() || res.ptr != v.data() + v.size() ||
      !std::isfinite(out)) {
    throw ParseError("key '" + key + "' expects a number, got '" + v + "'",
                     LineOf(key));
  }
  return out;
}

long long KeyValueConfig::GetInt(const std::string& key) const {
  const std::string v = GetString(key);
  long long out = 0;
  const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc() || res.ptr != v.data() + v.size()) {
    throw ParseError("key '" + key + "' expects an integer, got '" + v + "'",
                     LineOf(key));
  }
  return out;
}

void KeyValueConfig::RequireKnownKeys(
    const std::set<std::string>& allowed) const {
  for (const auto& [key, value] : values_) {
    if (!allowed.count(key)) {
      throw ParseError("unknown key '" + key + "'", LineOf(key));
    }
  }
}

void SyntheticConfig::Validate() const {
  if (frames < 1) throw InputError("frames must be >= 1");
  gait.Validate();
  if (!(noise_sigma >= 0.0)) throw InputError("noise_sigma must be >= 0");
  if (per_frame_inference_ms < 0) {
    throw InputError("per_frame_inference_ms must be >= 0");
  }
}

SyntheticConfig ParseSyntheticConfig(std::string_view text) {
  const auto kv = KeyValueConfig::Parse(text);
  kv.RequireKnownKeys({"seed", "frames", "amplitude", "frequency",
                       "noise_sigma", "per_frame_inference_ms"});
  SyntheticConfig c;
  if (kv.Has("seed")) {
    const long long seed = kv.GetInt("seed");
    if (seed < 0) throw InputError("seed must be >= 0");
    c.seed = static_cast<std::uint64_t>(seed);
  }
  if (kv.Has("frames")) c.frames = static_cast<int>(kv.GetInt("frames"));
  if (kv.Has("amplitude")) c.gait.amplitude = kv.GetDouble("amplitude");
  if (kv.Has("frequency")) c.gait.frequency = kv.GetDouble("frequency");
  if (kv.Has("noise_sigma")) c.noise_sigma = kv.GetDouble("noise_sigma");
  if (kv.Has("per_frame_inference_ms")) {
    c.per_frame_inference_ms =
        static_cast<int>(kv.GetInt("per_frame_inference_ms"));
  }
  c.Validate();
  return c;
}

std::string FormatSyntheticConfig(const SyntheticConfig& c) {
  std::ostringstream out;
  out << "seed=" << c.seed << "\n"
      << "frames=" << c.frames << "\n"
      << "amplitude=" << FormatDouble(c.gait.amplitude) << "\n"
      << "frequency=" << FormatDouble(c.gait.frequency) << "\n"
      << "noise_sigma=" << FormatDouble(c.noise_sigma) << "\n"
      << "per_frame_inference_ms=" << c.per_frame_inference_ms << "\n";
  return out.str();
}

ParsedPipelineConfig ParsePipelineConfig(std::string_view text,
                                         int num_sites) {
  const auto kv = KeyValueConfig::Parse(text);
  kv.RequireKnownKeys({"mode", "sample_length", "workers", "intermediate_dir",
                       "max_iters", "step_tol", "damping", "temporal_weight",
                       "keypoint_weight", "simulated_fetch_ms",
                       "per_frame_inference_ms", "noise_preset", "noise_sigma",
                       "rigid_offset_sigma", "source_tag"});
  ParsedPipelineConfig parsed;
  const PipelineMode mode = kv.Has("mode")
                                ? ParsePipelineMode(kv.GetString("mode"))
                                : PipelineMode::kOptimized;
  PipelineConfig& c = parsed.config;
  c = mode == PipelineMode::kBaseline ? PipelineConfig::Baseline()
                                      : PipelineConfig::Optimized();
  if (kv.Has("sample_length")) {
    c.sample_length = static_cast<int>(kv.GetInt("sample_length"));
  }
  if (kv.Has("workers")) c.workers = static_cast<int>(kv.GetInt("workers"));
  if (kv.Has("intermediate_dir")) {
    c.intermediate_dir = kv.GetString("intermediate_dir");
  }
  if (kv.Has("max_iters")) {
    c.solver.max_iters = static_cast<int>(kv.GetInt("max_iters"));
  }
  if (kv.Has("step_tol")) c.solver.step_tol = kv.GetDouble("step_tol");
  if (kv.Has("damping")) c.solver.damping = kv.GetDouble("damping");
  if (kv.Has("temporal_weight")) {
    c.solver.temporal_weight = kv.GetDouble("temporal_weight");
  }
  if (kv.Has("keypoint_weight")) {
    c.solver.keypoint_weights.assign(num_sites, kv.GetDouble("keypoint_weight"));
  }
  if (kv.Has("simulated_fetch_ms")) {
    c.stage_profile.simulated_fetch_ms =
        static_cast<int>(kv.GetInt("simulated_fetch_ms"));
  }
  if (kv.Has("per_frame_inference_ms")) {
    c.stage_profile.per_frame_inference_ms =
        static_cast<int>(kv.GetInt("per_frame_inference_ms"));
  }
  if (kv.Has("noise_preset")) {
    const std::string preset = kv.GetString("noise_preset");
    if (preset == "default") {
      c.estimator.noise = NoiseModel::Default();
    } else if (preset == "noiseless") {
      c.estimator.noise = NoiseModel::Noiseless();
    } else if (preset == "divergent") {
      c.estimator.noise = NoiseModel::Divergent();
    } else {
      throw InputError("unknown noise_preset '" + preset + "'");
    }
  }
  if (kv.Has("noise_sigma")) c.estimator.noise.sigma = kv.GetDouble("noise_sigma");
  if (kv.Has("rigid_offset_sigma")) {
    c.estimator.noise.rigid_offset_sigma = kv.GetDouble("rigid_offset_sigma");
  }
  if (kv.Has("source_tag")) c.estimator.source_tag = kv.GetString("source_tag");
  for (const auto& [key, value] : kv.values()) parsed.explicit_keys.insert(key);
  c.Validate(num_sites);
  return parsed;
}

std::string FormatPipelineConfig(const PipelineConfig& c) {
  std::ostringstream out;
  out << "mode=" << PipelineModeName(c.mode) << "\n"
      << "sample_length=" << c.sample_length << "\n"
      << "workers=" << c.workers << "\n"
      << "intermediate_dir=" << c.intermediate_dir.string() << "\n"
      << "max_iters=" << c.solver.max_iters << "\n"
      << "step_tol=" << FormatDouble(c.solver.step_tol) << "\n"
      << "damping=" << FormatDouble(c.solver.damping) << "\n"
      << "temporal_weight=" << FormatDouble(c.solver.temporal_weight) << "\n";
  // Only uniform weights are expressible in the text format.
  if (!c.solver.keypoint_weights.empty()) {
    out << "keypoint_weight=" << FormatDouble(c.solver.keypoint_weights[0])
        << "\n";
  }
  out << "simulated_fetch_ms=" << c.stage_profile.simulated_fetch_ms << "\n"
      << "per_frame_inference_ms=" << c.stage_profile.per_frame_inference_ms
      << "\n"
      << "noise_sigma=" << FormatDouble(c.estimator.noise.sigma) << "\n"
      << "rigid_offset_sigma="
      << FormatDouble(c.estimator.noise.rigid_offset_sigma) << "\n"
      << "source_tag=" << c.estimator.source_tag << "\n";
  return out.str();
}

std::string ReadTextFile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace kinepipe
