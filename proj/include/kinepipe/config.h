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

#ifndef KINEPIPE_CONFIG_H_
#define KINEPIPE_CONFIG_H_

#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <string_view>

#include "kinepipe/pipeline.h"
#include "kinepipe/stages.h"

namespace kinepipe {

// Parsed `key = value` lines. Blank lines and `#` comments are skipped;
// duplicate keys are a ParseError.
class KeyValueConfig {
 public:
  static KeyValueConfig Parse(std::string_view text);

  bool Has(const std::string& key) const { return values_.count(key) > 0; }
  const std::map<std::string, std::string>& values() const { return values_; }

  std::string GetString(const std::string& key) const;
  double GetDouble(const std::string& key) const;
  long long GetInt(const std::string& key) const;

  // Throws ParseError naming the first key outside `allowed`.
  void RequireKnownKeys(const std::set<std::string>& allowed) const;

 private:
  int LineOf(const std::string& key) const;

  std::map<std::string, std::string> values_;
  std::map<std::string, int> lines_;
};

// Synthetic-sequence description (also the descriptor written by `synth`).
struct SyntheticConfig {
  std::uint64_t seed = 0;
  int frames = 195;
  GaitParameters gait;
  double noise_sigma = 0.02;
  int per_frame_inference_ms = 0;

  void Validate() const;
  bool operator==(const SyntheticConfig&) const = default;
};

SyntheticConfig ParseSyntheticConfig(std::string_view text);
std::string FormatSyntheticConfig(const SyntheticConfig& config);

struct ParsedPipelineConfig {
  PipelineConfig config;
  std::set<std::string> explicit_keys;  // keys present in the file
};

// Keys: mode, sample_length, workers, intermediate_dir, max_iters, step_tol,
// damping, temporal_weight, keypoint_weight, simulated_fetch_ms,
// per_frame_inference_ms, noise_preset (default | noiseless | divergent),
// noise_sigma, rigid_offset_sigma, source_tag. Defaults follow the mode.
ParsedPipelineConfig ParsePipelineConfig(std::string_view text,
                                         int num_sites);
std::string FormatPipelineConfig(const PipelineConfig& config);

// Reads a whole text file; IoError names the path on failure.
std::string ReadTextFile(const std::filesystem::path& path);

}  // namespace kinepipe

#endif  // KINEPIPE_CONFIG_H_
