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

#ifndef KINEPIPE_BENCH_H_
#define KINEPIPE_BENCH_H_

#include <optional>
#include <string>
#include <vector>

#include "kinepipe/filesystem.h"
#include "kinepipe/kinematics.h"
#include "kinepipe/pipeline.h"
#include "kinepipe/stages.h"

namespace kinepipe {

struct BenchSequence {
  std::string name;
  SyntheticSequence sequence;
};

struct TrialRecord {
  int trial = 0;  // 1-based
  double init_latency_s = 0.0;
  std::vector<double> per_sequence_s;  // processing wall-clock per sequence

  double processing_s() const;
  double total_s() const { return init_latency_s + processing_s(); }
};

struct BenchmarkReport {
  std::string label;
  std::vector<std::string> sequence_names;
  std::vector<int> sequence_frames;
  std::vector<TrialRecord> trials;

  // Arithmetic means across trials.
  double mean_init_s = 0.0;
  double mean_video_s = 0.0;       // per sequence
  double mean_processing_s = 0.0;  // all sequences, init excluded
  double total_s = 0.0;            // init + all sequences
  double fps = 0.0;                // total frames / mean_processing_s

  int total_frames() const;
  // Recomputes the means from `trials`.
  void Summarize();
};

struct BenchmarkComparison {
  double init_speedup = 0.0;        // reference init / measured init
  double throughput_factor = 0.0;   // reference s/video / measured s/video
  double fps_factor = 0.0;          // measured fps / reference fps
  double total_runtime_percent_change = 0.0;  // negative = faster
};

// Throws InputError unless both reports cover the same sequence set.
BenchmarkComparison CompareReports(const BenchmarkReport& reference,
                                   const BenchmarkReport& measured);

struct BenchmarkOutcome {
  BenchmarkReport a;
  BenchmarkReport b;
  BenchmarkComparison comparison;  // b measured against a
};

// For each config: one untimed warm-up (init plus the first sequence), then
// `trials` timed trials. A trial initializes the pipeline once (timed) and
// processes every sequence in order. Trials alternate between the configs;
// only one pipeline runs at a time. Pipeline errors are rethrown with the
// config label, trial and sequence.
BenchmarkOutcome RunBenchmark(const KinematicModel& model,
                              const std::vector<BenchSequence>& sequences,
                              const PipelineConfig& config_a,
                              const PipelineConfig& config_b, int trials,
                              FileSystem& fs = DefaultFileSystem());

// Fixed-width table: a header, one row per sequence (one column per trial
// plus the mean) and an FPS summary row. With a reference report, a runtime
// block and an Improvement row follow.
std::string FormatReport(const BenchmarkReport& report,
                         const BenchmarkReport* reference = nullptr);

std::string ReportKeyValues(const BenchmarkReport& report,
                            const std::string& prefix);
std::string ComparisonKeyValues(const BenchmarkComparison& comparison);

}  // namespace kinepipe

#endif  // KINEPIPE_BENCH_H_
