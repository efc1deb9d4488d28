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

#include "kinepipe/bench.h"

#include <algorithm>
#include <cstdio>
#include <numeric>
#include <optional>
#include <sstream>

#include "kinepipe/error.h"

namespace kinepipe {
namespace {

std::string Format(const char* fmt, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), fmt, v);
  return buf;
}

std::string Pad(const std::string& s, int width, bool left = false) {
  if (static_cast<int>(s.size()) >= width) return s;
  const std::string fill(width - s.size(), ' ');
  return left ? s + fill : fill + s;
}

BenchmarkReport EmptyReport(const std::string& label,
                            const std::vector<BenchSequence>& sequences) {
  BenchmarkReport r;
  r.label = label;
  for (const auto& s : sequences) {
    r.sequence_names.push_back(s.name);
    r.sequence_frames.push_back(s.sequence.size());
  }
  return r;
}

TrialRecord RunTrial(const KinematicModel& model,
                     const std::vector<BenchSequence>& sequences,
                     const PipelineConfig& config, FileSystem& fs, int trial,
                     const std::string& label, bool warm_up) {
  const std::string where =
      label + (warm_up ? " warm-up" : " trial " + std::to_string(trial));
  TrialRecord record;
  record.trial = trial;
  std::optional<Pipeline> pipeline;
  try {
    pipeline.emplace(model, config, fs);
  } catch (const Error& e) {
    throw Error(where + ", init: " + e.what());
  }
  record.init_latency_s = pipeline->init_latency_s();
  const size_t count = warm_up ? std::min<size_t>(1, sequences.size())
                               : sequences.size();
  for (size_t i = 0; i < count; ++i) {
    try {
      const auto run = pipeline->Run(sequences[i].sequence,
                                     label + "_" + sequences[i].name);
      record.per_sequence_s.push_back(run.total_video_s);
    } catch (const Error& e) {
      throw Error(where + ", sequence '" + sequences[i].name + "': " + e.what());
    }
  }
  return record;
}

}  // namespace

double TrialRecord::processing_s() const {
  return std::accumulate(per_sequence_s.begin(), per_sequence_s.end(), 0.0);
}

int BenchmarkReport::total_frames() const {
  return std::accumulate(sequence_frames.begin(), sequence_frames.end(), 0);
}

void BenchmarkReport::Summarize() {
  if (trials.empty()) throw InputError("benchmark report has no trials");
  double init = 0.0, processing = 0.0, total = 0.0;
  for (const auto& t : trials) {
    if (t.per_sequence_s.size() != sequence_names.size()) {
      throw DimensionError("trial " + std::to_string(t.trial) +
                           " does not cover every sequence");
    }
    init += t.init_latency_s;
    processing += t.processing_s();
    total += t.total_s();
  }
  const double n = static_cast<double>(trials.size());
  mean_init_s = init / n;
  mean_processing_s = processing / n;
  total_s = total / n;
  mean_video_s = sequence_names.empty()
                     ? 0.0
                     : mean_processing_s / static_cast<double>(sequence_names.size());
  fps = mean_processing_s > 0.0 ? total_frames() / mean_processing_s : 0.0;
}

BenchmarkComparison CompareReports(const BenchmarkReport& reference,
                                   const BenchmarkReport& measured) {
  if (reference.sequence_names != measured.sequence_names ||
      reference.sequence_frames != measured.sequence_frames) {
    throw InputError("reports '" + reference.label + "' and '" +
                     measured.label + "' cover different sequence sets");
  }
  auto ratio = [](double num, double den) {
    return den > 0.0 ? num / den : 0.0;
  };
  BenchmarkComparison c;
  c.init_speedup = ratio(reference.mean_init_s, measured.mean_init_s);
  c.throughput_factor = ratio(reference.mean_video_s, measured.mean_video_s);
  c.fps_factor = ratio(measured.fps, reference.fps);
  c.total_runtime_percent_change =
      reference.total_s > 0.0
          ? 100.0 * (measured.total_s - reference.total_s) / reference.total_s
          : 0.0;
  return c;
}

BenchmarkOutcome RunBenchmark(const KinematicModel& model,
                              const std::vector<BenchSequence>& sequences,
                              const PipelineConfig& config_a,
                              const PipelineConfig& config_b, int trials,
                              FileSystem& fs) {
  if (trials < 1) throw InputError("trials must be >= 1");
  if (sequences.empty()) throw InputError("benchmark needs at least one sequence");
  BenchmarkOutcome out;
  out.a = EmptyReport("A", sequences);
  out.b = EmptyReport("B", sequences);

  RunTrial(model, sequences, config_a, fs, 0, "A", /*warm_up=*/true);
  RunTrial(model, sequences, config_b, fs, 0, "B", /*warm_up=*/true);
  for (int trial = 1; trial <= trials; ++trial) {
    out.a.trials.push_back(
        RunTrial(model, sequences, config_a, fs, trial, "A", false));
    out.b.trials.push_back(
        RunTrial(model, sequences, config_b, fs, trial, "B", false));
  }
  out.a.Summarize();
  out.b.Summarize();
  out.comparison = CompareReports(out.a, out.b);
  return out;
}

std::string FormatReport(const BenchmarkReport& report,
                         const BenchmarkReport* reference) {
  constexpr int kName = 18;
  constexpr int kCol = 12;
  std::string out;

  std::string header = Pad("Sequence", kName, true) + Pad("Frames", 8);
  for (const auto& t : report.trials) {
    header += Pad("Trial " + std::to_string(t.trial) + " (s)", kCol + 2);
  }
  header += Pad("Mean (s)", kCol);
  out += header + "\n";

  for (size_t i = 0; i < report.sequence_names.size(); ++i) {
    std::string row = Pad(report.sequence_names[i], kName, true) +
                      Pad(std::to_string(report.sequence_frames[i]), 8);
    double sum = 0.0;
    for (const auto& t : report.trials) {
      row += Pad(Format("%.3f", t.per_sequence_s[i]), kCol + 2);
      sum += t.per_sequence_s[i];
    }
    row += Pad(Format("%.3f", sum / report.trials.size()), kCol);
    out += row + "\n";
  }

  std::string summary = Pad("FPS", kName, true) +
                        Pad(std::to_string(report.total_frames()), 8);
  for (const auto& t : report.trials) {
    const double p = t.processing_s();
    summary += Pad(Format("%.2f", p > 0.0 ? report.total_frames() / p : 0.0),
                   kCol + 2);
  }
  summary += Pad(Format("%.2f", report.fps), kCol);
  out += summary + "\n";

  if (reference != nullptr) {
    const BenchmarkComparison c = CompareReports(*reference, report);
    auto line = [&](const std::string& name, const std::string& init,
                    const std::string& video, const std::string& total,
                    const std::string& fps) {
      out += Pad(name, kName, true) + Pad(init, kCol) + Pad(video, kCol + 4) +
             Pad(total, kCol) + Pad(fps, kCol) + "\n";
    };
    out += "\n";
    line("Configuration", "Init (s)", "Video (s/video)", "Total (s)", "FPS");
    for (const BenchmarkReport* r : {reference, &report}) {
      line(r->label, Format("%.3f", r->mean_init_s),
           Format("%.3f", r->mean_video_s), Format("%.3f", r->total_s),
           Format("%.2f", r->fps));
    }
    line("Improvement", Format("%.2fx", c.init_speedup),
         Format("%.2fx", c.throughput_factor),
         Format("%+.1f%%", c.total_runtime_percent_change),
         Format("%.2fx", c.fps_factor));
  }
  return out;
}

std::string ReportKeyValues(const BenchmarkReport& report,
                            const std::string& prefix) {
  std::ostringstream out;
  out.precision(17);
  out << prefix << "label=" << report.label << "\n"
      << prefix << "trials=" << report.trials.size() << "\n"
      << prefix << "sequences=" << report.sequence_names.size() << "\n"
      << prefix << "total_frames=" << report.total_frames() << "\n"
      << prefix << "mean_init_s=" << report.mean_init_s << "\n"
      << prefix << "mean_video_s=" << report.mean_video_s << "\n"
      << prefix << "mean_processing_s=" << report.mean_processing_s << "\n"
      << prefix << "total_s=" << report.total_s << "\n"
      << prefix << "fps=" << report.fps << "\n";
  for (size_t i = 0; i < report.sequence_names.size(); ++i) {
    out << prefix << "sequence." << i << ".name=" << report.sequence_names[i]
        << "\n"
        << prefix << "sequence." << i << ".frames=" << report.sequence_frames[i]
        << "\n";
  }
  for (const auto& t : report.trials) {
    const std::string p = prefix + "trial." + std::to_string(t.trial) + ".";
    out << p << "init_latency_s=" << t.init_latency_s << "\n";
    for (size_t i = 0; i < t.per_sequence_s.size(); ++i) {
      out << p << "sequence." << i << ".total_s=" << t.per_sequence_s[i] << "\n";
    }
  }
  return out.str();
}

std::string ComparisonKeyValues(const BenchmarkComparison& c) {
  std::ostringstream out;
  out.precision(17);
  out << "comparison.init_speedup=" << c.init_speedup << "\n"
      << "comparison.throughput_factor=" << c.throughput_factor << "\n"
      << "comparison.fps_factor=" << c.fps_factor << "\n"
      << "comparison.total_runtime_percent_change="
      << c.total_runtime_percent_change << "\n";
  return out.str();
}

}  // namespace kinepipe
