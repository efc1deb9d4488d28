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

#include "kinepipe/cli.h"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "kinepipe/bench.h"
#include "kinepipe/config.h"
#include "kinepipe/error.h"
#include "kinepipe/fitting.h"
#include "kinepipe/kinematics.h"
#include "kinepipe/metrics.h"
#include "kinepipe/pipeline.h"
#include "kinepipe/stages.h"
#include "kinepipe/trajectory_io.h"

namespace kinepipe {
namespace {

namespace fs = std::filesystem;

// Raised for problems with the invocation itself (bad values, missing
// inputs); mapped to kExitUsage.
class UsageError : public Error {
 public:
  using Error::Error;
};

std::string OneLine(std::string s) {
  for (char& c : s) {
    if (c == '\n' || c == '\r') c = ' ';
  }
  while (!s.empty() && s.back() == ' ') s.pop_back();
  return s;
}

void RequireFile(const fs::path& path, const std::string& what) {
  std::error_code ec;
  if (!fs::is_regular_file(path, ec)) {
    throw UsageError("missing " + what + ": '" + path.string() + "'");
  }
}

void PrepareDirectory(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) {
    throw IoError("cannot create output directory '" + dir.string() + "'");
  }
}

void PrepareParent(const fs::path& file) {
  if (file.has_parent_path()) PrepareDirectory(file.parent_path());
}

void WriteText(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << text;
  out.close();
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

SyntheticSequence SequenceFor(const KinematicModel& model,
                              const SyntheticConfig& c) {
  return GenerateSyntheticSequence(model, c.seed, c.frames, c.gait);
}

// The sequence descriptor supplies the synthetic stages' noise level and
// latency unless the pipeline config sets them explicitly.
PipelineConfig MergeSequenceSettings(const ParsedPipelineConfig& parsed,
                                     const SyntheticConfig& sequence) {
  PipelineConfig c = parsed.config;
  const auto& keys = parsed.explicit_keys;
  if (!keys.count("noise_sigma") && !keys.count("noise_preset")) {
    c.estimator.noise.sigma = sequence.noise_sigma;
  }
  if (!keys.count("per_frame_inference_ms")) {
    c.stage_profile.per_frame_inference_ms = sequence.per_frame_inference_ms;
  }
  return c;
}

ParsedPipelineConfig LoadPipelineConfig(const fs::path& path,
                                        const KinematicModel& model) {
  RequireFile(path, "pipeline config");
  try {
    return ParsePipelineConfig(ReadTextFile(path), model.num_sites());
  } catch (const Error& e) {
    throw UsageError(path.string() + ": " + e.what());
  }
}

SyntheticConfig LoadSequenceConfig(const fs::path& path) {
  RequireFile(path, "sequence config");
  try {
    return ParseSyntheticConfig(ReadTextFile(path));
  } catch (const Error& e) {
    throw UsageError(path.string() + ": " + e.what());
  }
}

std::string RunRecordKeyValues(const PipelineRunRecord& r,
                               const PipelineConfig& c) {
  std::ostringstream out;
  out.precision(17);
  out << "mode=" << PipelineModeName(c.mode) << "\n"
      << "frames=" << r.frames << "\n"
      << "workers_used=" << r.workers_used << "\n"
      << "batches=" << r.batches << "\n"
      << "init_latency_s=" << r.init_latency_s << "\n"
      << "detect_wall_s=" << r.per_stage_wall_s.detect_s << "\n"
      << "estimate_wall_s=" << r.per_stage_wall_s.estimate_s << "\n"
      << "fit_wall_s=" << r.per_stage_wall_s.fit_s << "\n"
      << "serialize_wall_s=" << r.serialize_wall_s << "\n"
      << "total_video_s=" << r.total_video_s << "\n"
      << "fps=" << r.fps << "\n"
      << "intermediates_written=" << r.intermediates_written << "\n"
      << "max_boundary_discontinuity=" << r.max_boundary_discontinuity << "\n";
  double residual = 0.0;
  for (double v : r.fit_result.per_frame_residual_mm) residual += v;
  out << "mean_residual_mm="
      << (r.frames > 0 ? residual / r.frames : 0.0) << "\n";
  return out.str();
}

// ---- synth ----

struct SynthArgs {
  std::string config;
  std::string out_dir;
  std::optional<long long> seed;
  std::optional<int> frames;
  std::optional<double> amplitude;
  std::optional<double> frequency;
};

int CmdSynth(const SynthArgs& args, std::ostream& out) {
  SyntheticConfig c;
  if (!args.config.empty()) c = LoadSequenceConfig(args.config);
  if (args.seed) {
    if (*args.seed < 0) throw UsageError("--seed must be >= 0");
    c.seed = static_cast<std::uint64_t>(*args.seed);
  }
  if (args.frames) c.frames = *args.frames;
  if (args.amplitude) c.gait.amplitude = *args.amplitude;
  if (args.frequency) c.gait.frequency = *args.frequency;
  try {
    c.Validate();
  } catch (const InputError& e) {
    throw UsageError(e.what());
  }

  const fs::path dir(args.out_dir);
  PrepareDirectory(dir);
  const KinematicModel& model = DefaultHumanoid();
  const SyntheticSequence seq = SequenceFor(model, c);
  WriteText(dir / "ground_truth.csv", FormatTrajectoryCsv(seq.ground_truth));
  WriteText(dir / "sequence.cfg", FormatSyntheticConfig(c));
  out << "wrote " << (dir / "ground_truth.csv").string() << " ("
      << seq.size() << " frames, nq=" << model.nq() << ")\n"
      << "wrote " << (dir / "sequence.cfg").string() << "\n";
  return kExitOk;
}

// ---- run ----

struct RunArgs {
  std::string sequence;
  std::string config;
  std::string out_dir;
  std::string mode;
  std::optional<int> workers;
};

int CmdRun(const RunArgs& args, std::ostream& out) {
  const KinematicModel& model = DefaultHumanoid();
  const SyntheticConfig seq_cfg = LoadSequenceConfig(args.sequence);
  ParsedPipelineConfig parsed;
  if (!args.config.empty()) {
    parsed = LoadPipelineConfig(args.config, model);
  } else {
    parsed.config = PipelineConfig::Optimized();
  }
  if (!args.mode.empty()) {
    PipelineMode mode;
    try {
      mode = ParsePipelineMode(args.mode);
    } catch (const InputError& e) {
      throw UsageError(e.what());
    }
    if (mode != parsed.config.mode) {
      // Switch to the new mode's defaults for anything the file left unset.
      PipelineConfig base = mode == PipelineMode::kBaseline
                                ? PipelineConfig::Baseline()
                                : PipelineConfig::Optimized();
      if (!parsed.explicit_keys.count("max_iters")) {
        parsed.config.solver.max_iters = base.solver.max_iters;
      }
      parsed.config.mode = mode;
    }
  }
  if (args.workers) {
    if (*args.workers < 1) throw UsageError("--workers must be >= 1");
    parsed.config.workers = *args.workers;
  }
  const fs::path dir(args.out_dir);
  if (!parsed.explicit_keys.count("intermediate_dir")) {
    parsed.config.intermediate_dir = dir / "intermediates";
  }
  PipelineConfig config = MergeSequenceSettings(parsed, seq_cfg);
  try {
    config.Validate(model.num_sites());
  } catch (const InputError& e) {
    throw UsageError(e.what());
  }
  PrepareDirectory(dir);

  const SyntheticSequence seq = SequenceFor(model, seq_cfg);
  const std::string name = "seed" + std::to_string(seq_cfg.seed);
  const PipelineRunRecord record = RunPipeline(model, seq, config,
                                               DefaultFileSystem(), name);
  WriteText(dir / "trajectory.csv",
            FormatTrajectoryCsv(record.fit_result.trajectory));
  WriteText(dir / "positions.csv",
            FormatPositionsCsv(FittedJointPositions(record.fit_result),
                               FittedSitePositions(record.fit_result)));
  const std::string kv = RunRecordKeyValues(record, config);
  WriteText(dir / "run_record.txt", kv);
  out << kv;
  return kExitOk;
}

// ---- compare ----

struct CompareArgs {
  std::string traj_a, traj_b, pos_a, pos_b;
  std::string out_file;
  std::string plot_out;
};

int CmdCompare(const CompareArgs& args, std::ostream& out) {
  RequireFile(args.traj_a, "trajectory");
  RequireFile(args.traj_b, "trajectory");
  RequireFile(args.pos_a, "positions file");
  RequireFile(args.pos_b, "positions file");
  if (!args.out_file.empty()) PrepareParent(args.out_file);
  if (!args.plot_out.empty()) PrepareParent(args.plot_out);

  auto read_table = [](const std::string& path) {
    try {
      return ParseTrajectoryCsv(ReadTextFile(path));
    } catch (const ParseError& e) {
      throw ParseError(path + ": " + e.what(), 0);
    }
  };
  auto read_positions = [](const std::string& path) {
    try {
      return ParsePositionsCsv(ReadTextFile(path));
    } catch (const ParseError& e) {
      throw ParseError(path + ": " + e.what(), 0);
    }
  };
  const TrajectoryTable ta = read_table(args.traj_a);
  const TrajectoryTable tb = read_table(args.traj_b);
  if (ta.frames != tb.frames || ta.nq != tb.nq) {
    throw DimensionError("trajectory shape mismatch: " + args.traj_a + " is " +
                         std::to_string(ta.frames) + "x" +
                         std::to_string(ta.nq) + ", " + args.traj_b + " is " +
                         std::to_string(tb.frames) + "x" +
                         std::to_string(tb.nq));
  }
  const KinematicModel& model = DefaultHumanoid();
  const CoordinateTrajectory qa = ToTrajectory(ta, model.dof_kinds());
  const CoordinateTrajectory qb = ToTrajectory(tb, model.dof_kinds());
  const PositionTables pa = read_positions(args.pos_a);
  const PositionTables pb = read_positions(args.pos_b);

  SequenceComparison cmp;
  cmp.name = fs::path(args.traj_b).stem().string();
  cmp.trajectory_a = &qa;
  cmp.trajectory_b = &qb;
  cmp.joints_a = &pa.joints;
  cmp.joints_b = &pb.joints;
  cmp.sites_a = &pa.sites;
  cmp.sites_b = &pb.sites;
  const ConsistencyReport report = CompareSequences({cmp});

  std::string text = FormatConsistencyTable(report);
  if (qa.frames() >= 4) {
    text += "\n" + FormatSmoothnessTable(Smoothness(qb, qa), "B vs A");
  }
  text += "\n" + ConsistencyKeyValues(report);
  if (qa.frames() >= 4) text += SmoothnessKeyValues(Smoothness(qb, qa));
  if (!args.out_file.empty()) WriteText(args.out_file, text);
  if (!args.plot_out.empty()) {
    WriteText(args.plot_out, FormatBlandAltmanPlotCsv(qa, qb));
  }
  out << text;
  return kExitOk;
}

// ---- bench ----

struct BenchArgs {
  int trials = 2;
  std::string sequences;
  std::string config_a;
  std::string config_b;
  std::string report_out;
};

std::vector<std::string> SplitComma(const std::string& s) {
  std::vector<std::string> parts;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) parts.push_back(item);
  }
  return parts;
}

int CmdBench(const BenchArgs& args, std::ostream& out) {
  if (args.trials < 1) throw UsageError("--trials must be >= 1");
  const KinematicModel& model = DefaultHumanoid();
  const auto paths = SplitComma(args.sequences);
  if (paths.empty()) throw UsageError("--sequences lists no files");
  std::vector<SyntheticConfig> seq_cfgs;
  for (const auto& p : paths) seq_cfgs.push_back(LoadSequenceConfig(p));
  ParsedPipelineConfig a = LoadPipelineConfig(args.config_a, model);
  ParsedPipelineConfig b = LoadPipelineConfig(args.config_b, model);
  const fs::path report_path(args.report_out);
  PrepareParent(report_path);
  const fs::path scratch = report_path.parent_path().empty()
                               ? fs::path("bench_intermediates")
                               : report_path.parent_path() / "bench_intermediates";
  for (ParsedPipelineConfig* c : {&a, &b}) {
    if (!c->explicit_keys.count("intermediate_dir")) {
      c->config.intermediate_dir = scratch;
    }
  }

  // Noise and latency come from the first descriptor; every sequence in a
  // benchmark shares the stage configuration.
  const PipelineConfig config_a = MergeSequenceSettings(a, seq_cfgs.front());
  const PipelineConfig config_b = MergeSequenceSettings(b, seq_cfgs.front());
  std::vector<BenchSequence> sequences;
  for (size_t i = 0; i < paths.size(); ++i) {
    sequences.push_back({fs::path(paths[i]).stem().string() + "_" +
                             std::to_string(i),
                         SequenceFor(model, seq_cfgs[i])});
  }

  BenchmarkOutcome outcome =
      RunBenchmark(model, sequences, config_a, config_b, args.trials);
  outcome.a.label = "A: " + fs::path(args.config_a).filename().string();
  outcome.b.label = "B: " + fs::path(args.config_b).filename().string();
  const std::string table = FormatReport(outcome.a) + "\n" +
                            FormatReport(outcome.b, &outcome.a);
  const std::string kv = ReportKeyValues(outcome.a, "a.") +
                         ReportKeyValues(outcome.b, "b.") +
                         ComparisonKeyValues(outcome.comparison);
  WriteText(report_path, table);
  fs::path kv_path = report_path;
  kv_path += ".kv";
  WriteText(kv_path, kv);
  out << table;
  return kExitOk;
}

}  // namespace

int RunCli(int argc, const char* const* argv, std::ostream& out,
           std::ostream& err) {
  CLI::App app{"Staged biomechanics pipeline: synthesize, run, compare, bench"};
  app.name("kinepipe");
  app.require_subcommand(1);

  SynthArgs synth;
  auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic sequence");
  synth_cmd->add_option("--config", synth.config, "Sequence config (key=value)");
  synth_cmd->add_option("--out-dir", synth.out_dir, "Output directory")
      ->required();
  synth_cmd->add_option("--seed", synth.seed, "Override seed");
  synth_cmd->add_option("--frames", synth.frames, "Override frame count");
  synth_cmd->add_option("--amplitude", synth.amplitude, "Override amplitude");
  synth_cmd->add_option("--frequency", synth.frequency, "Override frequency");

  RunArgs run;
  auto* run_cmd = app.add_subcommand("run", "Run the pipeline on a sequence");
  run_cmd->add_option("--sequence", run.sequence, "Sequence descriptor")
      ->required();
  run_cmd->add_option("--config", run.config, "Pipeline config (key=value)");
  run_cmd->add_option("--mode", run.mode, "baseline | optimized");
  run_cmd->add_option("--workers", run.workers, "Worker threads");
  run_cmd->add_option("--out-dir", run.out_dir, "Output directory")->required();

  CompareArgs compare;
  auto* compare_cmd =
      app.add_subcommand("compare", "Consistency report for two outputs");
  compare_cmd->add_option("--traj-a", compare.traj_a)->required();
  compare_cmd->add_option("--traj-b", compare.traj_b)->required();
  compare_cmd->add_option("--pos-a", compare.pos_a)->required();
  compare_cmd->add_option("--pos-b", compare.pos_b)->required();
  compare_cmd->add_option("--out", compare.out_file, "Write the report here");
  compare_cmd->add_option("--plot-out", compare.plot_out,
                          "Bland-Altman plot data CSV");

  BenchArgs bench;
  auto* bench_cmd = app.add_subcommand("bench", "Benchmark two configurations");
  bench_cmd->add_option("--trials", bench.trials, "Timed trials per config")
      ->capture_default_str();
  bench_cmd->add_option("--sequences", bench.sequences,
                        "Comma-separated sequence descriptors")
      ->required();
  bench_cmd->add_option("--config-a", bench.config_a, "Reference config")
      ->required();
  bench_cmd->add_option("--config-b", bench.config_b, "Measured config")
      ->required();
  bench_cmd->add_option("--report-out", bench.report_out,
                        "Report path (key=value copy at <path>.kv)")
      ->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "kinepipe: usage error: " << OneLine(e.what()) << "\n";
    return kExitUsage;
  }

  try {
    if (synth_cmd->parsed()) return CmdSynth(synth, out);
    if (run_cmd->parsed()) return CmdRun(run, out);
    if (compare_cmd->parsed()) return CmdCompare(compare, out);
    if (bench_cmd->parsed()) return CmdBench(bench, out);
  } catch (const UsageError& e) {
    err << "kinepipe: usage error: " << OneLine(e.what()) << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "kinepipe: error: " << OneLine(e.what()) << "\n";
    return kExitFailure;
  }
  err << "kinepipe: usage error: no subcommand\n";
  return kExitUsage;
}

}  // namespace kinepipe
