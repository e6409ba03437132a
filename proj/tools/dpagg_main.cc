// Copyright 2026 The Dpagg Authors
//
// Use of this source code is governed by an Apache-2.0 license that can be
// found in the LICENSE file.
//
// dpagg: user-level differentially private count/sum aggregation with three
// pipeline layouts (naive, fast, plume), plus dataset generators, an exact
// baseline, error metrics, and an L-sweep harness.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "dpagg/datagen.h"
#include "dpagg/error.h"
#include "dpagg/evaluate.h"
#include "dpagg/model.h"
#include "dpagg/pipelines.h"

namespace dpagg {
namespace {

constexpr const char* kStatsHeader =
    "pipeline,n_records,n_users,retained_keys,shuffle_stages,"
    "shuffled_records,lookup_probes,wall_ms";

void WriteStatsCsv(const std::string& path, const std::string& pipeline,
                   const PipelineReport& report) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open output file: " + path);
  out << kStatsHeader << '\n'
      << pipeline << ',' << report.n_records << ',' << report.n_users << ','
      << report.retained << ',' << report.stats.shuffle_stages << ','
      << report.stats.shuffled_records << ',' << report.stats.lookup_probes
      << ',' << report.wall_ms << '\n';
  if (!out) throw IoError("write failure on " + path);
}

void WriteMetricsCsv(const std::string& path, const std::string& mode,
                     size_t keys, double abs_error, bool have_rel,
                     double rel_error) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open output file: " + path);
  out << "mode,keys,abs_error,rel_error\n" << mode << ',' << keys << ','
      << FormatValue(abs_error) << ',';
  if (have_rel) out << FormatValue(rel_error);
  out << '\n';
  if (!out) throw IoError("write failure on " + path);
}

struct RunFlags {
  std::string input;
  std::string mechanism;
  double clamp = 0.0;
  bool clamp_set = false;
  double clamp_low = 0.0;
  double epsilon = 0.0;
  double delta = 0.0;
  int64_t l_bound = 1;
  double selection_fraction = 0.5;
  int workers = 0;
  size_t lookup_cutoff = 100'000;
  bool debug_no_noise = false;
  uint64_t seed = 0;
};

// Registers the flags shared by `run` and `sweep-l`. `with_l_bound` is off
// for sweeps, where L comes from --l-values.
void AddRunFlags(CLI::App* cmd, RunFlags& flags, bool with_l_bound) {
  cmd->add_option("--input", flags.input, "input TSV (user<TAB>key<TAB>value)")
      ->required();
  cmd->add_option("--mechanism", flags.mechanism, "aggregation mechanism")
      ->required()
      ->check(CLI::IsMember({"count", "sum"}));
  cmd->add_option("--clamp", flags.clamp,
                  "sum clamp ceiling C (required for sum)")
      ->each([&flags](const std::string&) { flags.clamp_set = true; });
  cmd->add_option("--clamp-low", flags.clamp_low,
                  "sum clamp floor (default 0)");
  cmd->add_option("--epsilon", flags.epsilon, "total privacy epsilon")
      ->required();
  cmd->add_option("--delta", flags.delta, "total privacy delta")->required();
  if (with_l_bound) {
    cmd->add_option("--l-bound", flags.l_bound,
                    "max distinct keys per user (L)")
        ->required();
  }
  cmd->add_option("--selection-fraction", flags.selection_fraction,
                  "epsilon share spent on key selection")
      ->capture_default_str();
  cmd->add_option("--workers", flags.workers,
                  "worker threads (default: machine parallelism)");
  cmd->add_option("--lookup-cutoff", flags.lookup_cutoff,
                  "max |S| for a broadcast lookup table")
      ->capture_default_str();
  cmd->add_flag("--debug-no-noise", flags.debug_no_noise,
                "disable all noise and retain every key (NOT private)");
  cmd->add_option("--seed", flags.seed, "global PRF seed")->required();
}

MechanismSpec MakeMechanism(const RunFlags& flags) {
  if (flags.mechanism == "count") {
    if (flags.clamp_set) {
      throw InvalidParameter("--clamp applies to the sum mechanism only");
    }
    return MakeCountSpec();
  }
  if (!flags.clamp_set) {
    throw InvalidParameter("the sum mechanism requires --clamp");
  }
  return MakeSumSpec(flags.clamp, flags.clamp_low);
}

PipelineConfig MakeConfig(const RunFlags& flags) {
  PipelineConfig config;
  config.mechanism = MakeMechanism(flags);
  config.epsilon = flags.epsilon;
  config.delta = flags.delta;
  config.l_bound = flags.l_bound;
  config.selection_fraction = flags.selection_fraction;
  config.workers = flags.workers;
  config.lookup_cutoff = flags.lookup_cutoff;
  config.debug_no_noise = flags.debug_no_noise;
  config.seed = flags.seed;
  return config;
}

int Main(int argc, char** argv) {
  CLI::App app{
      "user-level differentially private aggregation: naive (5 shuffles), "
      "fast (2), and plume (3) pipelines over an in-process "
      "map/shuffle/reduce engine"};
  app.require_subcommand(1);

  // gen-synth ---------------------------------------------------------
  auto* gen_synth = app.add_subcommand(
      "gen-synth", "generate the heavy-tailed synthetic workload");
  int64_t users = 0;
  uint64_t gen_seed = 0;
  std::string out_path;
  gen_synth->add_option("--users", users, "number of users")->required();
  gen_synth->add_option("--seed", gen_seed, "generator seed")->required();
  gen_synth->add_option("--out", out_path, "output TSV")->required();
  gen_synth->callback(
      [&] { WriteTsv(out_path, GenSynth(users, gen_seed)); });

  // gen-landmark ------------------------------------------------------
  auto* gen_landmark = app.add_subcommand(
      "gen-landmark", "generate the two-location toy workload");
  gen_landmark->add_option("--users", users, "number of users")->required();
  gen_landmark->add_option("--seed", gen_seed, "generator seed")->required();
  gen_landmark->add_option("--out", out_path, "output TSV")->required();
  gen_landmark->callback(
      [&] { WriteTsv(out_path, GenLandmark(users, gen_seed)); });

  // ingest ------------------------------------------------------------
  auto* ingest = app.add_subcommand(
      "ingest", "turn a `user<TAB>free text` corpus into word counts");
  std::string in_path;
  ingest->add_option("--in", in_path, "input corpus")->required();
  ingest->add_option("--out", out_path, "output TSV")->required();
  ingest->callback([&] { WriteTsv(out_path, IngestCorpus(in_path)); });

  // run ---------------------------------------------------------------
  auto* run = app.add_subcommand("run", "run one pipeline over a dataset");
  RunFlags run_flags;
  std::string pipeline;
  std::string stats_path;
  run->add_option("--pipeline", pipeline, "pipeline to execute")
      ->required()
      ->check(CLI::IsMember({"naive", "fast", "plume", "exact"}));
  AddRunFlags(run, run_flags, /*with_l_bound=*/true);
  run->add_option("--out", out_path, "result CSV (key,value)")->required();
  run->add_option("--stats", stats_path, "stats CSV")->required();
  run->callback([&] {
    const Dataset dataset = ReadTsv(run_flags.input);
    PipelineReport report;
    if (pipeline == "exact") {
      report = RunExact(dataset, MakeMechanism(run_flags));
    } else {
      const PipelineConfig config = MakeConfig(run_flags);
      report = pipeline == "naive"  ? RunNaive(dataset, config)
               : pipeline == "fast" ? RunFast(dataset, config)
                                    : RunPlume(dataset, config);
    }
    WriteResultCsv(out_path, report.outputs);
    WriteStatsCsv(stats_path, pipeline, report);
    std::cout << pipeline << ": " << report.retained << " keys, "
              << report.stats.shuffle_stages << " shuffles, "
              << report.stats.shuffled_records << " shuffled records, "
              << report.stats.lookup_probes << " lookup probes ("
              << (report.retained <= static_cast<int64_t>(
                                         run_flags.lookup_cutoff)
                      ? "broadcast"
                      : "shared-table")
              << " mode), " << report.wall_ms << " ms\n";
  });

  // eval ----------------------------------------------------------------
  auto* eval = app.add_subcommand(
      "eval", "compare a DP result CSV against an exact result CSV");
  std::string dp_path;
  std::string exact_path;
  std::string mode;
  eval->add_option("--dp", dp_path, "DP result CSV")->required();
  eval->add_option("--exact", exact_path, "exact result CSV")->required();
  eval->add_option("--mode", mode, "retained: over DP keys; all: over exact")
      ->required()
      ->check(CLI::IsMember({"retained", "all"}));
  eval->add_option("--out", out_path, "metrics CSV")->required();
  eval->callback([&] {
    const std::map<Key, double> dp = ReadResultCsv(dp_path);
    const std::map<Key, double> exact = ReadResultCsv(exact_path);
    if (mode == "retained") {
      const double abs = AbsoluteError(dp, exact, ErrorMode::kRetained);
      const double rel = RelativeError(dp, exact);
      WriteMetricsCsv(out_path, mode, dp.size(), abs, true, rel);
    } else {
      const double abs = AbsoluteError(dp, exact, ErrorMode::kAll);
      WriteMetricsCsv(out_path, mode, exact.size(), abs, false, 0.0);
    }
  });

  // sweep-l -------------------------------------------------------------
  auto* sweep = app.add_subcommand(
      "sweep-l", "run naive, fast, and plume across a list of L values");
  RunFlags sweep_flags;
  std::vector<int64_t> l_values;
  std::vector<uint64_t> seeds;
  sweep->add_option("--l-values", l_values, "comma-separated L values")
      ->required()
      ->delimiter(',');
  AddRunFlags(sweep, sweep_flags, /*with_l_bound=*/false);
  sweep->add_option("--seeds", seeds,
                    "comma-separated seeds; adds per-(pipeline, L) mean and "
                    "spread rows (overrides --seed)")
      ->delimiter(',');
  sweep->get_option("--seed")->required(false);
  sweep->add_option("--out", out_path, "sweep CSV")->required();
  sweep->callback([&] {
    if (seeds.empty() && sweep->count("--seed") == 0) {
      throw InvalidParameter("either --seed or --seeds is required");
    }
    const Dataset dataset = ReadTsv(sweep_flags.input);
    const PipelineConfig base = MakeConfig(sweep_flags);
    if (seeds.empty()) seeds.push_back(sweep_flags.seed);
    const std::vector<SweepRow> rows = SweepL(dataset, base, l_values, seeds);
    WriteSweepCsv(out_path, rows, seeds.size());
    std::cout << "sweep-l: " << rows.size() << " runs over "
              << l_values.size() << " L values written to " << out_path
              << "\n"
                 "note: these metrics compare against exact aggregates, so "
                 "treat them as non-private tuning output\n";
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    // Successful --help/--version exits pass through; real parse problems
    // map onto the invalid-parameter exit code.
    return code == 0 ? 0 : static_cast<int>(ErrorCode::kInvalidParameter);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return e.exit_code();
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return static_cast<int>(ErrorCode::kContractViolation);
  }
  return 0;
}

}  // namespace
}  // namespace dpagg

int main(int argc, char** argv) { return dpagg::Main(argc, argv); }
