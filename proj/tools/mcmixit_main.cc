// tools/mcmixit_main.cc

// Copyright 2026  MC-MixIT Toolkit Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Command-line front end.  Exit codes: 0 success, 1 usage/config error,
// 2 data error, 3 numerical failure.

#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "mcmixit/cli/commands.h"

namespace {

using mcmixit::ApplyConfigKey;
using mcmixit::ConfigError;
using mcmixit::LoadConfigFile;
using mcmixit::RunConfig;

// Shared --config/--set plumbing; file first, then --set pairs, then the
// typed flags the caller registered (CLI11 runs callbacks in parse order,
// so typed flags already sit in the struct when this runs).
struct ConfigFlags {
  std::string path;
  std::vector<std::string> sets;

  void Register(CLI::App* cmd) {
    cmd->add_option("--config", path, "config file ([model]/[train]/[data] sections)");
    cmd->add_option("--set", sets, "override one config key, e.g. --set model.window=64")
        ->expected(-1);
  }

  void Apply(RunConfig& config) const {
    if (!path.empty()) LoadConfigFile(config, path);
    for (const auto& pair : sets) {
      const size_t eq = pair.find('=');
      if (eq == std::string::npos) throw ConfigError("--set expects key=value, got: " + pair);
      ApplyConfigKey(config, pair.substr(0, eq), pair.substr(eq + 1));
    }
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"MC-MixIT toolkit: synthesize scenes, train separators, evaluate, separate"};
  app.require_subcommand(1);
  app.footer(mcmixit::ConfigHelpText());

  // synth
  auto* synth = app.add_subcommand("synth", "write a dataset shard (WAVs + manifest.jsonl)");
  ConfigFlags synth_cfg;
  synth_cfg.Register(synth);
  mcmixit::SynthArgs synth_args;
  std::string synth_kind = "mom";
  std::string synth_split = "train";
  uint64_t synth_seed = 0;
  int synth_mics = 0;
  synth->add_option("--out", synth_args.out_dir, "output directory")->required();
  synth->add_option("--kind", synth_kind, "mom, supervised_mixed, or supervised_filtered");
  synth->add_option("--split", synth_split, "train, validation, or test");
  synth->add_option("--examples", synth_args.examples, "number of examples to write");
  synth->add_option("--first", synth_args.first_index, "index of the first example");
  auto* synth_seed_opt = synth->add_option("--seed", synth_seed, "dataset seed (data.seed)");
  auto* synth_mics_opt = synth->add_option("--mics", synth_mics, "microphone count (data.mics)");

  // train
  auto* train = app.add_subcommand("train", "run or resume a training loop");
  ConfigFlags train_cfg;
  train_cfg.Register(train);
  mcmixit::TrainArgs train_args;
  std::string train_mode;
  std::string train_warm_start;
  int64_t train_steps = 0;
  uint64_t train_seed = 0;
  train->add_option("--run-dir", train_args.run_dir, "run directory (checkpoint + metrics)")
      ->required();
  auto* train_mode_opt =
      train->add_option("--mode", train_mode, "supervised, unsupervised, or semi");
  auto* train_steps_opt = train->add_option("--steps", train_steps, "total optimizer steps");
  auto* train_seed_opt = train->add_option("--seed", train_seed, "init + trainer seed");
  auto* train_warm_opt =
      train->add_option("--warm-start", train_warm_start, "checkpoint to initialize weights from");

  // eval
  auto* eval = app.add_subcommand("eval", "evaluate a checkpoint (SI-SNRi, cross-mic table)");
  ConfigFlags eval_cfg;
  eval_cfg.Register(eval);
  mcmixit::EvalArgs eval_args;
  std::string eval_kind = "supervised_mixed";
  std::vector<std::string> eval_splits;
  uint64_t eval_seed = 0;
  eval->add_option("--checkpoint", eval_args.checkpoint_path, "checkpoint file")->required();
  eval->add_option("--data", eval_args.data_dir, "evaluate a shard directory instead");
  eval->add_option("--kind", eval_kind, "example kind when synthesizing on the fly");
  eval->add_option("--split", eval_splits, "splits to evaluate (repeatable)")->expected(-1);
  eval->add_option("--mics", eval_args.mics, "mic counts for cross-evaluation (e.g. 1 2 4)")
      ->delimiter(',')
      ->expected(-1);
  eval->add_option("--examples", eval_args.examples, "examples per combination");
  eval->add_flag("--oracle-remix", eval_args.oracle_remix,
                 "score oracle-assigned remixes instead of best single estimates");
  eval->add_option("--json", eval_args.json_path, "also write the JSON report here");
  auto* eval_seed_opt = eval->add_option("--seed", eval_seed, "dataset seed (data.seed)");

  // separate
  auto* separate = app.add_subcommand("separate", "separate one WAV into M source WAVs");
  mcmixit::SeparateArgs sep_args;
  separate->add_option("--checkpoint", sep_args.checkpoint_path, "checkpoint file")->required();
  separate->add_option("--input", sep_args.input_path, "input WAV")->required();
  separate->add_option("--out", sep_args.out_dir, "output directory")->required();
  separate->add_option("--outputs", sep_args.num_outputs,
                       "expected source count (must match the model)");
  separate->add_option("--block-seconds", sep_args.block_seconds,
                       "block length for long inputs (overlapped stitching)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    const char* env_seed = std::getenv("MCMIXIT_SEED");
    if (synth->parsed()) {
      synth_cfg.Apply(synth_args.config);
      synth_args.kind = mcmixit::ParseExampleKind(synth_kind);
      synth_args.split = mcmixit::ParseSplit(synth_split);
      if (synth_seed_opt->count() > 0) {
        synth_args.config.data.seed = synth_seed;
        synth_args.config.data_seed_set = true;
      }
      if (synth_mics_opt->count() > 0) synth_args.config.data.mics = synth_mics;
      mcmixit::ApplySeedEnvFallback(synth_args.config, env_seed);
      synth_args.config.data.Check();
      return mcmixit::CmdSynth(synth_args, std::cout);
    }
    if (train->parsed()) {
      train_cfg.Apply(train_args.config);
      if (train_mode_opt->count() > 0) {
        train_args.config.train.mode = mcmixit::ParseTrainMode(train_mode);
      }
      if (train_steps_opt->count() > 0) train_args.config.train.steps = train_steps;
      if (train_seed_opt->count() > 0) {
        train_args.config.seed = train_seed;
        train_args.config.seed_set = true;
      }
      if (train_warm_opt->count() > 0) train_args.config.train.warm_start_path = train_warm_start;
      mcmixit::ApplySeedEnvFallback(train_args.config, env_seed);
      return mcmixit::CmdTrain(train_args, std::cout);
    }
    if (eval->parsed()) {
      eval_cfg.Apply(eval_args.config);
      eval_args.kind = mcmixit::ParseExampleKind(eval_kind);
      if (!eval_splits.empty()) {
        eval_args.splits.clear();
        for (const auto& name : eval_splits) eval_args.splits.push_back(mcmixit::ParseSplit(name));
      }
      if (eval_seed_opt->count() > 0) {
        eval_args.config.data.seed = eval_seed;
        eval_args.config.data_seed_set = true;
      }
      mcmixit::ApplySeedEnvFallback(eval_args.config, env_seed);
      eval_args.config.data.Check();
      return mcmixit::CmdEval(eval_args, std::cout);
    }
    return mcmixit::CmdSeparate(sep_args, std::cout);
  } catch (const mcmixit::NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  } catch (const mcmixit::ad::AutodiffError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const mcmixit::TrainingError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const mcmixit::ModelError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const mcmixit::SearchSpaceError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    // WavError, SynthError, CheckpointError, SignalError, filesystem: data.
    std::cerr << "data error: " << e.what() << "\n";
    return 2;
  }
}
