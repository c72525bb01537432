// include/mcmixit/cli/commands.h

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

#ifndef MCMIXIT_CLI_COMMANDS_H_
#define MCMIXIT_CLI_COMMANDS_H_

#include <iosfwd>
#include <string>
#include <vector>

#include "mcmixit/cli/config.h"
#include "mcmixit/model/network.h"
#include "mcmixit/signal.h"
#include "mcmixit/synth/dataset.h"

namespace mcmixit {

struct SynthArgs {
  RunConfig config;
  std::string out_dir;
  ExampleKind kind = ExampleKind::kUnsupervisedMom;
  Split split = Split::kTrain;
  uint64_t examples = 100;
  uint64_t first_index = 0;
};

// Writes one shard (WAVs + manifest.jsonl) and prints the count.
int CmdSynth(const SynthArgs& args, std::ostream& out);

struct TrainArgs {
  RunConfig config;
  std::string run_dir;
};

// Runs (or resumes) a training loop in run_dir.
int CmdTrain(const TrainArgs& args, std::ostream& out);

struct EvalArgs {
  RunConfig config;
  std::string checkpoint_path;
  std::string data_dir;  // optional shard dir; empty synthesizes on the fly
  ExampleKind kind = ExampleKind::kSupervisedMixed;
  std::vector<Split> splits = {Split::kTest};
  std::vector<int> mics;  // cross-eval mic counts; empty uses the dataset's
  int64_t examples = 32;
  bool oracle_remix = false;
  std::string json_path;  // optional machine-readable copy on disk
};

// Prints a cross-eval table plus per-combination detail, then one compact
// JSON line (always machine-readable on stdout).
int CmdEval(const EvalArgs& args, std::ostream& out);

struct SeparateArgs {
  std::string checkpoint_path;
  std::string input_path;
  std::string out_dir;
  int num_outputs = 0;  // 0 uses the model's M; anything else must equal it
  double block_seconds = 10.0;
};

// Separates one WAV into M float32 WAVs (block-wise for long inputs).
int CmdSeparate(const SeparateArgs& args, std::ostream& out);

// Block-wise inference with crossfaded overlaps; estimate order is aligned
// across block seams so each output track stays one source.  The outputs sum
// to the input exactly (mixture consistency survives convex blending).
EstimateSet SeparateSignal(const ModelParams& params, const MultiChannelSignal& input,
                           double block_seconds);

}  // namespace mcmixit

#endif  // MCMIXIT_CLI_COMMANDS_H_
