// src/cli/commands.cc

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

#include "mcmixit/cli/commands.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"
#include "mcmixit/ad/tensor.h"
#include "mcmixit/model/checkpoint.h"
#include "mcmixit/synth/scene.h"
#include "mcmixit/train/trainer.h"
#include "mcmixit/wav.h"

namespace mcmixit {

namespace fs = std::filesystem;

namespace {

MultiChannelSignal SliceFrames(const MultiChannelSignal& in, int64_t start, int64_t end) {
  MultiChannelSignal out(end - start, in.num_channels(), in.sample_rate());
  for (int c = 0; c < in.num_channels(); ++c) {
    auto src = in.channel(c);
    auto dst = out.channel(c);
    std::copy(src.begin() + start, src.begin() + end, dst.begin());
  }
  return out;
}

MultiChannelSignal SliceChannels(const MultiChannelSignal& in, int mics) {
  MultiChannelSignal out(in.num_frames(), mics, in.sample_rate());
  for (int c = 0; c < mics; ++c) {
    auto src = in.channel(c);
    std::copy(src.begin(), src.end(), out.channel(c).begin());
  }
  return out;
}

TrainingExample SliceExampleChannels(const TrainingExample& ex, int mics) {
  if (mics == ex.input.num_channels()) return ex;
  TrainingExample out = ex;
  out.input = SliceChannels(ex.input, mics);
  EstimateSet refs(ex.references.num_frames(), mics, ex.references.num_members(),
                   ex.references.sample_rate());
  for (int n = 0; n < ex.references.num_members(); ++n) {
    for (int c = 0; c < mics; ++c) {
      auto src = ex.references.channel(n, c);
      std::copy(src.begin(), src.end(), refs.channel(n, c).begin());
    }
  }
  out.references = std::move(refs);
  return out;
}

// Best permutation of the new block's estimates against the running output
// over the overlap window, by total cross-correlation.  Exhaustive for
// M <= 8; greedy beyond that (seam alignment only, never a loss).
std::vector<int> AlignPermutation(const std::vector<std::vector<double>>& score) {
  const int m = static_cast<int>(score.size());
  if (m <= 8) {
    std::vector<int> perm(m);
    std::iota(perm.begin(), perm.end(), 0);
    std::vector<int> best = perm;
    double best_total = -std::numeric_limits<double>::infinity();
    do {
      double total = 0.0;
      for (int i = 0; i < m; ++i) total += score[static_cast<size_t>(i)][static_cast<size_t>(perm[static_cast<size_t>(i)])];
      if (total > best_total) {
        best_total = total;
        best = perm;
      }
    } while (std::next_permutation(perm.begin(), perm.end()));
    return best;
  }
  std::vector<int> out(static_cast<size_t>(m), -1);
  std::vector<bool> used(static_cast<size_t>(m), false);
  for (int round = 0; round < m; ++round) {
    int bi = -1, bj = -1;
    double best = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < m; ++i) {
      if (out[static_cast<size_t>(i)] >= 0) continue;
      for (int j = 0; j < m; ++j) {
        if (used[static_cast<size_t>(j)]) continue;
        if (score[static_cast<size_t>(i)][static_cast<size_t>(j)] > best) {
          best = score[static_cast<size_t>(i)][static_cast<size_t>(j)];
          bi = i;
          bj = j;
        }
      }
    }
    out[static_cast<size_t>(bi)] = bj;
    used[static_cast<size_t>(bj)] = true;
  }
  return out;
}

EstimateSet ForwardBlock(const ModelParams& params, const MultiChannelSignal& block) {
  ad::NoGradGuard no_grad;
  return Forward(block, params).ToEstimateSet();
}

nlohmann::json ReportToJson(const EvalReport& report, Split split, ExampleKind kind) {
  nlohmann::json j;
  j["split"] = SplitName(split);
  j["kind"] = ExampleKindName(kind);
  j["mics"] = report.mics;
  j["examples"] = report.examples;
  j["mean_si_snri"] = report.mean_si_snri;
  j["per_source_si_snri"] = report.per_source_si_snri;
  j["per_source_count"] = report.per_source_count;
  j["skipped_references"] = report.skipped_references;
  j["mean_assignment_loss"] = report.mean_assignment_loss;
  return j;
}

}  // namespace

int CmdSynth(const SynthArgs& args, std::ostream& out) {
  if (args.out_dir.empty()) throw ConfigError("synth: --out is required");
  DatasetStream stream(args.config.data, args.kind, args.split);
  WriteShard(args.out_dir, stream, args.first_index, args.examples);
  out << "wrote " << args.examples << " " << ExampleKindName(args.kind) << " examples ("
      << SplitName(args.split) << " split, " << args.config.data.mics << " mics, seed "
      << args.config.data.seed << ") to " << args.out_dir << "\n";
  return 0;
}

int CmdTrain(const TrainArgs& args, std::ostream& out) {
  if (args.run_dir.empty()) throw ConfigError("train: --run-dir is required");
  TrainerOptions options;
  options.run_dir = args.run_dir;
  options.checkpoint_interval = args.config.checkpoint_interval;
  options.seed = args.config.seed;
  Trainer trainer(args.config.model, args.config.train, args.config.data, options);
  const int64_t reached = trainer.Run();
  out << "trained to step " << reached << " (" << TrainModeName(args.config.train.mode) << ")\n";
  out << "checkpoint: " << trainer.CheckpointPath() << "\n";
  out << "metrics: " << trainer.MetricsPath() << "\n";
  return 0;
}

int CmdEval(const EvalArgs& args, std::ostream& out) {
  if (args.checkpoint_path.empty()) throw ConfigError("eval: --checkpoint is required");
  const Checkpoint ck = LoadCheckpoint(args.checkpoint_path);

  EvalOptions options;
  options.num_examples = args.examples;
  options.oracle_remix = args.oracle_remix;

  std::vector<TrainingExample> shard;
  if (!args.data_dir.empty()) shard = ReadShard(args.data_dir);
  const int native_mics = !args.data_dir.empty()
                              ? (shard.empty() ? 0 : shard.front().input.num_channels())
                              : args.config.data.mics;
  std::vector<int> mic_counts = args.mics;
  if (mic_counts.empty()) mic_counts.push_back(native_mics);
  for (int mics : mic_counts) {
    if (mics < 1) throw ConfigError("eval: --mics entries must be >= 1");
    if (mics > native_mics) {
      throw SynthError("eval: dataset has " + std::to_string(native_mics) + " mics, " +
                       std::to_string(mics) + " requested");
    }
  }

  struct Row {
    Split split;
    int mics;
    EvalReport report;
  };
  std::vector<Row> rows;
  for (Split split : args.splits) {
    for (int mics : mic_counts) {
      EvalReport report;
      if (!args.data_dir.empty()) {
        std::vector<TrainingExample> sliced;
        sliced.reserve(shard.size());
        for (const auto& ex : shard) sliced.push_back(SliceExampleChannels(ex, mics));
        report = EvaluateExamples(ck.params, sliced, options);
      } else if (mics == native_mics) {
        DatasetStream stream(args.config.data, args.kind, split);
        report = Evaluate(ck.params, stream, options);
      } else {
        DatasetStream stream(args.config.data, args.kind, split);
        std::vector<TrainingExample> sliced;
        sliced.reserve(static_cast<size_t>(options.num_examples));
        for (int64_t i = 0; i < options.num_examples; ++i) {
          sliced.push_back(SliceExampleChannels(stream.Example(static_cast<uint64_t>(i)), mics));
        }
        report = EvaluateExamples(ck.params, sliced, options);
      }
      rows.push_back(Row{split, mics, std::move(report)});
    }
    if (!args.data_dir.empty()) break;  // shards carry no split axis
  }

  out << "cross-evaluation:\n";
  char line[160];
  std::snprintf(line, sizeof line, "  %-10s %5s %9s %16s %9s\n", "split", "mics", "examples",
                "mean SI-SNRi", "skipped");
  out << line;
  for (const auto& row : rows) {
    std::snprintf(line, sizeof line, "  %-10s %5d %9lld %13.3f dB %9lld\n",
                  args.data_dir.empty() ? SplitName(row.split) : "shard", row.mics,
                  static_cast<long long>(row.report.examples), row.report.mean_si_snri,
                  static_cast<long long>(row.report.skipped_references));
    out << line;
  }
  for (const auto& row : rows) {
    out << "\n[" << (args.data_dir.empty() ? SplitName(row.split) : args.data_dir)
        << ", mics=" << row.mics << "]\n"
        << row.report.ToText();
  }

  nlohmann::json j = nlohmann::json::array();
  for (const auto& row : rows) j.push_back(ReportToJson(row.report, row.split, args.kind));
  out << "\n" << j.dump() << "\n";
  if (!args.json_path.empty()) {
    std::ofstream file(args.json_path);
    if (!file) throw SynthError("eval: cannot write " + args.json_path);
    file << j.dump(2) << "\n";
  }
  return 0;
}

EstimateSet SeparateSignal(const ModelParams& params, const MultiChannelSignal& input,
                           double block_seconds) {
  const int64_t t = input.num_frames();
  const int c = input.num_channels();
  const int m = params.config.num_outputs;
  const int window = params.config.window;
  if (t < window) throw SignalError("separate: input shorter than the model window");
  if (block_seconds <= 0.0) throw ConfigError("separate: block seconds must be > 0");

  int64_t block_len =
      std::max<int64_t>(static_cast<int64_t>(std::llround(block_seconds * input.sample_rate())),
                        2 * static_cast<int64_t>(window));
  if (block_len >= t) return ForwardBlock(params, input);

  const int64_t overlap = std::max<int64_t>(block_len / 4, window);
  const int64_t advance = block_len - overlap;

  EstimateSet out(t, c, m, input.sample_rate());
  int64_t covered = 0;  // frames finalized so far
  int64_t start = 0;
  while (covered < t) {
    const int64_t end = std::min<int64_t>(start + block_len, t);
    const EstimateSet block = ForwardBlock(params, SliceFrames(input, start, end));
    std::vector<int> perm(static_cast<size_t>(m));
    std::iota(perm.begin(), perm.end(), 0);
    const int64_t ov = covered - start;  // frames shared with finalized output
    if (ov > 0) {
      std::vector<std::vector<double>> score(static_cast<size_t>(m),
                                             std::vector<double>(static_cast<size_t>(m), 0.0));
      for (int mn = 0; mn < m; ++mn) {
        for (int mo = 0; mo < m; ++mo) {
          double s = 0.0;
          for (int ch = 0; ch < c; ++ch) {
            auto fresh = block.channel(mn, ch);
            auto fixed = out.channel(mo, ch);
            for (int64_t i = 0; i < ov; ++i) {
              s += fresh[static_cast<size_t>(i)] * fixed[static_cast<size_t>(start + i)];
            }
          }
          score[static_cast<size_t>(mn)][static_cast<size_t>(mo)] = s;
        }
      }
      perm = AlignPermutation(score);
    }
    for (int mn = 0; mn < m; ++mn) {
      const int mo = perm[static_cast<size_t>(mn)];
      for (int ch = 0; ch < c; ++ch) {
        auto fresh = block.channel(mn, ch);
        auto fixed = out.channel(mo, ch);
        for (int64_t i = 0; i < end - start; ++i) {
          const int64_t pos = start + i;
          if (pos < covered) {
            // Linear crossfade; both sides sum to the input, so any convex
            // blend preserves mixture consistency.
            const double w = static_cast<double>(i + 1) / static_cast<double>(ov + 1);
            fixed[static_cast<size_t>(pos)] =
                (1.0 - w) * fixed[static_cast<size_t>(pos)] + w * fresh[static_cast<size_t>(i)];
          } else {
            fixed[static_cast<size_t>(pos)] = fresh[static_cast<size_t>(i)];
          }
        }
      }
    }
    covered = end;
    start += advance;
  }
  return out;
}

int CmdSeparate(const SeparateArgs& args, std::ostream& out) {
  if (args.checkpoint_path.empty()) throw ConfigError("separate: --checkpoint is required");
  if (args.input_path.empty()) throw ConfigError("separate: --input is required");
  if (args.out_dir.empty()) throw ConfigError("separate: --out is required");
  const Checkpoint ck = LoadCheckpoint(args.checkpoint_path);
  const int m = ck.params.config.num_outputs;
  if (args.num_outputs != 0 && args.num_outputs != m) {
    throw ConfigError("separate: model produces " + std::to_string(m) +
                      " outputs; pass --outputs " + std::to_string(m) + " or omit it");
  }
  const MultiChannelSignal input = ReadWav(args.input_path);
  const EstimateSet estimates = SeparateSignal(ck.params, input, args.block_seconds);

  fs::create_directories(args.out_dir);
  double worst = 0.0;
  double input_peak = 0.0;
  for (int c = 0; c < input.num_channels(); ++c) {
    for (double v : input.channel(c)) input_peak = std::max(input_peak, std::abs(v));
    auto mix = input.channel(c);
    for (int64_t i = 0; i < input.num_frames(); ++i) {
      double sum = 0.0;
      for (int mm = 0; mm < m; ++mm) sum += estimates.channel(mm, c)[static_cast<size_t>(i)];
      worst = std::max(worst, std::abs(sum - mix[static_cast<size_t>(i)]));
    }
  }
  for (int mm = 0; mm < m; ++mm) {
    char name[32];
    std::snprintf(name, sizeof name, "source%02d.wav", mm + 1);
    const std::string path = (fs::path(args.out_dir) / name).string();
    WriteWav(path, estimates.member(mm), WavEncoding::kFloat32);
    out << "wrote " << path << "\n";
  }
  out << "outputs: " << m << "  channels: " << input.num_channels() << "  frames: "
      << input.num_frames() << "\n";
  out << "reconstruction error: " << (input_peak > 0.0 ? worst / input_peak : worst)
      << " (relative to input peak)\n";
  return 0;
}

}  // namespace mcmixit
