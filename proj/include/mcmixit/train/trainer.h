// include/mcmixit/train/trainer.h

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

#ifndef MCMIXIT_TRAIN_TRAINER_H_
#define MCMIXIT_TRAIN_TRAINER_H_

#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "mcmixit/assignment.h"
#include "mcmixit/model/checkpoint.h"
#include "mcmixit/model/network.h"
#include "mcmixit/synth/dataset.h"
#include "mcmixit/train/adam.h"

namespace mcmixit {

class TrainingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct TrainConfig {
  enum class Mode { kSupervised, kUnsupervised, kSemi };

  Mode mode = Mode::kUnsupervised;
  double learning_rate = 3e-4;
  int batch_size = 8;  // desk-scale default; the reference setup uses 256
  int64_t steps = 10000;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  double semi_mix_ratio = 0.5;  // fraction of each batch that is supervised
  std::string warm_start_path;
  int precision = 64;  // only 64-bit is supported
  ExampleKind supervised_kind = ExampleKind::kSupervisedFiltered;

  void Check() const;
};

const char* TrainModeName(TrainConfig::Mode mode);
TrainConfig::Mode ParseTrainMode(const std::string& name);

struct StepMetrics {
  int64_t step = 0;
  double loss = 0.0;  // batch mean
  // Per-kind means; NaN when the batch holds no example of that kind.
  double supervised_loss = std::numeric_limits<double>::quiet_NaN();
  double unsupervised_loss = std::numeric_limits<double>::quiet_NaN();
  double grad_norm = 0.0;
  double wall_ms = 0.0;
};

// Differentiable copy of the assignment loss at a fixed mixing matrix,
// mirroring the search's silence-skip rules term for term.  One term per
// non-silent (reference, channel) pair against the sum of assigned estimates,
// which covers MixIT, MC-MixIT, and PIT matrices alike.
ad::Tensor AssignmentLossGraph(const ForwardResult& forward, const EstimateSet& references,
                               const MixingMatrix& matrix, const LossConfig& config = {});

// One optimization step: per-example forward, assignment search on the
// detached estimates, loss graph through the chosen matrix, backward on the
// batch mean, Adam update.  Throws NumericalError naming the offending
// example on a non-finite loss or gradient.
StepMetrics TrainStep(ModelParams& params, Adam& adam, const std::vector<TrainingExample>& batch,
                      const TrainConfig& config);

struct EvalOptions {
  int64_t num_examples = 32;
  // Default scores each reference against its best single estimate; the
  // alternative remixes estimates by the oracle assignment first.
  bool oracle_remix = false;
  LossConfig loss;
};

struct EvalReport {
  int64_t examples = 0;
  int mics = 0;
  double mean_si_snri = 0.0;
  std::vector<double> per_source_si_snri;   // by reference index
  std::vector<int64_t> per_source_count;
  int64_t skipped_references = 0;
  double mean_assignment_loss = 0.0;  // oracle (best-assignment) loss

  std::string ToText() const;
};

// SI-SNRi on channel 0 only, per reference source.  Deterministic in
// (params, stream).
EvalReport Evaluate(const ModelParams& params, const DatasetStream& stream,
                    const EvalOptions& options);

// Same report over an explicit example list (e.g. a shard read back from
// disk); options.num_examples is ignored, every example counts.
EvalReport EvaluateExamples(const ModelParams& params,
                            const std::vector<TrainingExample>& examples,
                            const EvalOptions& options);

struct TrainerOptions {
  std::string run_dir;
  int64_t checkpoint_interval = 1000;
  uint64_t seed = 1;  // parameter init + trainer RNG
};

// Full training loop: lock file, warm start or resume, per-step metrics
// JSONL, periodic + final checkpoints.  Resuming from the checkpoint
// reproduces the uninterrupted trajectory bit for bit.
class Trainer {
 public:
  Trainer(const ModelConfig& model_config, const TrainConfig& train_config,
          const DataConfig& data_config, const TrainerOptions& options);

  // Returns the step reached (== train_config.steps on success).
  int64_t Run();

  const ModelParams& params() const { return params_; }
  std::string CheckpointPath() const;
  std::string MetricsPath() const;

 private:
  std::vector<TrainingExample> AssembleBatch();
  void SaveState();

  ModelConfig model_config_;
  TrainConfig train_config_;
  DataConfig data_config_;
  TrainerOptions options_;
  ModelParams params_;
  std::optional<Adam> adam_;
  std::optional<DatasetStream> unsup_stream_;
  std::optional<DatasetStream> sup_stream_;
  Rng rng_;
  int64_t step_ = 0;
  uint64_t unsup_index_ = 0;
  uint64_t sup_index_ = 0;
};

}  // namespace mcmixit

#endif  // MCMIXIT_TRAIN_TRAINER_H_
