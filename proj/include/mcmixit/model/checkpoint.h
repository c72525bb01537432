// include/mcmixit/model/checkpoint.h

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

#ifndef MCMIXIT_MODEL_CHECKPOINT_H_
#define MCMIXIT_MODEL_CHECKPOINT_H_

#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "mcmixit/model/network.h"

namespace mcmixit {

class CheckpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Adam moments in ModelParams::NamedTensors() order.
struct OptimizerSnapshot {
  uint64_t step = 0;
  std::vector<std::vector<double>> first_moment;
  std::vector<std::vector<double>> second_moment;
};

// Everything the training loop needs to resume exactly.
struct TrainerSnapshot {
  uint64_t step = 0;
  uint64_t unsup_index = 0;  // next example index in the unsupervised stream
  uint64_t sup_index = 0;    // next example index in the supervised stream
  std::array<uint64_t, 4> rng_state{};
};

struct Checkpoint {
  ModelParams params;
  std::optional<OptimizerSnapshot> optimizer;
  std::optional<TrainerSnapshot> trainer;
};

// Little-endian binary container; see README for the byte layout.  Writes are
// atomic (temp file + rename).  Save -> Load -> Save round-trips
// bit-identically.
void SaveCheckpoint(const std::string& path, const Checkpoint& checkpoint);
Checkpoint LoadCheckpoint(const std::string& path);

// Copies every named tensor from the checkpoint into `target`.  The channel
// count is not a parameter dimension, so a 1-mic checkpoint loads into a run
// at any mic count.  On any missing, extra, or shape-mismatched tensor,
// throws CheckpointError whose message lists every offender.
void WarmStart(ModelParams& target, const std::string& path);

}  // namespace mcmixit

#endif  // MCMIXIT_MODEL_CHECKPOINT_H_
