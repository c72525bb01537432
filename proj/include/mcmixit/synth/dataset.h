// include/mcmixit/synth/dataset.h

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

#ifndef MCMIXIT_SYNTH_DATASET_H_
#define MCMIXIT_SYNTH_DATASET_H_

#include <cstdint>
#include <string>
#include <vector>

#include "mcmixit/reference_filter.h"
#include "mcmixit/signal.h"
#include "mcmixit/synth/scene.h"

namespace mcmixit {

enum class ExampleKind { kUnsupervisedMom, kSupervisedMixed, kSupervisedFiltered };

const char* ExampleKindName(ExampleKind kind);
ExampleKind ParseExampleKind(const std::string& name);

struct TrainingExample {
  ExampleKind kind = ExampleKind::kUnsupervisedMom;
  MultiChannelSignal input;
  EstimateSet references;  // T x C x N
  std::vector<int> source_ids;
  uint64_t seed = 0;
  std::string id;
};

// MoM: references are the two rendered scene mixtures and input is their
// exact per-channel sum.
TrainingExample MakeMom(const Scene& scene_a, const Scene& scene_b, int num_mics, int64_t samples,
                        int sample_rate);

// Same sum construction but labelled supervised; each scene must hold exactly
// one source, so the references are the (noisy) single-source array images.
TrainingExample MakeSupervisedMixed(const Scene& scene_a, const Scene& scene_b, int num_mics,
                                    int64_t samples, int sample_rate);

// Three targets: scene A's rendered mixture, the least-squares filtered
// close-talk matching scene B's render, and the filtering residual.  They
// partition the input exactly.
TrainingExample MakeSupervisedFiltered(const Scene& scene_a, const Scene& scene_b,
                                       const std::vector<double>& close_talk_b, int num_mics,
                                       int64_t samples, int sample_rate,
                                       int filter_len = kDefaultReferenceFilterLen);

struct DataConfig {
  int sample_rate = 16000;
  int mics = 2;
  int64_t unsup_samples = 160000;  // 10 s
  int64_t sup_samples = 80000;     // 5 s
  double noise_level = 0.0;        // relative RMS added per rendered scene
  bool spatial_fir = false;        // random exponentially decaying room-ish FIR
  int spatial_fir_len = 64;
  int filter_len = kDefaultReferenceFilterLen;
  uint64_t seed = 17;

  void Check() const;
};

enum class Split { kTrain = 1, kValidation = 2, kTest = 3 };

const char* SplitName(Split split);
Split ParseSplit(const std::string& name);

// Splits draw from disjoint seed ranges derived from the base seed.
uint64_t SplitSeed(uint64_t base_seed, Split split);

// Stateless, repeatable example source: Example(i) is a pure function of
// (config, kind, split, i).  Every example pairs one tone-complex source with
// one modulated-noise source at random gains and directions.
class DatasetStream {
 public:
  DatasetStream(const DataConfig& config, ExampleKind kind, Split split);

  TrainingExample Example(uint64_t index) const;

  const DataConfig& config() const { return config_; }
  ExampleKind kind() const { return kind_; }
  Split split() const { return split_; }
  int64_t example_samples() const;

 private:
  DataConfig config_;
  ExampleKind kind_;
  Split split_;
  uint64_t split_seed_;
};

// Shard export/import: one WAV per input and reference plus a JSONL manifest
// (id, kind, paths, N, C, seed per line).
void WriteShard(const std::string& out_dir, const DatasetStream& stream, uint64_t first_index,
                uint64_t count);
std::vector<TrainingExample> ReadShard(const std::string& dir);

}  // namespace mcmixit

#endif  // MCMIXIT_SYNTH_DATASET_H_
