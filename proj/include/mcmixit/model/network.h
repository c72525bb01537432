// include/mcmixit/model/network.h

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

#ifndef MCMIXIT_MODEL_NETWORK_H_
#define MCMIXIT_MODEL_NETWORK_H_

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "mcmixit/ad/tensor.h"
#include "mcmixit/model/config.h"
#include "mcmixit/signal.h"

namespace mcmixit {

struct TcnBlockParams {
  ad::Tensor expand_w;   // [H, K]
  ad::Tensor expand_b;   // [H]
  ad::Tensor conv_taps;  // [H, kernel]
  ad::Tensor norm_scale; // [H]
  ad::Tensor norm_bias;  // [H]
  ad::Tensor project_w;  // [K, H]
  ad::Tensor project_b;  // [K]
};

struct TacParams {
  ad::Tensor transform_w;  // [tac, K]
  ad::Tensor transform_b;  // [tac]
  ad::Tensor average_w;    // [tac, K]
  ad::Tensor average_b;    // [tac]
  ad::Tensor project_w;    // [K, 2*tac]
  ad::Tensor project_b;    // [K]
};

struct MaskHeadParams {
  ad::Tensor w;  // [F, K]
  ad::Tensor b;  // [F]
};

// All learnable tensors.  Copies share the underlying nodes, so a copy sees
// the same values and gradients; independent storage comes from InitParams
// or a checkpoint round-trip.
struct ModelParams {
  ModelConfig config;
  ad::Tensor encoder;       // [F, window]
  ad::Tensor bottleneck_w;  // [K, F]
  ad::Tensor bottleneck_b;  // [K]
  std::vector<std::vector<TcnBlockParams>> blocks;  // [superblock][block]
  std::vector<TacParams> tacs;                      // [superblock]
  std::vector<MaskHeadParams> masks;                // [output]
  ad::Tensor decoder;  // [window, F]
  // When set, TAC layers pass features through untouched and the network is
  // C independent single-channel stacks.  Tensor shapes are unaffected.
  bool tac_bypassed = false;

  // Fixed traversal order used by the optimizer and the checkpoint format.
  std::vector<std::pair<std::string, ad::Tensor>> NamedTensors() const;
  int64_t ParameterCount() const;
};

// Glorot-uniform weights, zero biases, unit norm scales; deterministic in
// (config, seed).
ModelParams InitParams(const ModelConfig& config, uint64_t seed);

// Same config and tensor shapes with TAC layers bypassed.  Shares storage.
ModelParams RemoveTac(const ModelParams& params);

// Framing + linear bases + ReLU for one channel; x is a [T] tensor.
ad::Tensor Encode(const ad::Tensor& x, const ModelParams& params);

// Eq. 1 with a shared 2*tac -> K projection and residual add.  One entry per
// channel, each [K, L].
std::vector<ad::Tensor> TacLayer(const std::vector<ad::Tensor>& features, const TacParams& tac);

struct ForwardResult {
  // waveforms[m][c] is a [T] tensor, after mixture consistency.
  std::vector<std::vector<ad::Tensor>> waveforms;
  int64_t samples = 0;
  int sample_rate = 0;

  EstimateSet ToEstimateSet() const;
};

// Runs the separator on a C-channel signal, returning M per-channel graphs.
// Estimates satisfy sum_m s_m = x per channel by construction.
ForwardResult Forward(const MultiChannelSignal& signal, const ModelParams& params);

}  // namespace mcmixit

#endif  // MCMIXIT_MODEL_NETWORK_H_
