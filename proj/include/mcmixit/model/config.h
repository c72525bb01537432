// include/mcmixit/model/config.h

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

#ifndef MCMIXIT_MODEL_CONFIG_H_
#define MCMIXIT_MODEL_CONFIG_H_

#include <stdexcept>

namespace mcmixit {

class ModelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Architecture hyperparameters.  The network never stores the channel count:
// one instance runs on any number of microphones.
struct ModelConfig {
  int num_superblocks = 4;
  int blocks_per_superblock = 8;
  int kernel_width = 3;
  int window = 64;  // samples
  int hop = 32;     // samples
  int bottleneck_dim = 128;  // K
  int conv_channels = 512;   // H
  int tac_dim = 128;
  int num_outputs = 8;     // M
  int encoder_bases = 128;  // F

  // Reduced preset for desk-scale runs.
  static ModelConfig Tiny() {
    ModelConfig c;
    c.num_superblocks = 2;
    c.blocks_per_superblock = 4;
    c.bottleneck_dim = 32;
    c.conv_channels = 64;
    c.tac_dim = 32;
    c.num_outputs = 4;
    c.encoder_bases = 32;
    return c;
  }

  void Check() const {
    if (num_superblocks < 1 || blocks_per_superblock < 1 || kernel_width < 1 || window < 1 ||
        hop < 1 || bottleneck_dim < 1 || conv_channels < 1 || tac_dim < 1 || num_outputs < 1 ||
        encoder_bases < 1) {
      throw ModelError("model config: all dimensions must be >= 1");
    }
    if (window % hop != 0) throw ModelError("model config: hop must divide window");
    if (kernel_width % 2 == 0) throw ModelError("model config: kernel_width must be odd");
  }

  bool operator==(const ModelConfig&) const = default;
};

}  // namespace mcmixit

#endif  // MCMIXIT_MODEL_CONFIG_H_
