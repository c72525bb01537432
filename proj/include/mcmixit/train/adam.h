// include/mcmixit/train/adam.h

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

#ifndef MCMIXIT_TRAIN_ADAM_H_
#define MCMIXIT_TRAIN_ADAM_H_

#include <cstdint>
#include <vector>

#include "mcmixit/ad/tensor.h"
#include "mcmixit/model/checkpoint.h"
#include "mcmixit/model/network.h"

namespace mcmixit {

// Standard Adam with bias correction:
//   m <- b1 m + (1-b1) g;  v <- b2 v + (1-b2) g^2
//   p <- p - lr * (m / (1-b1^t)) / (sqrt(v / (1-b2^t)) + eps)
// Bound to the model's tensors at construction; Step() consumes the
// accumulated gradients and zeroes them.
class Adam {
 public:
  Adam(const ModelParams& params, double learning_rate, double beta1 = 0.9, double beta2 = 0.999,
       double epsilon = 1e-8);

  void Step();

  uint64_t step() const { return step_; }

  OptimizerSnapshot Snapshot() const;
  void Restore(const OptimizerSnapshot& snapshot);

 private:
  std::vector<ad::Tensor> tensors_;
  std::vector<std::vector<double>> m_;
  std::vector<std::vector<double>> v_;
  double lr_;
  double beta1_;
  double beta2_;
  double eps_;
  uint64_t step_ = 0;
};

}  // namespace mcmixit

#endif  // MCMIXIT_TRAIN_ADAM_H_
