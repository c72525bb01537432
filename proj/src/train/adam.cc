// src/train/adam.cc

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

#include "mcmixit/train/adam.h"

#include <cmath>

namespace mcmixit {

Adam::Adam(const ModelParams& params, double learning_rate, double beta1, double beta2,
           double epsilon)
    : lr_(learning_rate), beta1_(beta1), beta2_(beta2), eps_(epsilon) {
  for (const auto& [name, tensor] : params.NamedTensors()) {
    tensors_.push_back(tensor);
    m_.emplace_back(tensor.value().size(), 0.0);
    v_.emplace_back(tensor.value().size(), 0.0);
  }
}

void Adam::Step() {
  ++step_;
  const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(step_));
  const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(step_));
  for (size_t i = 0; i < tensors_.size(); ++i) {
    auto& t = tensors_[i];
    auto& value = t.value();
    auto& grad = t.grad();
    auto& m = m_[i];
    auto& v = v_[i];
    for (size_t j = 0; j < value.size(); ++j) {
      const double g = grad[j];
      m[j] = beta1_ * m[j] + (1.0 - beta1_) * g;
      v[j] = beta2_ * v[j] + (1.0 - beta2_) * g * g;
      const double mhat = m[j] / bc1;
      const double vhat = v[j] / bc2;
      value[j] -= lr_ * mhat / (std::sqrt(vhat) + eps_);
      grad[j] = 0.0;
    }
  }
}

OptimizerSnapshot Adam::Snapshot() const {
  OptimizerSnapshot s;
  s.step = step_;
  s.first_moment = m_;
  s.second_moment = v_;
  return s;
}

void Adam::Restore(const OptimizerSnapshot& snapshot) {
  if (snapshot.first_moment.size() != m_.size() || snapshot.second_moment.size() != v_.size()) {
    throw CheckpointError("optimizer snapshot does not match parameter list");
  }
  for (size_t i = 0; i < m_.size(); ++i) {
    if (snapshot.first_moment[i].size() != m_[i].size() ||
        snapshot.second_moment[i].size() != v_[i].size()) {
      throw CheckpointError("optimizer snapshot tensor size mismatch");
    }
  }
  m_ = snapshot.first_moment;
  v_ = snapshot.second_moment;
  step_ = snapshot.step;
}

}  // namespace mcmixit
