// mcmixit/reference_filter.h

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

#ifndef MCMIXIT_REFERENCE_FILTER_H_
#define MCMIXIT_REFERENCE_FILTER_H_

#include <span>
#include <vector>

#include "mcmixit/signal.h"

namespace mcmixit {

struct ReferenceFilterResult {
  MultiChannelSignal filtered;   // per channel: h_c convolved with the source
  MultiChannelSignal residual;   // target - filtered, exact by construction
  std::vector<std::vector<double>> taps;  // [channel][filter_len]
};

inline constexpr int kDefaultReferenceFilterLen = 512;

// Per channel c, finds the causal FIR h_c (filter_len taps) minimizing
// ||target_c - h_c * source||^2 by normal equations with Tikhonov
// regularization lambda = 1e-6 * trace(R) / filter_len. The source history
// before t=0 is taken as zero.
ReferenceFilterResult EstimateReferenceFilter(std::span<const double> source,
                                              const MultiChannelSignal& target,
                                              int filter_len = kDefaultReferenceFilterLen);

}  // namespace mcmixit

#endif  // MCMIXIT_REFERENCE_FILTER_H_
