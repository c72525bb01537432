// mcmixit/metrics.h

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

#ifndef MCMIXIT_METRICS_H_
#define MCMIXIT_METRICS_H_

#include <span>

#include "mcmixit/signal.h"

namespace mcmixit {

struct LossConfig {
  double tau = 0.001;      // soft SNR limit; cap is 10*log10(1/tau) dB
  double epsilon = 1e-8;   // stabilizer for SI-SNR denominators
};

// Thresholded SNR in dB:
//   10*log10(||y||^2 / (||y_hat - y||^2 + tau*||y||^2)).
// Capped at 10*log10(1/tau); training losses negate this value.
// Throws DegenerateReferenceError when the reference has zero energy.
double ThresholdedSnr(std::span<const double> reference, std::span<const double> estimate,
                      const LossConfig& config = {});

// Scale-invariant SNR in dB. Both signals are mean-removed; the estimate is
// compared against its projection alpha*y with alpha = <y_hat,y>/||y||^2.
// The denominator is stabilized relative to the target energy
// (||y_hat-alpha*y||^2 + eps*||alpha*y||^2), which keeps the metric
// scale-invariant and caps perfect estimates at 10*log10(1/eps) = 80 dB.
double SiSnr(std::span<const double> reference, std::span<const double> estimate,
             const LossConfig& config = {});

// SiSnr(reference, estimate) - SiSnr(reference, mixture).
double SiSnrImprovement(std::span<const double> reference, std::span<const double> estimate,
                        std::span<const double> mixture, const LossConfig& config = {});

// Projects estimates onto the set summing to the input:
//   s_m <- s_m + (x - sum_m s_m) / M, per channel and time step.
// Idempotent; output members sum to the input.
EstimateSet MixtureConsistencyProject(const EstimateSet& estimates,
                                      const MultiChannelSignal& input);

}  // namespace mcmixit

#endif  // MCMIXIT_METRICS_H_
