// mcmixit/metrics.cc

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

#include "mcmixit/metrics.h"

#include <cmath>
#include <vector>

namespace mcmixit {

namespace {

void CheckLengths(std::span<const double> a, std::span<const double> b, const char* what) {
  if (a.size() != b.size() || a.empty()) {
    throw SignalError(std::string(what) + ": length mismatch or empty input");
  }
}

}  // namespace

double ThresholdedSnr(std::span<const double> reference, std::span<const double> estimate,
                      const LossConfig& config) {
  CheckLengths(reference, estimate, "ThresholdedSnr");
  const double ref_energy = Energy(reference);
  if (ref_energy == 0.0) {
    throw DegenerateReferenceError("ThresholdedSnr: degenerate reference (zero energy)");
  }
  double err_energy = 0.0;
  for (size_t i = 0; i < reference.size(); ++i) {
    const double e = estimate[i] - reference[i];
    err_energy += e * e;
  }
  return 10.0 * std::log10(ref_energy / (err_energy + config.tau * ref_energy));
}

double SiSnr(std::span<const double> reference, std::span<const double> estimate,
             const LossConfig& config) {
  CheckLengths(reference, estimate, "SiSnr");
  const size_t n = reference.size();
  double ref_mean = 0.0, est_mean = 0.0;
  for (size_t i = 0; i < n; ++i) {
    ref_mean += reference[i];
    est_mean += estimate[i];
  }
  ref_mean /= static_cast<double>(n);
  est_mean /= static_cast<double>(n);

  double ref_energy = 0.0, dot = 0.0;
  for (size_t i = 0; i < n; ++i) {
    const double y = reference[i] - ref_mean;
    const double e = estimate[i] - est_mean;
    ref_energy += y * y;
    dot += e * y;
  }
  if (ref_energy == 0.0) {
    throw DegenerateReferenceError("SiSnr: degenerate reference (zero energy after mean removal)");
  }
  const double alpha = dot / ref_energy;
  const double target_energy = alpha * alpha * ref_energy;
  double err_energy = 0.0;
  for (size_t i = 0; i < n; ++i) {
    const double y = reference[i] - ref_mean;
    const double e = estimate[i] - est_mean;
    const double d = e - alpha * y;
    err_energy += d * d;
  }
  return 10.0 * std::log10(target_energy / (err_energy + config.epsilon * target_energy));
}

double SiSnrImprovement(std::span<const double> reference, std::span<const double> estimate,
                        std::span<const double> mixture, const LossConfig& config) {
  return SiSnr(reference, estimate, config) - SiSnr(reference, mixture, config);
}

EstimateSet MixtureConsistencyProject(const EstimateSet& estimates,
                                      const MultiChannelSignal& input) {
  if (estimates.num_frames() != input.num_frames() ||
      estimates.num_channels() != input.num_channels()) {
    throw SignalError("MixtureConsistencyProject: shape mismatch");
  }
  const int M = estimates.num_members();
  EstimateSet out = estimates;
  const double inv_m = 1.0 / static_cast<double>(M);
  for (int c = 0; c < input.num_channels(); ++c) {
    auto x = input.channel(c);
    std::vector<double> residual(x.begin(), x.end());
    for (int m = 0; m < M; ++m) {
      auto s = estimates.channel(m, c);
      for (int64_t t = 0; t < input.num_frames(); ++t) residual[t] -= s[t];
    }
    for (int m = 0; m < M; ++m) {
      auto s = out.channel(m, c);
      for (int64_t t = 0; t < input.num_frames(); ++t) s[t] += residual[t] * inv_m;
    }
  }
  return out;
}

}  // namespace mcmixit
