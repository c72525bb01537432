// mcmixit/assignment.cc

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

#include "mcmixit/assignment.h"

#include <cmath>
#include <limits>
#include <vector>

namespace mcmixit {

namespace {

bool Silent(std::span<const double> x) {
  return Energy(x) <= kZeroReferenceEnergyPerSample * static_cast<double>(x.size());
}

// -ThresholdedSnr of the summed estimates assigned to one reference channel.
double NegativeTermSnr(std::span<const double> ref, const std::vector<std::span<const double>>& parts,
                       const LossConfig& config, double* snr_out) {
  std::vector<double> mix(ref.size(), 0.0);
  for (const auto& p : parts) {
    for (size_t t = 0; t < mix.size(); ++t) mix[t] += p[t];
  }
  const double snr = ThresholdedSnr(ref, mix, config);
  if (snr_out != nullptr) *snr_out = snr;
  return -snr;
}

uint64_t CheckedPow(int base, int exp, uint64_t cap) {
  uint64_t v = 1;
  for (int i = 0; i < exp; ++i) {
    if (v > cap / static_cast<uint64_t>(base)) return cap + 1;
    v *= static_cast<uint64_t>(base);
  }
  return v;
}

}  // namespace

std::vector<MixingMatrix> EnumerateMixingMatrices(int num_estimates, int num_refs, uint64_t cap) {
  if (num_estimates < 1 || num_refs < 1) {
    throw SignalError("EnumerateMixingMatrices: M and N must be >= 1");
  }
  const uint64_t count = CheckedPow(num_refs, num_estimates, cap);
  if (count > cap) {
    throw SearchSpaceError("EnumerateMixingMatrices: search space too large (N^M exceeds cap)");
  }
  std::vector<MixingMatrix> out;
  out.reserve(count);
  MixingMatrix m;
  m.num_refs = num_refs;
  m.assignment.assign(num_estimates, 0);
  for (uint64_t code = 0; code < count; ++code) {
    uint64_t rem = code;
    for (int i = num_estimates - 1; i >= 0; --i) {
      m.assignment[i] = static_cast<int>(rem % num_refs);
      rem /= num_refs;
    }
    out.push_back(m);
  }
  return out;
}

AssignmentResult MixitLoss(const MultiChannelSignal& references, const EstimateSet& estimates,
                           const LossConfig& config, uint64_t cap) {
  if (estimates.num_channels() != 1) {
    throw SignalError("MixitLoss: estimates must be single-channel");
  }
  if (references.num_frames() != estimates.num_frames()) {
    throw SignalError("MixitLoss: reference/estimate duration mismatch");
  }
  const int N = references.num_channels();
  const int M = estimates.num_members();
  if (M < N) throw SignalError("MixitLoss: requires M >= N");

  std::vector<bool> keep(N);
  bool any = false;
  for (int n = 0; n < N; ++n) {
    keep[n] = !Silent(references.channel(n));
    any = any || keep[n];
  }
  if (!any) throw DegenerateReferenceError("MixitLoss: all references zero-energy");

  const auto matrices = EnumerateMixingMatrices(M, N, cap);
  AssignmentResult best;
  best.loss = std::numeric_limits<double>::infinity();
  std::vector<double> snrs(N);
  for (const auto& matrix : matrices) {
    double loss = 0.0;
    std::vector<double> cur(N, std::numeric_limits<double>::quiet_NaN());
    for (int n = 0; n < N; ++n) {
      if (!keep[n]) continue;
      std::vector<std::span<const double>> parts;
      for (int m = 0; m < M; ++m) {
        if (matrix.assignment[m] == n) parts.push_back(estimates.channel(m, 0));
      }
      double snr = 0.0;
      loss += NegativeTermSnr(references.channel(n), parts, config, &snr);
      cur[n] = snr;
    }
    if (loss < best.loss) {
      best.loss = loss;
      best.matrix = matrix;
      best.per_reference_snr = cur;
    }
  }
  if (!std::isfinite(best.loss)) {
    throw NumericalError("MixitLoss: no candidate produced a finite loss");
  }
  return best;
}

AssignmentResult McMixitLoss(const EstimateSet& references, const EstimateSet& estimates,
                             const LossConfig& config, uint64_t cap) {
  if (references.num_frames() != estimates.num_frames() ||
      references.num_channels() != estimates.num_channels()) {
    throw SignalError("McMixitLoss: reference/estimate shape mismatch");
  }
  const int N = references.num_members();
  const int M = estimates.num_members();
  const int C = references.num_channels();
  if (M < N) throw SignalError("McMixitLoss: requires M >= N");

  // keep[n][c]: contributes a loss term.
  std::vector<std::vector<bool>> keep(N, std::vector<bool>(C));
  bool any = false;
  for (int n = 0; n < N; ++n) {
    for (int c = 0; c < C; ++c) {
      keep[n][c] = !Silent(references.channel(n, c));
      any = any || keep[n][c];
    }
  }
  if (!any) throw DegenerateReferenceError("McMixitLoss: all references zero-energy");

  const auto matrices = EnumerateMixingMatrices(M, N, cap);
  AssignmentResult best;
  best.loss = std::numeric_limits<double>::infinity();
  for (const auto& matrix : matrices) {
    double loss = 0.0;
    std::vector<double> snr_sum(N, 0.0);
    std::vector<int> snr_count(N, 0);
    for (int c = 0; c < C; ++c) {
      for (int n = 0; n < N; ++n) {
        if (!keep[n][c]) continue;
        std::vector<std::span<const double>> parts;
        for (int m = 0; m < M; ++m) {
          if (matrix.assignment[m] == n) parts.push_back(estimates.channel(m, c));
        }
        double snr = 0.0;
        loss += NegativeTermSnr(references.channel(n, c), parts, config, &snr);
        snr_sum[n] += snr;
        ++snr_count[n];
      }
    }
    if (loss < best.loss) {
      best.loss = loss;
      best.matrix = matrix;
      best.per_reference_snr.assign(N, std::numeric_limits<double>::quiet_NaN());
      for (int n = 0; n < N; ++n) {
        if (snr_count[n] > 0) best.per_reference_snr[n] = snr_sum[n] / snr_count[n];
      }
    }
  }
  if (!std::isfinite(best.loss)) {
    throw NumericalError("McMixitLoss: no candidate produced a finite loss");
  }
  return best;
}

AssignmentResult PitLoss(const EstimateSet& references, const EstimateSet& estimates,
                         const LossConfig& config, uint64_t cap) {
  if (references.num_frames() != estimates.num_frames() ||
      references.num_channels() != estimates.num_channels()) {
    throw SignalError("PitLoss: reference/estimate shape mismatch");
  }
  const int N = references.num_members();
  const int M = estimates.num_members();
  const int C = references.num_channels();
  if (M < N) throw SignalError("PitLoss: requires M >= N");

  std::vector<int> kept_refs;
  std::vector<std::vector<bool>> keep_channel(N, std::vector<bool>(C));
  for (int n = 0; n < N; ++n) {
    bool any_channel = false;
    for (int c = 0; c < C; ++c) {
      keep_channel[n][c] = !Silent(references.channel(n, c));
      any_channel = any_channel || keep_channel[n][c];
    }
    if (any_channel) kept_refs.push_back(n);
  }
  if (kept_refs.empty()) throw DegenerateReferenceError("PitLoss: all references zero-energy");
  const int K = static_cast<int>(kept_refs.size());

  uint64_t candidates = 1;
  for (int i = 0; i < K; ++i) {
    candidates *= static_cast<uint64_t>(M - i);
    if (candidates > cap) {
      throw SearchSpaceError("PitLoss: search space too large (M!/(M-K)! exceeds cap)");
    }
  }

  // Pairwise terms: cost[i][m] = sum over non-silent channels of
  // -ThresholdedSnr(ref_{kept_refs[i]}, estimate m).
  std::vector<std::vector<double>> cost(K, std::vector<double>(M, 0.0));
  std::vector<std::vector<double>> mean_snr(K, std::vector<double>(M, 0.0));
  for (int i = 0; i < K; ++i) {
    const int n = kept_refs[i];
    for (int m = 0; m < M; ++m) {
      double sum = 0.0;
      int count = 0;
      for (int c = 0; c < C; ++c) {
        if (!keep_channel[n][c]) continue;
        sum += ThresholdedSnr(references.channel(n, c), estimates.channel(m, c), config);
        ++count;
      }
      cost[i][m] = -sum;
      mean_snr[i][m] = count > 0 ? sum / count : std::numeric_limits<double>::quiet_NaN();
    }
  }

  // Lexicographic enumeration of injective assignments (estimate index per
  // kept reference, in reference order); strict < keeps the earliest optimum.
  AssignmentResult best;
  best.loss = std::numeric_limits<double>::infinity();
  std::vector<int> chosen(K, -1);
  std::vector<bool> used(M, false);
  auto search = [&](auto&& self, int depth, double partial) -> void {
    if (depth == K) {
      if (partial < best.loss) {
        best.loss = partial;
        best.matrix.num_refs = N;
        best.matrix.assignment.assign(M, MixingMatrix::kUnassigned);
        best.per_reference_snr.assign(N, std::numeric_limits<double>::quiet_NaN());
        for (int i = 0; i < K; ++i) {
          best.matrix.assignment[chosen[i]] = kept_refs[i];
          best.per_reference_snr[kept_refs[i]] = mean_snr[i][chosen[i]];
        }
      }
      return;
    }
    for (int m = 0; m < M; ++m) {
      if (used[m]) continue;
      used[m] = true;
      chosen[depth] = m;
      self(self, depth + 1, partial + cost[depth][m]);
      used[m] = false;
    }
  };
  search(search, 0, 0.0);
  if (!std::isfinite(best.loss)) {
    throw NumericalError("PitLoss: no candidate produced a finite loss");
  }
  return best;
}

}  // namespace mcmixit
