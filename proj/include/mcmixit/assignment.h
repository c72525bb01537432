// mcmixit/assignment.h

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

#ifndef MCMIXIT_ASSIGNMENT_H_
#define MCMIXIT_ASSIGNMENT_H_

#include <cstdint>
#include <vector>

#include "mcmixit/metrics.h"
#include "mcmixit/signal.h"

namespace mcmixit {

struct SearchSpaceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline constexpr uint64_t kDefaultEnumerationCap = 1000000;

// Energy at or below this (times T) marks a reference as silent; such
// references contribute no loss term.
inline constexpr double kZeroReferenceEnergyPerSample = 1e-12;

// An M x N binary matrix with unit row sums, stored as the per-estimate
// assignment vector: estimate m feeds reference assignment[m]. For PIT
// results, unassigned estimates hold kUnassigned.
struct MixingMatrix {
  static constexpr int kUnassigned = -1;

  int num_refs = 0;               // N
  std::vector<int> assignment;    // size M, entries in [0, N) or kUnassigned

  int num_estimates() const { return static_cast<int>(assignment.size()); }
  bool operator==(const MixingMatrix& other) const = default;

  // Dense A[m][n] entry.
  int entry(int m, int n) const { return assignment[m] == n ? 1 : 0; }
};

struct AssignmentResult {
  MixingMatrix matrix;
  double loss = 0.0;  // sum over (kept) references and channels of -ThresholdedSnr
  // Per reference: thresholded SNR at the optimum in dB, averaged over
  // contributing channels. NaN marks a reference skipped as silent.
  std::vector<double> per_reference_snr;
};

// All N^M row-sum-1 assignment matrices, ordered by the assignment vector
// read as a base-N integer (estimate 0 is the most significant digit).
std::vector<MixingMatrix> EnumerateMixingMatrices(int num_estimates, int num_refs,
                                                  uint64_t cap = kDefaultEnumerationCap);

// MixIT: references are the N columns of a T x N signal (single-channel
// problem; column n is reference mixture n), estimates are a C=1 EstimateSet
// with M members. Exhaustive search over all N^M mixing matrices, ties broken
// by enumeration order. Silent references are skipped. All three searches
// throw NumericalError when no candidate yields a finite loss (non-finite
// estimates, typically a diverged model).
AssignmentResult MixitLoss(const MultiChannelSignal& references, const EstimateSet& estimates,
                           const LossConfig& config = {},
                           uint64_t cap = kDefaultEnumerationCap);

// MC-MixIT: one mixing matrix shared by all channels. references holds N
// members of C channels each; estimates holds M members of the same shape.
// The loss sums -ThresholdedSnr over channels and non-silent (reference,
// channel) pairs.
AssignmentResult McMixitLoss(const EstimateSet& references, const EstimateSet& estimates,
                             const LossConfig& config = {},
                             uint64_t cap = kDefaultEnumerationCap);

// Supervised PIT: assigns each non-silent reference to a distinct estimate
// (M!/(M-N)! candidates, lexicographic order over the per-reference estimate
// choices). Unassigned estimates incur no loss term.
AssignmentResult PitLoss(const EstimateSet& references, const EstimateSet& estimates,
                         const LossConfig& config = {},
                         uint64_t cap = kDefaultEnumerationCap);

}  // namespace mcmixit

#endif  // MCMIXIT_ASSIGNMENT_H_
