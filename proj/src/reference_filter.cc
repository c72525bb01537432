// mcmixit/reference_filter.cc

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

#include "mcmixit/reference_filter.h"

#include <algorithm>
#include <vector>

#include <Eigen/Dense>

namespace mcmixit {

ReferenceFilterResult EstimateReferenceFilter(std::span<const double> source,
                                              const MultiChannelSignal& target,
                                              int filter_len) {
  const int64_t T = target.num_frames();
  if (static_cast<int64_t>(source.size()) != T) {
    throw SignalError("EstimateReferenceFilter: source/target duration mismatch");
  }
  if (filter_len < 1 || filter_len >= T) {
    throw SignalError("EstimateReferenceFilter: filter_len must be in [1, T)");
  }
  if (Energy(source) == 0.0) {
    throw DegenerateReferenceError("EstimateReferenceFilter: zero source signal");
  }

  const int L = filter_len;
  const int C = target.num_channels();
  const double* s = source.data();

  // R[i][j] = sum_{t=max(i,j)}^{T-1} s[t-i] s[t-j] depends only on
  // d = |i-j| and max(i,j): it is the lag-d autocorrelation truncated at
  // u = T-1-max(i,j). One pass per lag collects the truncated sums.
  Eigen::MatrixXd R(L, L);
  std::vector<double> at_end(L, 0.0);
  for (int d = 0; d < L; ++d) {
    double run = 0.0;
    const int64_t u_max = T - 1 - d;
    for (int64_t u = 0; u <= u_max; ++u) {
      run += s[u] * s[u + d];
      const int64_t m = T - 1 - u;  // sum is now truncated at max(i,j) = m
      if (m < L) at_end[m] = run;
    }
    for (int i = 0; i + d < L; ++i) {
      const double v = at_end[i + d];
      R(i, i + d) = v;
      R(i + d, i) = v;
    }
  }

  const double lambda = 1e-6 * R.trace() / static_cast<double>(L);
  Eigen::MatrixXd A = R;
  A.diagonal().array() += lambda;
  Eigen::LDLT<Eigen::MatrixXd> solver(A);

  ReferenceFilterResult result;
  result.filtered = MultiChannelSignal(T, C, target.sample_rate());
  result.residual = MultiChannelSignal(T, C, target.sample_rate());
  result.taps.resize(C);

  for (int c = 0; c < C; ++c) {
    auto tc = target.channel(c);
    Eigen::VectorXd r(L);
    for (int i = 0; i < L; ++i) {
      double acc = 0.0;
      for (int64_t t = i; t < T; ++t) acc += tc[t] * s[t - i];
      r(i) = acc;
    }
    Eigen::VectorXd h = solver.solve(r);
    result.taps[c].assign(h.data(), h.data() + L);

    auto filt = result.filtered.channel(c);
    auto resid = result.residual.channel(c);
    for (int64_t t = 0; t < T; ++t) {
      double acc = 0.0;
      const int k_max = static_cast<int>(std::min<int64_t>(L - 1, t));
      for (int k = 0; k <= k_max; ++k) acc += h(k) * s[t - k];
      filt[t] = acc;
      resid[t] = tc[t] - acc;
    }
  }
  return result;
}

}  // namespace mcmixit
