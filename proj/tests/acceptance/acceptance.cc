// tests/acceptance/acceptance.cc

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

// Acceptance gate.  Each criterion prints exactly one PASS/FAIL line; the
// process exits nonzero if any requested criterion fails.  Oracles here are
// coded independently of the library internals they judge, down to their own
// thresholded-SNR arithmetic.
//
//   acceptance_tests                 runs all ten criteria
//   acceptance_tests --criteria 7,8  runs a subset (7 and 8 share one run)

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "mcmixit/assignment.h"
#include "mcmixit/metrics.h"
#include "mcmixit/model/checkpoint.h"
#include "mcmixit/model/network.h"
#include "mcmixit/reference_filter.h"
#include "mcmixit/rng.h"
#include "mcmixit/signal.h"
#include "mcmixit/synth/dataset.h"
#include "mcmixit/synth/scene.h"
#include "mcmixit/train/adam.h"
#include "mcmixit/train/trainer.h"

namespace {

using namespace mcmixit;
namespace ad = mcmixit::ad;
namespace fs = std::filesystem;

// Collects failed checks; a criterion passes when none failed.
class Check {
 public:
  void That(bool condition, const std::string& what) {
    if (condition) return;
    ok_ = false;
    if (++failures_ <= 8) std::printf("    check failed: %s\n", what.c_str());
  }
  bool ok() const { return ok_; }

 private:
  bool ok_ = true;
  int failures_ = 0;
};

std::string Fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

std::vector<double> RandomVec(Rng& rng, int64_t n, double lo = -1.0, double hi = 1.0) {
  std::vector<double> v(static_cast<size_t>(n));
  for (auto& x : v) x = rng.Uniform(lo, hi);
  return v;
}

// ---------------------------------------------------------------------------
// Independent assignment oracles.  They recompute the thresholded SNR from
// its definition and enumerate candidates by brute force, sharing nothing
// with the library's search code beyond the silence rule's constant.

constexpr double kTau = 0.001;

bool OracleSilent(std::span<const double> ref) {
  double energy = 0.0;
  for (double r : ref) energy += r * r;
  return energy <= kZeroReferenceEnergyPerSample * static_cast<double>(ref.size());
}

double OracleTsnr(std::span<const double> ref, std::span<const double> est) {
  double ref_energy = 0.0;
  double err_energy = 0.0;
  for (size_t t = 0; t < ref.size(); ++t) {
    ref_energy += ref[t] * ref[t];
    const double e = est[t] - ref[t];
    err_energy += e * e;
  }
  return 10.0 * std::log10(ref_energy / (err_energy + kTau * ref_energy));
}

// Loss of one shared assignment over all channels: estimate m feeds
// reference assign[m]; silent (reference, channel) pairs contribute nothing.
double OracleAssignmentLoss(const EstimateSet& refs, const EstimateSet& ests,
                            const std::vector<int>& assign) {
  const int64_t t_len = refs.num_frames();
  double loss = 0.0;
  for (int n = 0; n < refs.num_members(); ++n) {
    for (int c = 0; c < refs.num_channels(); ++c) {
      const auto ref = refs.channel(n, c);
      if (OracleSilent(ref)) continue;
      std::vector<double> sum(static_cast<size_t>(t_len), 0.0);
      for (int m = 0; m < ests.num_members(); ++m) {
        if (assign[static_cast<size_t>(m)] != n) continue;
        const auto est = ests.channel(m, c);
        for (int64_t s = 0; s < t_len; ++s) sum[static_cast<size_t>(s)] += est[s];
      }
      loss -= OracleTsnr(ref, sum);
    }
  }
  return loss;
}

struct OracleBest {
  double loss = std::numeric_limits<double>::infinity();
  std::vector<int> assign;
  uint64_t candidates = 0;
};

// All N^M row-sum-1 matrices, estimate 0 as the most significant base-N digit
// (the enumeration order the library documents, so tie-breaks agree too).
OracleBest OracleMixingSearch(const EstimateSet& refs, const EstimateSet& ests) {
  const int m = ests.num_members();
  const int n = refs.num_members();
  uint64_t total = 1;
  for (int i = 0; i < m; ++i) total *= static_cast<uint64_t>(n);
  OracleBest best;
  std::vector<int> assign(static_cast<size_t>(m));
  for (uint64_t idx = 0; idx < total; ++idx) {
    uint64_t rest = idx;
    for (int i = m - 1; i >= 0; --i) {
      assign[static_cast<size_t>(i)] = static_cast<int>(rest % static_cast<uint64_t>(n));
      rest /= static_cast<uint64_t>(n);
    }
    ++best.candidates;
    const double loss = OracleAssignmentLoss(refs, ests, assign);
    if (loss < best.loss) {
      best.loss = loss;
      best.assign = assign;
    }
  }
  return best;
}

// All injective maps of references into estimates, lexicographic over the
// per-reference choice; unassigned estimates contribute nothing.
void OraclePitRecurse(const EstimateSet& refs, const EstimateSet& ests, int ref,
                      std::vector<int>& est_of_ref, std::vector<bool>& used, OracleBest& best) {
  if (ref == refs.num_members()) {
    ++best.candidates;
    std::vector<int> assign(static_cast<size_t>(ests.num_members()), MixingMatrix::kUnassigned);
    for (int n = 0; n < refs.num_members(); ++n) {
      assign[static_cast<size_t>(est_of_ref[static_cast<size_t>(n)])] = n;
    }
    const double loss = OracleAssignmentLoss(refs, ests, assign);
    if (loss < best.loss) {
      best.loss = loss;
      best.assign = assign;
    }
    return;
  }
  for (int m = 0; m < ests.num_members(); ++m) {
    if (used[static_cast<size_t>(m)]) continue;
    used[static_cast<size_t>(m)] = true;
    est_of_ref[static_cast<size_t>(ref)] = m;
    OraclePitRecurse(refs, ests, ref + 1, est_of_ref, used, best);
    used[static_cast<size_t>(m)] = false;
  }
}

OracleBest OraclePitSearch(const EstimateSet& refs, const EstimateSet& ests) {
  OracleBest best;
  std::vector<int> est_of_ref(static_cast<size_t>(refs.num_members()), -1);
  std::vector<bool> used(static_cast<size_t>(ests.num_members()), false);
  OraclePitRecurse(refs, ests, 0, est_of_ref, used, best);
  return best;
}

EstimateSet RandomSet(Rng& rng, int64_t t_len, int channels, int members, int sample_rate) {
  EstimateSet set(t_len, channels, members, sample_rate);
  for (int m = 0; m < members; ++m) {
    for (int c = 0; c < channels; ++c) {
      auto ch = set.channel(m, c);
      for (auto& x : ch) x = rng.Uniform(-1.0, 1.0);
    }
  }
  return set;
}

// ---------------------------------------------------------------------------
// Criterion 1: MixIT equals the exhaustive oracle on 200 seeded instances.

bool Criterion1() {
  constexpr int64_t kT = 256;
  constexpr int kInstances = 200;
  const int m_values[] = {2, 3, 4, 8};
  const auto start = std::chrono::steady_clock::now();
  Check check;
  for (int i = 0; i < kInstances; ++i) {
    Rng rng(1000 + static_cast<uint64_t>(i));
    const int m = m_values[i % 4];
    const int n = 2;
    const EstimateSet refs = RandomSet(rng, kT, 1, n, 16000);
    const EstimateSet ests = RandomSet(rng, kT, 1, m, 16000);
    MultiChannelSignal ref_cols(kT, n, 16000);
    for (int j = 0; j < n; ++j) {
      auto dst = ref_cols.channel(j);
      const auto src = refs.channel(j, 0);
      for (int64_t t = 0; t < kT; ++t) dst[static_cast<size_t>(t)] = src[static_cast<size_t>(t)];
    }

    const AssignmentResult lib = MixitLoss(ref_cols, ests);
    const OracleBest oracle = OracleMixingSearch(refs, ests);
    check.That(std::abs(lib.loss - oracle.loss) <= 1e-9,
               "instance " + std::to_string(i) + ": loss " + Fmt(lib.loss) + " vs oracle " +
                   Fmt(oracle.loss));
    check.That(lib.matrix.assignment == oracle.assign,
               "instance " + std::to_string(i) + ": chosen matrix differs from the oracle's");
  }
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
                             .count();
  check.That(seconds < 30.0, "runtime " + Fmt(seconds) + " s exceeds the 30 s budget");
  std::printf("    200 instances (N=2, M in {2,3,4,8}, T=256) in %.2f s\n", seconds);
  return check.ok();
}

// ---------------------------------------------------------------------------
// Criterion 2: MC-MixIT and PIT equal their oracles; MC-MixIT at C=1 is
// exactly MixIT; PIT at N=3, M=8 enumerates 336 candidates.

bool Criterion2() {
  constexpr int64_t kT = 256;
  Check check;

  const int m_values[] = {2, 3, 4, 8};
  const int c_values[] = {1, 2, 4};
  for (int i = 0; i < 200; ++i) {
    Rng rng(2000 + static_cast<uint64_t>(i));
    const int m = m_values[i % 4];
    const int c = c_values[i % 3];
    const EstimateSet refs = RandomSet(rng, kT, c, 2, 16000);
    const EstimateSet ests = RandomSet(rng, kT, c, m, 16000);
    const AssignmentResult lib = McMixitLoss(refs, ests);
    const OracleBest oracle = OracleMixingSearch(refs, ests);
    check.That(std::abs(lib.loss - oracle.loss) <= 1e-9,
               "mc instance " + std::to_string(i) + ": loss " + Fmt(lib.loss) + " vs oracle " +
                   Fmt(oracle.loss));
    check.That(lib.matrix.assignment == oracle.assign,
               "mc instance " + std::to_string(i) + ": matrix differs from the oracle's");
  }

  for (int i = 0; i < 50; ++i) {
    Rng rng(3000 + static_cast<uint64_t>(i));
    const int m = m_values[i % 4];
    const EstimateSet refs = RandomSet(rng, kT, 1, 2, 16000);
    const EstimateSet ests = RandomSet(rng, kT, 1, m, 16000);
    MultiChannelSignal ref_cols(kT, 2, 16000);
    for (int j = 0; j < 2; ++j) {
      auto dst = ref_cols.channel(j);
      const auto src = refs.channel(j, 0);
      for (int64_t t = 0; t < kT; ++t) dst[static_cast<size_t>(t)] = src[static_cast<size_t>(t)];
    }
    const AssignmentResult mc = McMixitLoss(refs, ests);
    const AssignmentResult classic = MixitLoss(ref_cols, ests);
    check.That(mc.loss == classic.loss, "C=1 reduction " + std::to_string(i) +
                                            ": losses differ: " + Fmt(mc.loss) + " vs " +
                                            Fmt(classic.loss));
    check.That(mc.matrix == classic.matrix,
               "C=1 reduction " + std::to_string(i) + ": matrices differ");
  }

  for (int i = 0; i < 30; ++i) {
    Rng rng(4000 + static_cast<uint64_t>(i));
    const EstimateSet refs = RandomSet(rng, kT, 2, 3, 16000);
    const EstimateSet ests = RandomSet(rng, kT, 2, 8, 16000);
    const AssignmentResult lib = PitLoss(refs, ests);
    const OracleBest oracle = OraclePitSearch(refs, ests);
    check.That(oracle.candidates == 336, "pit oracle enumerated " +
                                             std::to_string(oracle.candidates) +
                                             " candidates, expected 336");
    check.That(std::abs(lib.loss - oracle.loss) <= 1e-9,
               "pit instance " + std::to_string(i) + ": loss " + Fmt(lib.loss) + " vs oracle " +
                   Fmt(oracle.loss));
    check.That(lib.matrix.assignment == oracle.assign,
               "pit instance " + std::to_string(i) + ": assignment differs from the oracle's");
  }
  std::printf("    200 MC-MixIT + 50 C=1-reduction + 30 PIT instances\n");
  return check.ok();
}

// ---------------------------------------------------------------------------
// Criterion 3: tau = 0.001 caps a perfect estimate at exactly 30 dB.

bool Criterion3() {
  Check check;
  const LossConfig config;  // library default must already be tau = 0.001
  check.That(config.tau == 0.001, "default tau is " + Fmt(config.tau) + ", not 0.001");
  for (int i = 0; i < 50; ++i) {
    Rng rng(5000 + static_cast<uint64_t>(i));
    const auto ref = RandomVec(rng, 400, -2.0, 2.0);
    const double snr = ThresholdedSnr(ref, ref, config);
    check.That(std::abs(snr - 30.0) <= 1e-9,
               "seed " + std::to_string(i) + ": perfect estimate scored " + Fmt(snr));
  }
  return check.ok();
}

// ---------------------------------------------------------------------------
// Criterion 4: every autodiff op and the tiny-preset end-to-end loss pass
// central finite differences (h = 1e-5; rel err <= 1e-4 per op, <= 1e-3
// end to end, err measured against max(|grad|, |fd|, 1)).

struct OpLeaf {
  std::vector<int64_t> shape;
  std::vector<double> values;
};

int FdCheckOp(const std::string& name, std::vector<OpLeaf> leaves,
              const std::function<ad::Tensor(const std::vector<ad::Tensor>&)>& fn, Check& check) {
  constexpr double kH = 1e-5;
  constexpr double kTol = 1e-4;
  auto build = [&](bool grad) {
    std::vector<ad::Tensor> handles;
    for (const auto& leaf : leaves) {
      auto t = ad::Tensor::Leaf(leaf.shape, grad);
      t.value() = leaf.values;
      handles.push_back(t);
    }
    return handles;
  };
  auto handles = build(true);
  auto loss = fn(handles);
  ad::Backward(loss);
  int probes = 0;
  for (size_t i = 0; i < leaves.size(); ++i) {
    const auto grad = handles[i].grad();
    for (size_t j = 0; j < leaves[i].values.size(); ++j) {
      const double saved = leaves[i].values[j];
      leaves[i].values[j] = saved + kH;
      const double up = fn(build(false)).item();
      leaves[i].values[j] = saved - kH;
      const double down = fn(build(false)).item();
      leaves[i].values[j] = saved;
      const double fd = (up - down) / (2.0 * kH);
      const double err = std::abs(grad[j] - fd);
      ++probes;
      check.That(err <= kTol * std::max({std::abs(grad[j]), std::abs(fd), 1.0}),
                 name + " leaf " + std::to_string(i) + "[" + std::to_string(j) +
                     "]: grad " + Fmt(grad[j]) + " vs fd " + Fmt(fd));
    }
  }
  return probes;
}

OpLeaf RandLeaf(Rng& rng, std::vector<int64_t> shape, double lo = -1.0, double hi = 1.0) {
  int64_t n = 1;
  for (int64_t d : shape) n *= d;
  return {std::move(shape), RandomVec(rng, n, lo, hi)};
}

bool Criterion4() {
  Check check;
  Rng rng(6000);
  int probes = 0;

  // Reduce any op output to a scalar through fixed random weights so every
  // output element influences the loss.
  auto weighted = [&rng](const ad::Tensor& t) {
    std::vector<double> w(static_cast<size_t>(t.size()));
    Rng wr(77);
    for (auto& x : w) x = wr.Uniform(0.5, 1.5);
    return ad::SumAll(ad::Mul(t, ad::Tensor::Constant(w, t.shape())));
  };

  probes += FdCheckOp("Add", {RandLeaf(rng, {3, 4}), RandLeaf(rng, {3, 4})},
                      [&](const auto& l) { return weighted(ad::Add(l[0], l[1])); }, check);
  probes += FdCheckOp("Sub", {RandLeaf(rng, {3, 4}), RandLeaf(rng, {3, 4})},
                      [&](const auto& l) { return weighted(ad::Sub(l[0], l[1])); }, check);
  probes += FdCheckOp("Mul", {RandLeaf(rng, {3, 4}), RandLeaf(rng, {3, 4})},
                      [&](const auto& l) { return weighted(ad::Mul(l[0], l[1])); }, check);
  probes += FdCheckOp("ScalarMul", {RandLeaf(rng, {3, 4})},
                      [&](const auto& l) { return weighted(ad::ScalarMul(l[0], 1.7)); }, check);
  probes += FdCheckOp("AddScalar", {RandLeaf(rng, {3, 4})},
                      [&](const auto& l) { return weighted(ad::AddScalar(l[0], 0.3)); }, check);
  // Keep ReLU inputs away from the kink, where finite differences straddle
  // the nondifferentiable point.
  OpLeaf relu_leaf = RandLeaf(rng, {3, 4});
  for (auto& v : relu_leaf.values) v += (v >= 0.0 ? 0.2 : -0.2);
  probes += FdCheckOp("Relu", {relu_leaf},
                      [&](const auto& l) { return weighted(ad::Relu(l[0])); }, check);
  probes += FdCheckOp("Sigmoid", {RandLeaf(rng, {3, 4}, -3.0, 3.0)},
                      [&](const auto& l) { return weighted(ad::Sigmoid(l[0])); }, check);
  probes += FdCheckOp("Square", {RandLeaf(rng, {3, 4})},
                      [&](const auto& l) { return weighted(ad::Square(l[0])); }, check);
  probes += FdCheckOp("Log10", {RandLeaf(rng, {3, 4}, 0.5, 2.0)},
                      [&](const auto& l) { return weighted(ad::Log10(l[0])); }, check);
  probes += FdCheckOp("MatMul", {RandLeaf(rng, {3, 4}), RandLeaf(rng, {4, 5})},
                      [&](const auto& l) { return weighted(ad::MatMul(l[0], l[1])); }, check);
  probes += FdCheckOp("AddColBroadcast", {RandLeaf(rng, {3, 4}), RandLeaf(rng, {3})},
                      [&](const auto& l) { return weighted(ad::AddColBroadcast(l[0], l[1])); },
                      check);
  probes += FdCheckOp("ConcatRows", {RandLeaf(rng, {2, 4}), RandLeaf(rng, {3, 4})},
                      [&](const auto& l) { return weighted(ad::ConcatRows(l[0], l[1])); }, check);
  probes += FdCheckOp("SumAll", {RandLeaf(rng, {3, 4})},
                      [&](const auto& l) { return ad::SumAll(l[0]); }, check);
  probes += FdCheckOp("MeanAll", {RandLeaf(rng, {3, 4})},
                      [&](const auto& l) { return ad::MeanAll(l[0]); }, check);
  probes += FdCheckOp("PadTo", {RandLeaf(rng, {5})},
                      [&](const auto& l) { return weighted(ad::PadTo(l[0], 8)); }, check);
  probes += FdCheckOp(
      "FeatureNorm",
      {RandLeaf(rng, {4, 3}), RandLeaf(rng, {4}, 0.5, 1.5), RandLeaf(rng, {4}, -0.3, 0.3)},
      [&](const auto& l) { return weighted(ad::FeatureNorm(l[0], l[1], l[2])); }, check);
  probes += FdCheckOp("DilatedDepthwiseConv", {RandLeaf(rng, {3, 8}), RandLeaf(rng, {3, 3})},
                      [&](const auto& l) { return weighted(ad::DilatedDepthwiseConv(l[0], l[1], 2)); },
                      check);
  probes += FdCheckOp("Frame", {RandLeaf(rng, {16})},
                      [&](const auto& l) { return weighted(ad::Frame(l[0], 6, 2)); }, check);
  probes += FdCheckOp("OverlapAdd", {RandLeaf(rng, {6, 4})},
                      [&](const auto& l) { return weighted(ad::OverlapAdd(l[0], 3)); }, check);
  std::printf("    per-op finite differences: %d probes\n", probes);

  // End to end: tiny preset, C=2 MoM-style input, MC-MixIT loss at the fixed
  // optimal matrix; sampled parameter coordinates against central FD.
  const ModelConfig config = ModelConfig::Tiny();
  ModelParams params = InitParams(config, 60);
  Rng data_rng(61);
  constexpr int64_t kT = 128;
  MultiChannelSignal input(kT, 2, 16000);
  for (int c = 0; c < 2; ++c) {
    auto ch = input.channel(c);
    for (auto& x : ch) x = data_rng.Uniform(-0.5, 0.5);
  }
  EstimateSet refs = RandomSet(data_rng, kT, 2, 2, 16000);

  const auto forward_loss = [&](const MixingMatrix& matrix) {
    const ForwardResult fwd = Forward(input, params);
    return AssignmentLossGraph(fwd, refs, matrix);
  };
  const ForwardResult fwd0 = Forward(input, params);
  const MixingMatrix matrix = McMixitLoss(refs, fwd0.ToEstimateSet()).matrix;

  auto loss = forward_loss(matrix);
  ad::Backward(loss);
  std::map<std::string, std::vector<double>> grads;
  for (const auto& [name, tensor] : params.NamedTensors()) grads[name] = tensor.grad();

  constexpr double kH = 1e-5;
  constexpr double kTolE2E = 1e-3;
  Rng pick(62);
  int e2e_probes = 0;
  for (auto& [name, tensor] : params.NamedTensors()) {
    for (int k = 0; k < 3; ++k) {
      const size_t j = static_cast<size_t>(pick.NextBelow(static_cast<uint64_t>(tensor.size())));
      const double saved = tensor.value()[j];
      tensor.value()[j] = saved + kH;
      const double up = forward_loss(matrix).item();
      tensor.value()[j] = saved - kH;
      const double down = forward_loss(matrix).item();
      tensor.value()[j] = saved;
      const double fd = (up - down) / (2.0 * kH);
      const double g = grads[name][j];
      ++e2e_probes;
      check.That(std::abs(g - fd) <= kTolE2E * std::max({std::abs(g), std::abs(fd), 1.0}),
                 "end-to-end " + name + "[" + std::to_string(j) + "]: grad " + Fmt(g) +
                     " vs fd " + Fmt(fd));
    }
  }
  std::printf("    end-to-end finite differences: %d sampled coordinates\n", e2e_probes);
  return check.ok();
}

// ---------------------------------------------------------------------------
// Criterion 5: architecture invariants as property suites, 20 seeds each.

ModelConfig SmallModel() {
  ModelConfig c;
  c.num_superblocks = 2;
  c.blocks_per_superblock = 2;
  c.kernel_width = 3;
  c.window = 8;
  c.hop = 4;
  c.bottleneck_dim = 6;
  c.conv_channels = 10;
  c.tac_dim = 5;
  c.num_outputs = 3;
  c.encoder_bases = 7;
  return c;
}

MultiChannelSignal RandomSignal(Rng& rng, int64_t t_len, int channels) {
  MultiChannelSignal sig(t_len, channels, 16000);
  for (int c = 0; c < channels; ++c) {
    auto ch = sig.channel(c);
    for (auto& x : ch) x = rng.Uniform(-0.7, 0.7);
  }
  return sig;
}

double MaxAbsDiff(std::span<const double> a, std::span<const double> b) {
  double worst = 0.0;
  for (size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a[i] - b[i]));
  return worst;
}

bool Criterion5() {
  constexpr int kSeeds = 20;
  constexpr int64_t kT = 64;
  const ModelConfig config = SmallModel();
  Check check;
  ad::NoGradGuard no_grad;

  for (int seed = 0; seed < kSeeds; ++seed) {
    Rng rng(7000 + static_cast<uint64_t>(seed));
    const ModelParams params = InitParams(config, 100 + static_cast<uint64_t>(seed));

    // (a) Channel-permutation equivariance.
    {
      const int c = 4;
      const MultiChannelSignal x = RandomSignal(rng, kT, c);
      std::vector<int> perm = {2, 0, 3, 1};
      MultiChannelSignal permuted(kT, c, 16000);
      for (int j = 0; j < c; ++j) {
        auto dst = permuted.channel(j);
        const auto src = x.channel(perm[static_cast<size_t>(j)]);
        for (int64_t t = 0; t < kT; ++t) dst[static_cast<size_t>(t)] = src[static_cast<size_t>(t)];
      }
      const EstimateSet base = Forward(x, params).ToEstimateSet();
      const EstimateSet shuffled = Forward(permuted, params).ToEstimateSet();
      double worst = 0.0;
      for (int m = 0; m < config.num_outputs; ++m) {
        for (int j = 0; j < c; ++j) {
          worst = std::max(worst, MaxAbsDiff(shuffled.channel(m, j),
                                             base.channel(m, perm[static_cast<size_t>(j)])));
        }
      }
      check.That(worst <= 1e-5,
                 "seed " + std::to_string(seed) + ": permutation equivariance off by " +
                     Fmt(worst));
    }

    // (b) Identical channels collapse to identical outputs.
    {
      const MultiChannelSignal mono = RandomSignal(rng, kT, 1);
      MultiChannelSignal tripled(kT, 3, 16000);
      for (int j = 0; j < 3; ++j) {
        auto dst = tripled.channel(j);
        const auto src = mono.channel(0);
        for (int64_t t = 0; t < kT; ++t) dst[static_cast<size_t>(t)] = src[static_cast<size_t>(t)];
      }
      const EstimateSet est = Forward(tripled, params).ToEstimateSet();
      double worst = 0.0;
      for (int m = 0; m < config.num_outputs; ++m) {
        for (int j = 1; j < 3; ++j) {
          worst = std::max(worst, MaxAbsDiff(est.channel(m, j), est.channel(m, 0)));
        }
      }
      check.That(worst <= 1e-12, "seed " + std::to_string(seed) +
                                     ": identical channels diverged by " + Fmt(worst));
    }

    // (c) The parameter set is channel-count independent: the same tensors
    // run at C=1 and C=8 and the count never moves.
    {
      const int64_t count = params.ParameterCount();
      const EstimateSet at1 = Forward(RandomSignal(rng, kT, 1), params).ToEstimateSet();
      const EstimateSet at8 = Forward(RandomSignal(rng, kT, 8), params).ToEstimateSet();
      check.That(at1.num_channels() == 1 && at8.num_channels() == 8,
                 "seed " + std::to_string(seed) + ": wrong output channel counts");
      check.That(params.ParameterCount() == count,
                 "seed " + std::to_string(seed) + ": parameter count changed with C");
    }

    // (d) TAC bypass equals independent single-channel runs.
    {
      const ModelParams bypassed = RemoveTac(params);
      const int c = 3;
      const MultiChannelSignal x = RandomSignal(rng, kT, c);
      const EstimateSet joint = Forward(x, bypassed).ToEstimateSet();
      double worst = 0.0;
      for (int j = 0; j < c; ++j) {
        MultiChannelSignal solo(kT, 1, 16000);
        auto dst = solo.channel(0);
        const auto src = x.channel(j);
        for (int64_t t = 0; t < kT; ++t) dst[static_cast<size_t>(t)] = src[static_cast<size_t>(t)];
        const EstimateSet single = Forward(solo, bypassed).ToEstimateSet();
        for (int m = 0; m < config.num_outputs; ++m) {
          worst = std::max(worst, MaxAbsDiff(joint.channel(m, j), single.channel(m, 0)));
        }
      }
      check.That(worst <= 1e-6,
                 "seed " + std::to_string(seed) + ": TAC bypass differs from solo runs by " +
                     Fmt(worst));
    }

    // (e) Mixture consistency: estimates sum to the input.
    {
      const int c = 2;
      const MultiChannelSignal x = RandomSignal(rng, kT, c);
      const EstimateSet est = Forward(x, params).ToEstimateSet();
      const MultiChannelSignal sum = est.Sum();
      double worst = 0.0;
      for (int j = 0; j < c; ++j) worst = std::max(worst, MaxAbsDiff(sum.channel(j), x.channel(j)));
      check.That(worst <= 1e-5,
                 "seed " + std::to_string(seed) + ": estimates sum off the mixture by " +
                     Fmt(worst));
    }
  }

  // The full-size preset lands at the intended parameter budget once.
  const int64_t full = InitParams(ModelConfig(), 1).ParameterCount();
  check.That(full == 4725376, "full preset has " + std::to_string(full) + " parameters");
  std::printf("    5 properties x %d seeds; full preset: %lld parameters\n", kSeeds,
              static_cast<long long>(full));
  return check.ok();
}

// ---------------------------------------------------------------------------
// Criterion 6: a checkpoint trained at C=1 evaluates at C in {1,2,4,8},
// deterministically.

bool Criterion6() {
  Check check;
  const fs::path dir = fs::temp_directory_path() / "mcmixit_acceptance_c6";
  fs::remove_all(dir);
  fs::create_directories(dir);

  ModelConfig model = SmallModel();
  DataConfig data;
  data.mics = 1;
  data.unsup_samples = 240;
  data.sup_samples = 240;
  data.filter_len = 32;
  TrainConfig tc;
  tc.mode = TrainConfig::Mode::kUnsupervised;
  tc.steps = 3;
  tc.batch_size = 2;
  TrainerOptions options;
  options.run_dir = (dir / "run").string();
  options.seed = 6;
  Trainer trainer(model, tc, data, options);
  check.That(trainer.Run() == 3, "1-mic training did not reach step 3");

  const Checkpoint ck = LoadCheckpoint(trainer.CheckpointPath());
  for (int mics : {1, 2, 4, 8}) {
    DataConfig eval_data = data;
    eval_data.mics = mics;
    DatasetStream stream(eval_data, ExampleKind::kUnsupervisedMom, Split::kTest);
    EvalOptions eo;
    eo.num_examples = 4;
    try {
      const EvalReport first = Evaluate(ck.params, stream, eo);
      const EvalReport second = Evaluate(ck.params, stream, eo);
      check.That(first.examples == 4, "C=" + std::to_string(mics) + ": ran " +
                                          std::to_string(first.examples) + " examples");
      check.That(first.mics == mics, "C=" + std::to_string(mics) + ": report says " +
                                         std::to_string(first.mics) + " mics");
      check.That(first.mean_si_snri == second.mean_si_snri &&
                     first.per_source_si_snri == second.per_source_si_snri &&
                     first.mean_assignment_loss == second.mean_assignment_loss,
                 "C=" + std::to_string(mics) + ": two identical evaluations disagree");
      std::printf("    C=%d: mean SI-SNRi %.3f dB over %lld examples\n", mics, first.mean_si_snri,
                  static_cast<long long>(first.examples));
    } catch (const std::exception& e) {
      check.That(false, "C=" + std::to_string(mics) + " raised: " + e.what());
    }
  }
  fs::remove_all(dir);
  return check.ok();
}

// ---------------------------------------------------------------------------
// Criteria 7 and 8: the toy learning demonstration.  One unsupervised
// MC-MixIT run (tiny preset, M=4, C=2, tone + modulated-noise MoMs, no
// reverb) must reach 5 dB held-out SI-SNRi; a semi-supervised run on the same
// data must land within 0.5 dB of it.  The 5 dB bar was frozen after a
// baseline run of this exact recipe scored ~6.8 dB (seeds 1-4 all landed in
// 6.6-6.8 dB, so the bar leaves >1.5 dB of margin).

struct ToyRecipe {
  int64_t steps = 10000;
  int64_t samples = 1000;  // 62.5 ms examples keep assignments stable
  int batch = 4;
  double lr = 1e-4;
  uint64_t seed = 1;
};

DataConfig ToyData(const ToyRecipe& recipe) {
  DataConfig data;
  data.mics = 2;
  data.unsup_samples = recipe.samples;
  data.sup_samples = recipe.samples;
  data.noise_level = 0.0;
  data.spatial_fir = false;  // no reverb
  return data;
}

double ToyEval(const ModelParams& params, const DataConfig& data) {
  DatasetStream held_out(data, ExampleKind::kUnsupervisedMom, Split::kTest);
  EvalOptions eo;
  eo.num_examples = 32;
  return Evaluate(params, held_out, eo).mean_si_snri;
}

// Trains with hand-assembled batches (supervised examples first, as the
// trainer does) so progress can be reported on one long-running criterion.
ModelParams ToyTrain(const ToyRecipe& recipe, int sup_per_batch, const char* label) {
  const ModelConfig model = ModelConfig::Tiny();  // M = 4 outputs
  const DataConfig data = ToyData(recipe);
  TrainConfig tc;
  tc.mode = sup_per_batch > 0 ? TrainConfig::Mode::kSemi : TrainConfig::Mode::kUnsupervised;
  tc.learning_rate = recipe.lr;
  tc.batch_size = recipe.batch;
  tc.steps = recipe.steps;
  tc.Check();

  ModelParams params = InitParams(model, recipe.seed);
  Adam adam(params, tc.learning_rate, tc.adam_beta1, tc.adam_beta2, tc.adam_eps);
  DatasetStream unsup(data, ExampleKind::kUnsupervisedMom, Split::kTrain);
  DatasetStream sup(data, ExampleKind::kSupervisedFiltered, Split::kTrain);
  uint64_t unsup_index = 0;
  uint64_t sup_index = 0;
  const auto start = std::chrono::steady_clock::now();
  for (int64_t step = 1; step <= recipe.steps; ++step) {
    std::vector<TrainingExample> batch;
    batch.reserve(static_cast<size_t>(recipe.batch));
    for (int b = 0; b < sup_per_batch; ++b) batch.push_back(sup.Example(sup_index++));
    for (int b = sup_per_batch; b < recipe.batch; ++b) {
      batch.push_back(unsup.Example(unsup_index++));
    }
    const StepMetrics metrics = TrainStep(params, adam, batch, tc);
    if (step % 1000 == 0) {
      const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
                           .count();
      std::printf("    %s step %lld/%lld: loss %.2f (%.0f ms/step)\n", label,
                  static_cast<long long>(step), static_cast<long long>(recipe.steps), metrics.loss,
                  1000.0 * s / static_cast<double>(step));
      std::fflush(stdout);
    }
  }
  return params;
}

struct ToyOutcome {
  std::optional<double> unsup_si;
  std::optional<double> semi_si;
};

ToyOutcome& ToyState() {
  static ToyOutcome outcome;
  return outcome;
}

double ToyUnsupSi() {
  auto& state = ToyState();
  if (!state.unsup_si) {
    const ToyRecipe recipe;
    const ModelParams params = ToyTrain(recipe, 0, "unsup");
    state.unsup_si = ToyEval(params, ToyData(recipe));
  }
  return *state.unsup_si;
}

double ToySemiSi() {
  auto& state = ToyState();
  if (!state.semi_si) {
    const ToyRecipe recipe;
    const int sup_per_batch = static_cast<int>(std::llround(0.5 * recipe.batch));
    const ModelParams params = ToyTrain(recipe, sup_per_batch, "semi");
    state.semi_si = ToyEval(params, ToyData(recipe));
  }
  return *state.semi_si;
}

bool Criterion7() {
  Check check;
  const double si = ToyUnsupSi();
  std::printf("    unsupervised held-out mean SI-SNRi: %.3f dB (bar: 5.0)\n", si);
  check.That(si >= 5.0, "unsupervised SI-SNRi " + Fmt(si) + " dB is below the 5 dB bar");
  return check.ok();
}

bool Criterion8() {
  Check check;
  const double unsup = ToyUnsupSi();
  const double semi = ToySemiSi();
  std::printf("    semi %.3f dB vs unsupervised %.3f dB (allowed slack: 0.5)\n", semi, unsup);
  check.That(semi >= unsup - 0.5, "semi-supervised " + Fmt(semi) +
                                      " dB trails unsupervised " + Fmt(unsup) +
                                      " dB by more than 0.5 dB");
  return check.ok();
}

// ---------------------------------------------------------------------------
// Criterion 9: on noiseless FIR-spatialized scenes the reference filter
// leaves under 1e-4 relative residual energy, and the three supervised
// targets partition the input exactly.

bool Criterion9() {
  constexpr int kSr = 16000;
  constexpr int64_t kT = 2000;
  constexpr int kMics = 2;
  Check check;

  for (int seed = 0; seed < 10; ++seed) {
    Rng rng(9000 + static_cast<uint64_t>(seed));

    SceneSource src;
    src.id = 1;
    src.signal = ToneComplex(rng, kT + kSincTaps, kSr);
    src.gain = rng.Uniform(0.5, 1.5);
    src.delays = CircularArrayDelays(kMics, rng.Uniform(0.0, 6.28), kSr);
    for (int m = 0; m < kMics; ++m) src.spatial_fir.push_back(ExponentialFir(rng, 64));
    Scene scene{{src}, 0.0, 9000 + static_cast<uint64_t>(seed)};
    const RenderResult render = RenderScene(scene, kMics, kT, kSr);

    const std::span<const double> close_talk(src.signal.data(), static_cast<size_t>(kT));
    const ReferenceFilterResult fit = EstimateReferenceFilter(close_talk, render.mixture, 256);
    for (int c = 0; c < kMics; ++c) {
      double target_energy = 0.0;
      double residual_energy = 0.0;
      for (int64_t t = 0; t < kT; ++t) {
        target_energy += render.mixture.at(t, c) * render.mixture.at(t, c);
        residual_energy += fit.residual.at(t, c) * fit.residual.at(t, c);
      }
      const double rel = residual_energy / target_energy;
      check.That(rel < 1e-4, "seed " + std::to_string(seed) + " mic " + std::to_string(c) +
                                 ": relative residual energy " + Fmt(rel));
    }

    // Partition: same scene as the far source, plus an independent near one.
    SceneSource other;
    other.id = 2;
    other.signal = ModulatedNoise(rng, kT + kSincTaps, kSr);
    other.gain = rng.Uniform(0.5, 1.5);
    other.delays = CircularArrayDelays(kMics, rng.Uniform(0.0, 6.28), kSr);
    Scene scene_a{{other}, 0.0, 9500 + static_cast<uint64_t>(seed)};
    const std::vector<double> close_b(src.signal.begin(), src.signal.begin() + kT);
    const TrainingExample ex =
        MakeSupervisedFiltered(scene_a, scene, close_b, kMics, kT, kSr, 256);
    double worst = 0.0;
    for (int c = 0; c < kMics; ++c) {
      for (int64_t t = 0; t < kT; ++t) {
        double sum = 0.0;
        for (int n = 0; n < ex.references.num_members(); ++n) {
          sum += ex.references.channel(n, c)[static_cast<size_t>(t)];
        }
        worst = std::max(worst, std::abs(sum - ex.input.at(t, c)));
      }
    }
    check.That(worst <= 1e-12,
               "seed " + std::to_string(seed) + ": partition error " + Fmt(worst));
  }
  std::printf("    10 noiseless FIR scenes: residual + exact 3-target partition\n");
  return check.ok();
}

// ---------------------------------------------------------------------------
// Criterion 10: bit-identical metrics across reruns; resume matches the
// uninterrupted trajectory.

std::vector<std::string> MetricsSansWall(const std::string& path, Check& check) {
  std::ifstream in(path);
  check.That(bool(in), "cannot open " + path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto rec = nlohmann::json::parse(line);
    rec.erase("wall_ms");
    lines.push_back(rec.dump());
  }
  return lines;
}

bool Criterion10() {
  Check check;
  const fs::path dir = fs::temp_directory_path() / "mcmixit_acceptance_c10";
  fs::remove_all(dir);
  fs::create_directories(dir);

  const ModelConfig model = SmallModel();
  DataConfig data;
  data.mics = 2;
  data.unsup_samples = 240;
  data.sup_samples = 240;
  data.filter_len = 32;
  TrainConfig tc;
  tc.mode = TrainConfig::Mode::kUnsupervised;
  tc.steps = 500;
  tc.batch_size = 2;
  tc.learning_rate = 1e-3;

  auto run = [&](const std::string& name, int64_t steps) {
    TrainConfig stage = tc;
    stage.steps = steps;
    TrainerOptions options;
    options.run_dir = (dir / name).string();
    options.checkpoint_interval = 100;
    options.seed = 10;
    Trainer trainer(model, stage, data, options);
    check.That(trainer.Run() == steps, name + " stopped before step " + std::to_string(steps));
    return options.run_dir;
  };

  const std::string a = run("a", 500);
  const std::string b = run("b", 500);
  const auto metrics_a = MetricsSansWall(a + "/metrics.jsonl", check);
  const auto metrics_b = MetricsSansWall(b + "/metrics.jsonl", check);
  check.That(metrics_a.size() == 500, "run a logged " + std::to_string(metrics_a.size()) +
                                          " steps, expected 500");
  check.That(metrics_a == metrics_b, "two identical runs logged different metrics");

  // Interrupt at 250, then resume to 500 in the same directory.
  run("c", 250);
  const std::string c = run("c", 500);
  const auto metrics_c = MetricsSansWall(c + "/metrics.jsonl", check);
  check.That(metrics_a == metrics_c, "resumed run diverged from the uninterrupted one");

  const Checkpoint ck_a = LoadCheckpoint(a + "/checkpoint.bin");
  const Checkpoint ck_c = LoadCheckpoint(c + "/checkpoint.bin");
  const auto named_a = ck_a.params.NamedTensors();
  const auto named_c = ck_c.params.NamedTensors();
  bool params_equal = named_a.size() == named_c.size();
  for (size_t i = 0; params_equal && i < named_a.size(); ++i) {
    params_equal = named_a[i].first == named_c[i].first &&
                   named_a[i].second.value() == named_c[i].second.value();
  }
  check.That(params_equal, "resumed parameters differ from the uninterrupted run");

  std::printf("    500-step rerun bitwise equal; 250+250 resume matches\n");
  fs::remove_all(dir);
  return check.ok();
}

// ---------------------------------------------------------------------------

struct Criterion {
  int number;
  const char* label;
  std::function<bool()> fn;
};

const std::vector<Criterion>& AllCriteria() {
  static const std::vector<Criterion> criteria = {
      {1, "MixIT matches the exhaustive oracle", Criterion1},
      {2, "MC-MixIT and PIT match their oracles; C=1 reduces to MixIT", Criterion2},
      {3, "thresholded SNR caps perfect estimates at exactly 30 dB", Criterion3},
      {4, "autodiff matches central finite differences", Criterion4},
      {5, "architecture invariants hold across seeded cases", Criterion5},
      {6, "a 1-mic checkpoint evaluates at 1/2/4/8 mics, deterministically", Criterion6},
      {7, "unsupervised toy training reaches 5 dB held-out SI-SNRi", Criterion7},
      {8, "semi-supervised stays within 0.5 dB of unsupervised", Criterion8},
      {9, "reference filters: tiny residual, exact 3-target partition", Criterion9},
      {10, "training is bit-reproducible and resume-exact", Criterion10},
  };
  return criteria;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"mcmixit acceptance gate"};
  std::string criteria_arg;
  app.add_option("--criteria", criteria_arg, "comma-separated criterion numbers (default: all)");
  CLI11_PARSE(app, argc, argv);

  std::vector<int> requested;
  if (criteria_arg.empty()) {
    for (const auto& c : AllCriteria()) requested.push_back(c.number);
  } else {
    std::stringstream ss(criteria_arg);
    std::string token;
    while (std::getline(ss, token, ',')) {
      try {
        requested.push_back(std::stoi(token));
      } catch (const std::exception&) {
        std::fprintf(stderr, "bad criterion number: %s\n", token.c_str());
        return 2;
      }
    }
  }

  bool all_ok = true;
  for (int number : requested) {
    const auto it = std::find_if(AllCriteria().begin(), AllCriteria().end(),
                                 [number](const Criterion& c) { return c.number == number; });
    if (it == AllCriteria().end()) {
      std::fprintf(stderr, "no criterion %d\n", number);
      return 2;
    }
    bool ok = false;
    try {
      ok = it->fn();
    } catch (const std::exception& e) {
      std::printf("    unexpected exception: %s\n", e.what());
    }
    std::printf("criterion %d: %s — %s\n", number, ok ? "PASS" : "FAIL", it->label);
    std::fflush(stdout);
    all_ok = all_ok && ok;
  }
  return all_ok ? 0 : 1;
}
