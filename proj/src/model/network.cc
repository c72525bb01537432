// src/model/network.cc

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

#include "mcmixit/model/network.h"

#include <cmath>

#include "mcmixit/rng.h"

namespace mcmixit {

namespace {

ad::Tensor GlorotMatrix(Rng& rng, int64_t rows, int64_t cols) {
  auto t = ad::Tensor::Leaf({rows, cols}, /*requires_grad=*/true);
  const double limit = std::sqrt(6.0 / static_cast<double>(rows + cols));
  for (auto& x : t.value()) x = rng.Uniform(-limit, limit);
  return t;
}

ad::Tensor ZeroVector(int64_t n) { return ad::Tensor::Leaf({n}, /*requires_grad=*/true); }

ad::Tensor OnesVector(int64_t n) {
  auto t = ad::Tensor::Leaf({n}, /*requires_grad=*/true);
  for (auto& x : t.value()) x = 1.0;
  return t;
}

ad::Tensor DenseCols(const ad::Tensor& w, const ad::Tensor& x, const ad::Tensor& b) {
  return ad::AddColBroadcast(ad::MatMul(w, x), b);
}

}  // namespace

std::vector<std::pair<std::string, ad::Tensor>> ModelParams::NamedTensors() const {
  std::vector<std::pair<std::string, ad::Tensor>> out;
  out.emplace_back("encoder", encoder);
  out.emplace_back("bottleneck.w", bottleneck_w);
  out.emplace_back("bottleneck.b", bottleneck_b);
  for (size_t s = 0; s < blocks.size(); ++s) {
    const std::string sb = "superblock" + std::to_string(s);
    for (size_t b = 0; b < blocks[s].size(); ++b) {
      const std::string prefix = sb + ".block" + std::to_string(b) + ".";
      const auto& blk = blocks[s][b];
      out.emplace_back(prefix + "expand_w", blk.expand_w);
      out.emplace_back(prefix + "expand_b", blk.expand_b);
      out.emplace_back(prefix + "conv_taps", blk.conv_taps);
      out.emplace_back(prefix + "norm_scale", blk.norm_scale);
      out.emplace_back(prefix + "norm_bias", blk.norm_bias);
      out.emplace_back(prefix + "project_w", blk.project_w);
      out.emplace_back(prefix + "project_b", blk.project_b);
    }
    const std::string prefix = sb + ".tac.";
    const auto& tac = tacs[s];
    out.emplace_back(prefix + "transform_w", tac.transform_w);
    out.emplace_back(prefix + "transform_b", tac.transform_b);
    out.emplace_back(prefix + "average_w", tac.average_w);
    out.emplace_back(prefix + "average_b", tac.average_b);
    out.emplace_back(prefix + "project_w", tac.project_w);
    out.emplace_back(prefix + "project_b", tac.project_b);
  }
  for (size_t m = 0; m < masks.size(); ++m) {
    const std::string prefix = "mask" + std::to_string(m) + ".";
    out.emplace_back(prefix + "w", masks[m].w);
    out.emplace_back(prefix + "b", masks[m].b);
  }
  out.emplace_back("decoder", decoder);
  return out;
}

int64_t ModelParams::ParameterCount() const {
  int64_t total = 0;
  for (const auto& [name, t] : NamedTensors()) total += t.size();
  return total;
}

ModelParams InitParams(const ModelConfig& config, uint64_t seed) {
  config.Check();
  ModelParams p;
  p.config = config;
  const int64_t f = config.encoder_bases;
  const int64_t k = config.bottleneck_dim;
  const int64_t h = config.conv_channels;
  const int64_t tac = config.tac_dim;
  Rng rng(DeriveSeed(seed, /*stream=*/0xC0DE, 0));
  p.encoder = GlorotMatrix(rng, f, config.window);
  p.bottleneck_w = GlorotMatrix(rng, k, f);
  p.bottleneck_b = ZeroVector(k);
  p.blocks.resize(static_cast<size_t>(config.num_superblocks));
  p.tacs.resize(static_cast<size_t>(config.num_superblocks));
  for (int s = 0; s < config.num_superblocks; ++s) {
    auto& sb = p.blocks[static_cast<size_t>(s)];
    sb.resize(static_cast<size_t>(config.blocks_per_superblock));
    for (int b = 0; b < config.blocks_per_superblock; ++b) {
      auto& blk = sb[static_cast<size_t>(b)];
      blk.expand_w = GlorotMatrix(rng, h, k);
      blk.expand_b = ZeroVector(h);
      blk.conv_taps = GlorotMatrix(rng, h, config.kernel_width);
      blk.norm_scale = OnesVector(h);
      blk.norm_bias = ZeroVector(h);
      blk.project_w = GlorotMatrix(rng, k, h);
      blk.project_b = ZeroVector(k);
    }
    auto& t = p.tacs[static_cast<size_t>(s)];
    t.transform_w = GlorotMatrix(rng, tac, k);
    t.transform_b = ZeroVector(tac);
    t.average_w = GlorotMatrix(rng, tac, k);
    t.average_b = ZeroVector(tac);
    t.project_w = GlorotMatrix(rng, k, 2 * tac);
    t.project_b = ZeroVector(k);
  }
  p.masks.resize(static_cast<size_t>(config.num_outputs));
  // Mask heads start at zero, so every output begins as an exact duplicate
  // (the consistency projection maps them all to input / M).  Outputs that
  // keep receiving the same assigned mixture then get identical gradients
  // and stay tied: surplus outputs emit scaled copies of a source instead
  // of splitting it, and heads diverge only once an assignment actually
  // tells them apart.
  for (auto& m : p.masks) {
    m.w = ad::Tensor::Leaf({f, k}, /*requires_grad=*/true);
    m.b = ZeroVector(f);
  }
  p.decoder = GlorotMatrix(rng, config.window, f);
  return p;
}

ModelParams RemoveTac(const ModelParams& params) {
  ModelParams out = params;
  out.tac_bypassed = true;
  return out;
}

ad::Tensor Encode(const ad::Tensor& x, const ModelParams& params) {
  auto frames = ad::Frame(x, params.config.window, params.config.hop);
  return ad::Relu(ad::MatMul(params.encoder, frames));
}

std::vector<ad::Tensor> TacLayer(const std::vector<ad::Tensor>& features, const TacParams& tac) {
  if (features.empty()) throw ModelError("tac_layer: no channels");
  const auto& shape = features.front().shape();
  for (const auto& f : features) {
    if (f.shape() != shape) throw ModelError("tac_layer: channel shape mismatch");
  }
  const int c = static_cast<int>(features.size());
  std::vector<ad::Tensor> transformed;
  transformed.reserve(features.size());
  ad::Tensor avg;
  for (const auto& f : features) {
    transformed.push_back(ad::Relu(DenseCols(tac.transform_w, f, tac.transform_b)));
    auto a = ad::Relu(DenseCols(tac.average_w, f, tac.average_b));
    avg = avg.defined() ? ad::Add(avg, a) : a;
  }
  avg = ad::ScalarMul(avg, 1.0 / static_cast<double>(c));
  std::vector<ad::Tensor> out;
  out.reserve(features.size());
  for (int i = 0; i < c; ++i) {
    auto q = ad::ConcatRows(transformed[static_cast<size_t>(i)], avg);
    auto o = DenseCols(tac.project_w, q, tac.project_b);
    out.push_back(ad::Add(features[static_cast<size_t>(i)], o));
  }
  return out;
}

EstimateSet ForwardResult::ToEstimateSet() const {
  const int m = static_cast<int>(waveforms.size());
  const int c = static_cast<int>(waveforms.front().size());
  EstimateSet est(samples, c, m, sample_rate);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < c; ++j) {
      const auto& v = waveforms[static_cast<size_t>(i)][static_cast<size_t>(j)].value();
      auto ch = est.channel(i, j);
      std::copy(v.begin(), v.end(), ch.begin());
    }
  }
  return est;
}

ForwardResult Forward(const MultiChannelSignal& signal, const ModelParams& params) {
  const ModelConfig& cfg = params.config;
  cfg.Check();
  const int64_t t = signal.num_frames();
  const int c = signal.num_channels();
  if (t < cfg.window) throw ModelError("forward: signal shorter than one analysis window");
  const int m = cfg.num_outputs;

  std::vector<ad::Tensor> inputs;   // [c], constants
  std::vector<ad::Tensor> encoded;  // [c], F x L
  std::vector<ad::Tensor> feats;    // [c], K x L
  inputs.reserve(static_cast<size_t>(c));
  encoded.reserve(static_cast<size_t>(c));
  feats.reserve(static_cast<size_t>(c));
  for (int ch = 0; ch < c; ++ch) {
    auto span = signal.channel(ch);
    auto x = ad::Tensor::Constant(std::vector<double>(span.begin(), span.end()), {t});
    inputs.push_back(x);
    auto e = Encode(x, params);
    encoded.push_back(e);
    feats.push_back(DenseCols(params.bottleneck_w, e, params.bottleneck_b));
  }

  for (int s = 0; s < cfg.num_superblocks; ++s) {
    for (int b = 0; b < cfg.blocks_per_superblock; ++b) {
      const auto& blk = params.blocks[static_cast<size_t>(s)][static_cast<size_t>(b)];
      const int64_t dilation = int64_t{1} << b;
      for (int ch = 0; ch < c; ++ch) {
        auto& p = feats[static_cast<size_t>(ch)];
        auto hdn = ad::Relu(DenseCols(blk.expand_w, p, blk.expand_b));
        hdn = ad::DilatedDepthwiseConv(hdn, blk.conv_taps, dilation);
        hdn = ad::FeatureNorm(hdn, blk.norm_scale, blk.norm_bias);
        auto out = DenseCols(blk.project_w, hdn, blk.project_b);
        p = ad::Add(p, out);
      }
    }
    if (!params.tac_bypassed) {
      feats = TacLayer(feats, params.tacs[static_cast<size_t>(s)]);
    }
  }

  ForwardResult result;
  result.samples = t;
  result.sample_rate = signal.sample_rate();
  result.waveforms.assign(static_cast<size_t>(m), std::vector<ad::Tensor>());
  for (int i = 0; i < m; ++i) {
    result.waveforms[static_cast<size_t>(i)].reserve(static_cast<size_t>(c));
  }
  for (int ch = 0; ch < c; ++ch) {
    std::vector<ad::Tensor> per_source;
    per_source.reserve(static_cast<size_t>(m));
    for (int i = 0; i < m; ++i) {
      const auto& head = params.masks[static_cast<size_t>(i)];
      auto mask = ad::Sigmoid(DenseCols(head.w, feats[static_cast<size_t>(ch)], head.b));
      auto masked = ad::Mul(mask, encoded[static_cast<size_t>(ch)]);
      auto frames = ad::MatMul(params.decoder, masked);
      auto wave = ad::OverlapAdd(frames, cfg.hop);
      per_source.push_back(ad::PadTo(wave, t));
    }
    // Mixture consistency: distribute the reconstruction gap uniformly.
    ad::Tensor sum;
    for (const auto& w : per_source) sum = sum.defined() ? ad::Add(sum, w) : w;
    auto resid = ad::ScalarMul(ad::Sub(inputs[static_cast<size_t>(ch)], sum),
                               1.0 / static_cast<double>(m));
    for (int i = 0; i < m; ++i) {
      result.waveforms[static_cast<size_t>(i)].push_back(
          ad::Add(per_source[static_cast<size_t>(i)], resid));
    }
  }
  return result;
}

}  // namespace mcmixit
