// src/synth/scene.cc

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

#include "mcmixit/synth/scene.h"

#include <algorithm>
#include <cmath>

namespace mcmixit {

namespace {

double Sinc(double u) {
  if (std::abs(u) < 1e-12) return 1.0;
  const double pu = M_PI * u;
  return std::sin(pu) / pu;
}

double HannWindow(double u, double half_width) {
  if (std::abs(u) >= half_width) return 0.0;
  return 0.5 * (1.0 + std::cos(M_PI * u / half_width));
}

void NormalizeRms(std::vector<double>& x, double target_rms) {
  double energy = 0.0;
  for (double v : x) energy += v * v;
  const double rms = std::sqrt(energy / static_cast<double>(x.size()));
  if (rms <= 0.0) return;
  const double scale = target_rms / rms;
  for (double& v : x) v *= scale;
}

}  // namespace

std::vector<double> FractionalDelay(const std::vector<double>& x, double delay, int64_t samples) {
  if (delay < 0.0) throw SynthError("fractional delay must be >= 0");
  constexpr int kHalf = kSincTaps / 2;
  const double floor_delay = std::floor(delay);
  const int64_t int_delay = static_cast<int64_t>(floor_delay);
  const double mu = delay - floor_delay;
  const int64_t len = static_cast<int64_t>(x.size());
  std::vector<double> y(static_cast<size_t>(samples), 0.0);
  double taps[kSincTaps];
  if (mu == 0.0) {
    // Integer delay: pass samples through exactly.
    for (int64_t t = 0; t < samples; ++t) {
      const int64_t s = t - int_delay;
      y[static_cast<size_t>(t)] = (s >= 0 && s < len) ? x[static_cast<size_t>(s)] : 0.0;
    }
    return y;
  }
  for (int k = 0; k < kSincTaps; ++k) {
    const double u = static_cast<double>(kHalf - k) - mu;
    taps[k] = Sinc(u) * HannWindow(u, kHalf);
  }
  for (int64_t t = 0; t < samples; ++t) {
    const int64_t base = t - int_delay - kHalf;
    double acc = 0.0;
    for (int k = 0; k < kSincTaps; ++k) {
      const int64_t s = base + k;
      if (s >= 0 && s < len) acc += taps[k] * x[static_cast<size_t>(s)];
    }
    y[static_cast<size_t>(t)] = acc;
  }
  return y;
}

std::vector<double> CircularArrayDelays(int num_mics, double azimuth_radians, int sample_rate) {
  std::vector<double> delays(static_cast<size_t>(num_mics));
  const double scale = kArrayRadiusMeters / kSpeedOfSound * static_cast<double>(sample_rate);
  for (int c = 0; c < num_mics; ++c) {
    const double mic_angle = 2.0 * M_PI * static_cast<double>(c) / static_cast<double>(num_mics);
    delays[static_cast<size_t>(c)] =
        kBaseDelaySamples - scale * std::cos(azimuth_radians - mic_angle);
  }
  return delays;
}

std::vector<double> ExponentialFir(Rng& rng, int length, double decay_taps, double tail_gain) {
  if (length < 1 || length > kMaxSpatialFirLen) throw SynthError("bad spatial FIR length");
  std::vector<double> taps(static_cast<size_t>(length), 0.0);
  taps[0] = 1.0;
  for (int k = 1; k < length; ++k) {
    taps[static_cast<size_t>(k)] =
        tail_gain * std::exp(-static_cast<double>(k) / decay_taps) * rng.NextGaussian();
  }
  return taps;
}

std::vector<double> ToneComplex(Rng& rng, int64_t samples, int sample_rate) {
  const double fundamental = rng.Uniform(150.0, 400.0);
  const int harmonics = 3 + static_cast<int>(rng.NextBelow(4));  // 3..6
  std::vector<double> amps(static_cast<size_t>(harmonics));
  std::vector<double> phases(static_cast<size_t>(harmonics));
  for (int h = 0; h < harmonics; ++h) {
    amps[static_cast<size_t>(h)] = 1.0 / std::pow(static_cast<double>(h + 1), 0.7);
    phases[static_cast<size_t>(h)] = rng.Uniform(0.0, 2.0 * M_PI);
  }
  std::vector<double> x(static_cast<size_t>(samples), 0.0);
  const double w0 = 2.0 * M_PI * fundamental / static_cast<double>(sample_rate);
  for (int64_t t = 0; t < samples; ++t) {
    double acc = 0.0;
    for (int h = 0; h < harmonics; ++h) {
      acc += amps[static_cast<size_t>(h)] *
             std::sin(w0 * static_cast<double>(h + 1) * static_cast<double>(t) +
                      phases[static_cast<size_t>(h)]);
    }
    x[static_cast<size_t>(t)] = acc;
  }
  NormalizeRms(x, 0.1);
  return x;
}

std::vector<double> ModulatedNoise(Rng& rng, int64_t samples, int sample_rate) {
  const double am_rate = rng.Uniform(2.0, 8.0);
  const double am_phase = rng.Uniform(0.0, 2.0 * M_PI);
  const double wm = 2.0 * M_PI * am_rate / static_cast<double>(sample_rate);
  std::vector<double> x(static_cast<size_t>(samples));
  for (int64_t t = 0; t < samples; ++t) {
    const double env = 0.55 + 0.45 * std::sin(wm * static_cast<double>(t) + am_phase);
    x[static_cast<size_t>(t)] = env * rng.NextGaussian();
  }
  NormalizeRms(x, 0.1);
  return x;
}

RenderResult RenderScene(const Scene& scene, int num_mics, int64_t samples, int sample_rate) {
  if (scene.sources.empty()) throw SynthError("render: empty source list");
  if (num_mics < 1 || samples < 1) throw SynthError("render: bad shape");
  RenderResult out{MultiChannelSignal(samples, num_mics, sample_rate), {}};
  out.images.reserve(scene.sources.size());
  for (const auto& src : scene.sources) {
    if (static_cast<int64_t>(src.signal.size()) < samples) {
      throw SynthError("render: source signal shorter than scene");
    }
    if (static_cast<int>(src.delays.size()) != num_mics) {
      throw SynthError("render: source needs one delay per mic");
    }
    if (!src.spatial_fir.empty() && static_cast<int>(src.spatial_fir.size()) != num_mics) {
      throw SynthError("render: spatial FIR needs one tap vector per mic");
    }
    if (!(src.gain > 0.0)) throw SynthError("render: gain must be positive");
    MultiChannelSignal image(samples, num_mics, sample_rate);
    for (int c = 0; c < num_mics; ++c) {
      const double delay = src.delays[static_cast<size_t>(c)];
      if (delay >= static_cast<double>(samples)) throw SynthError("render: delay exceeds length");
      auto delayed = FractionalDelay(src.signal, delay, samples);
      auto ch = image.channel(c);
      if (src.spatial_fir.empty()) {
        for (int64_t t = 0; t < samples; ++t) {
          ch[static_cast<size_t>(t)] = src.gain * delayed[static_cast<size_t>(t)];
        }
      } else {
        const auto& fir = src.spatial_fir[static_cast<size_t>(c)];
        if (fir.empty() || static_cast<int>(fir.size()) > kMaxSpatialFirLen) {
          throw SynthError("render: bad spatial FIR length");
        }
        for (int64_t t = 0; t < samples; ++t) {
          double acc = 0.0;
          const int64_t kmax = std::min<int64_t>(static_cast<int64_t>(fir.size()) - 1, t);
          for (int64_t k = 0; k <= kmax; ++k) {
            acc += fir[static_cast<size_t>(k)] * delayed[static_cast<size_t>(t - k)];
          }
          ch[static_cast<size_t>(t)] = src.gain * acc;
        }
      }
    }
    out.mixture += image;
    out.images.push_back(std::move(image));
  }
  if (scene.noise_level > 0.0) {
    double energy = 0.0;
    for (int c = 0; c < num_mics; ++c) {
      for (double v : out.mixture.channel(c)) energy += v * v;
    }
    const double rms = std::sqrt(energy / static_cast<double>(samples * num_mics));
    const double sigma = scene.noise_level * rms;
    Rng rng(DeriveSeed(scene.seed, /*stream=*/0x4015E, 0));
    for (int c = 0; c < num_mics; ++c) {
      auto ch = out.mixture.channel(c);
      for (auto& v : ch) v += sigma * rng.NextGaussian();
    }
  }
  return out;
}

}  // namespace mcmixit
