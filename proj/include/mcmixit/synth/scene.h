// include/mcmixit/synth/scene.h

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

#ifndef MCMIXIT_SYNTH_SCENE_H_
#define MCMIXIT_SYNTH_SCENE_H_

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "mcmixit/rng.h"
#include "mcmixit/signal.h"

namespace mcmixit {

class SynthError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// 16-tap windowed-sinc fractional delay.
inline constexpr int kSincTaps = 16;
// Spatial FIRs stay short; no room simulation.
inline constexpr int kMaxSpatialFirLen = 256;
inline constexpr double kArrayRadiusMeters = 0.1;
inline constexpr double kSpeedOfSound = 343.0;
// Baseline delay keeping every mic delay positive and, together with the
// interpolator half-width, causal as an FIR of the dry source.
inline constexpr double kBaseDelaySamples = 16.0;

struct SceneSource {
  int id = 0;
  std::vector<double> signal;  // dry mono waveform, length >= T
  double gain = 1.0;
  std::vector<double> delays;  // per-mic fractional-sample delays, >= 0
  // Optional per-mic FIR applied after delay and gain; empty = none,
  // otherwise one tap vector per mic, each <= kMaxSpatialFirLen.
  std::vector<std::vector<double>> spatial_fir;
};

struct Scene {
  std::vector<SceneSource> sources;
  double noise_level = 0.0;  // noise RMS relative to the summed-image RMS
  uint64_t seed = 0;
};

struct RenderResult {
  MultiChannelSignal mixture;
  std::vector<MultiChannelSignal> images;  // per source, T x C
};

// Renders the scene at C mics: per-source fractional delay + gain
// (+ optional FIR), summed, plus seeded Gaussian noise.  Bit-deterministic in
// (scene, C, T, sample_rate).
RenderResult RenderScene(const Scene& scene, int num_mics, int64_t samples, int sample_rate);

// y[t] = x(t - delay) via 16-tap windowed-sinc interpolation; out-of-range
// source samples read as zero.  Integer delays are exact.
std::vector<double> FractionalDelay(const std::vector<double>& x, double delay, int64_t samples);

// Per-mic delays for a far-field plane wave hitting a circular array of
// equally spaced mics, offset by kBaseDelaySamples.
std::vector<double> CircularArrayDelays(int num_mics, double azimuth_radians, int sample_rate);

// Unit direct tap followed by exponentially decaying random taps.
std::vector<double> ExponentialFir(Rng& rng, int length, double decay_taps = 32.0,
                                   double tail_gain = 0.25);

// Harmonic stack with random fundamental, harmonic count, and phases.
std::vector<double> ToneComplex(Rng& rng, int64_t samples, int sample_rate);

// Amplitude-modulated Gaussian noise burst ("speech-like").
std::vector<double> ModulatedNoise(Rng& rng, int64_t samples, int sample_rate);

}  // namespace mcmixit

#endif  // MCMIXIT_SYNTH_SCENE_H_
