// mcmixit/rng.h

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

#ifndef MCMIXIT_RNG_H_
#define MCMIXIT_RNG_H_

#include <array>
#include <cmath>
#include <cstdint>

namespace mcmixit {

// splitmix64 step; also used to derive per-example seeds.
inline uint64_t SplitMix64(uint64_t& state) {
  uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Deterministic across platforms and standard libraries, unlike the
// std <random> distributions. State is 4x u64, serialized in checkpoints.
class Rng {
 public:
  explicit Rng(uint64_t seed) { Seed(seed); }
  Rng() : Rng(0) {}

  void Seed(uint64_t seed) {
    uint64_t sm = seed;
    for (auto& s : state_) s = SplitMix64(sm);
  }

  uint64_t NextU64() {
    const uint64_t result = Rotl(state_[0] + state_[3], 23) + state_[0];
    const uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = Rotl(state_[3], 45);
    return result;
  }

  // Uniform in [0, 1), 53-bit resolution.
  double NextDouble() {
    return static_cast<double>(NextU64() >> 11) * 0x1.0p-53;
  }

  double Uniform(double lo, double hi) { return lo + (hi - lo) * NextDouble(); }

  // Uniform integer in [0, n).
  uint64_t NextBelow(uint64_t n) { return NextU64() % n; }

  // Box-Muller, cosine branch only, so one normal consumes exactly two
  // uniforms and the state stays self-describing.
  double NextGaussian() {
    double u1 = NextDouble();
    double u2 = NextDouble();
    while (u1 <= 0.0) u1 = NextDouble();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925287 * u2);
  }

  std::array<uint64_t, 4> state() const { return state_; }
  void set_state(const std::array<uint64_t, 4>& s) { state_ = s; }

 private:
  static uint64_t Rotl(uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
  std::array<uint64_t, 4> state_{};
};

inline uint64_t Rotr(uint64_t x, int k) { return (x >> k) | (x << (64 - k)); }

// Stable mixing of a base seed with stream/index coordinates.
inline uint64_t DeriveSeed(uint64_t base, uint64_t stream, uint64_t index) {
  uint64_t s = base;
  uint64_t a = SplitMix64(s);
  s ^= stream * 0x9e3779b97f4a7c15ULL;
  uint64_t b = SplitMix64(s);
  s ^= index * 0xd1b54a32d192ed03ULL;
  uint64_t c = SplitMix64(s);
  return a ^ (b + 0x165667b19e3779f9ULL) ^ Rotr(c, 17);
}

}  // namespace mcmixit

#endif  // MCMIXIT_RNG_H_
