// mcmixit/wav.h

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

#ifndef MCMIXIT_WAV_H_
#define MCMIXIT_WAV_H_

#include <string>

#include "mcmixit/signal.h"

namespace mcmixit {

struct WavError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class WavEncoding {
  kPcm16,    // 16-bit signed integer
  kFloat32,  // 32-bit IEEE float
};

// Reads a RIFF/WAVE file (PCM16 or float32, any channel count). PCM samples
// are scaled to [-1, 1) by 1/32768. Throws WavError on unsupported encodings.
MultiChannelSignal ReadWav(const std::string& path);

// Writes a RIFF/WAVE file; channel c of the signal maps to WAV channel c.
// Float32 is the default since it round-trips internal values losslessly.
void WriteWav(const std::string& path, const MultiChannelSignal& signal,
              WavEncoding encoding = WavEncoding::kFloat32);

}  // namespace mcmixit

#endif  // MCMIXIT_WAV_H_
