// mcmixit/wav.cc

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

#include "mcmixit/wav.h"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <vector>

namespace mcmixit {

namespace {

constexpr uint16_t kFormatPcm = 0x0001;
constexpr uint16_t kFormatIeeeFloat = 0x0003;
constexpr uint16_t kFormatExtensible = 0xFFFE;

uint32_t ReadU32(const uint8_t* p) {
  return static_cast<uint32_t>(p[0]) | (static_cast<uint32_t>(p[1]) << 8) |
         (static_cast<uint32_t>(p[2]) << 16) | (static_cast<uint32_t>(p[3]) << 24);
}

uint16_t ReadU16(const uint8_t* p) {
  return static_cast<uint16_t>(p[0] | (p[1] << 8));
}

void PutU32(std::vector<uint8_t>& out, uint32_t v) {
  out.push_back(v & 0xff);
  out.push_back((v >> 8) & 0xff);
  out.push_back((v >> 16) & 0xff);
  out.push_back((v >> 24) & 0xff);
}

void PutU16(std::vector<uint8_t>& out, uint16_t v) {
  out.push_back(v & 0xff);
  out.push_back((v >> 8) & 0xff);
}

}  // namespace

MultiChannelSignal ReadWav(const std::string& path) {
  std::ifstream file(path, std::ios::binary);
  if (!file) throw WavError("cannot open WAV file: " + path);
  std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(file)),
                             std::istreambuf_iterator<char>());
  if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
      std::memcmp(bytes.data() + 8, "WAVE", 4) != 0) {
    throw WavError("not a RIFF/WAVE file: " + path);
  }

  uint16_t format = 0, channels = 0, bits = 0;
  uint32_t sample_rate = 0;
  const uint8_t* data = nullptr;
  uint32_t data_size = 0;
  bool have_fmt = false;

  size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const uint8_t* hdr = bytes.data() + pos;
    const uint32_t chunk_size = ReadU32(hdr + 4);
    const size_t body = pos + 8;
    if (body + chunk_size > bytes.size()) throw WavError("truncated WAV chunk: " + path);
    if (std::memcmp(hdr, "fmt ", 4) == 0) {
      if (chunk_size < 16) throw WavError("malformed fmt chunk: " + path);
      const uint8_t* f = bytes.data() + body;
      format = ReadU16(f);
      channels = ReadU16(f + 2);
      sample_rate = ReadU32(f + 4);
      bits = ReadU16(f + 14);
      if (format == kFormatExtensible && chunk_size >= 40) {
        // Sub-format GUID starts with the effective format tag.
        format = ReadU16(f + 24);
      }
      have_fmt = true;
    } else if (std::memcmp(hdr, "data", 4) == 0) {
      data = bytes.data() + body;
      data_size = chunk_size;
    }
    pos = body + chunk_size + (chunk_size & 1);  // chunks are word-aligned
  }

  if (!have_fmt || data == nullptr) throw WavError("missing fmt or data chunk: " + path);
  if (channels < 1 || sample_rate < 1) throw WavError("malformed WAV header: " + path);

  const bool pcm16 = (format == kFormatPcm && bits == 16);
  const bool float32 = (format == kFormatIeeeFloat && bits == 32);
  if (!pcm16 && !float32) {
    throw WavError("unsupported WAV encoding (need 16-bit PCM or 32-bit float): " + path);
  }

  const uint32_t bytes_per_sample = bits / 8;
  const uint32_t frame_size = bytes_per_sample * channels;
  const int64_t num_frames = data_size / frame_size;
  if (num_frames < 1) throw WavError("WAV file holds no frames: " + path);

  MultiChannelSignal signal(num_frames, channels, static_cast<int>(sample_rate));
  for (int64_t t = 0; t < num_frames; ++t) {
    for (int c = 0; c < channels; ++c) {
      const uint8_t* s = data + t * frame_size + c * bytes_per_sample;
      if (pcm16) {
        const int16_t v = static_cast<int16_t>(s[0] | (s[1] << 8));
        signal.at(t, c) = static_cast<double>(v) / 32768.0;
      } else {
        uint32_t u = ReadU32(s);
        float f;
        std::memcpy(&f, &u, sizeof(f));
        signal.at(t, c) = static_cast<double>(f);
      }
    }
  }
  return signal;
}

void WriteWav(const std::string& path, const MultiChannelSignal& signal, WavEncoding encoding) {
  const int channels = signal.num_channels();
  const int64_t num_frames = signal.num_frames();
  const uint16_t bits = encoding == WavEncoding::kPcm16 ? 16 : 32;
  const uint16_t format = encoding == WavEncoding::kPcm16 ? kFormatPcm : kFormatIeeeFloat;
  const uint32_t bytes_per_sample = bits / 8;
  const uint32_t block_align = bytes_per_sample * channels;
  const uint32_t data_size = static_cast<uint32_t>(num_frames * block_align);

  std::vector<uint8_t> out;
  out.reserve(44 + data_size);
  out.insert(out.end(), {'R', 'I', 'F', 'F'});
  PutU32(out, 36 + data_size);
  out.insert(out.end(), {'W', 'A', 'V', 'E'});
  out.insert(out.end(), {'f', 'm', 't', ' '});
  PutU32(out, 16);
  PutU16(out, format);
  PutU16(out, static_cast<uint16_t>(channels));
  PutU32(out, static_cast<uint32_t>(signal.sample_rate()));
  PutU32(out, static_cast<uint32_t>(signal.sample_rate()) * block_align);
  PutU16(out, static_cast<uint16_t>(block_align));
  PutU16(out, bits);
  out.insert(out.end(), {'d', 'a', 't', 'a'});
  PutU32(out, data_size);

  for (int64_t t = 0; t < num_frames; ++t) {
    for (int c = 0; c < channels; ++c) {
      const double v = signal.at(t, c);
      if (encoding == WavEncoding::kPcm16) {
        const double scaled = std::clamp(v, -1.0, 32767.0 / 32768.0) * 32768.0;
        const int16_t q = static_cast<int16_t>(std::lrint(scaled));
        PutU16(out, static_cast<uint16_t>(q));
      } else {
        const float f = static_cast<float>(v);
        uint32_t u;
        std::memcpy(&u, &f, sizeof(u));
        PutU32(out, u);
      }
    }
  }

  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) throw WavError("cannot open WAV file for writing: " + path);
  file.write(reinterpret_cast<const char*>(out.data()), static_cast<std::streamsize>(out.size()));
  if (!file) throw WavError("failed writing WAV file: " + path);
}

}  // namespace mcmixit
