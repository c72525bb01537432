// mcmixit/signal.h

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

#ifndef MCMIXIT_SIGNAL_H_
#define MCMIXIT_SIGNAL_H_

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace mcmixit {

struct SignalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DegenerateReferenceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A T x C time-domain waveform. Stored planar (one contiguous block per
// channel) so per-channel DSP can work on spans.
class MultiChannelSignal {
 public:
  MultiChannelSignal() = default;
  MultiChannelSignal(int64_t num_frames, int num_channels, int sample_rate)
      : num_frames_(num_frames),
        num_channels_(num_channels),
        sample_rate_(sample_rate),
        data_(static_cast<size_t>(num_frames) * num_channels, 0.0) {
    if (num_frames < 1 || num_channels < 1 || sample_rate < 1) {
      throw SignalError("MultiChannelSignal: T, C, and sample rate must be >= 1");
    }
  }

  int64_t num_frames() const { return num_frames_; }
  int num_channels() const { return num_channels_; }
  int sample_rate() const { return sample_rate_; }

  double& at(int64_t t, int c) { return data_[static_cast<size_t>(c) * num_frames_ + t]; }
  double at(int64_t t, int c) const { return data_[static_cast<size_t>(c) * num_frames_ + t]; }

  std::span<double> channel(int c) {
    return {data_.data() + static_cast<size_t>(c) * num_frames_, static_cast<size_t>(num_frames_)};
  }
  std::span<const double> channel(int c) const {
    return {data_.data() + static_cast<size_t>(c) * num_frames_, static_cast<size_t>(num_frames_)};
  }

  bool SameShape(const MultiChannelSignal& other) const {
    return num_frames_ == other.num_frames_ && num_channels_ == other.num_channels_ &&
           sample_rate_ == other.sample_rate_;
  }

  // Addable only when T, C and sample rate all match.
  MultiChannelSignal& operator+=(const MultiChannelSignal& other) {
    if (!SameShape(other)) throw SignalError("signal addition: shape or sample rate mismatch");
    for (size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
    return *this;
  }

  bool AllFinite() const;

 private:
  int64_t num_frames_ = 0;
  int num_channels_ = 0;
  int sample_rate_ = 0;
  std::vector<double> data_;
};

inline MultiChannelSignal operator+(MultiChannelSignal lhs, const MultiChannelSignal& rhs) {
  lhs += rhs;
  return lhs;
}

// M separated multi-channel estimates (T x C x M). The same container also
// carries reference sets (then the member count is N).
class EstimateSet {
 public:
  EstimateSet() = default;
  EstimateSet(int64_t num_frames, int num_channels, int num_members, int sample_rate)
      : num_frames_(num_frames),
        num_channels_(num_channels),
        num_members_(num_members),
        sample_rate_(sample_rate),
        data_(static_cast<size_t>(num_frames) * num_channels * num_members, 0.0) {
    if (num_frames < 1 || num_channels < 1 || num_members < 1 || sample_rate < 1) {
      throw SignalError("EstimateSet: all dimensions must be >= 1");
    }
  }

  int64_t num_frames() const { return num_frames_; }
  int num_channels() const { return num_channels_; }
  int num_members() const { return num_members_; }
  int sample_rate() const { return sample_rate_; }

  std::span<double> channel(int member, int c) {
    return {data_.data() + (static_cast<size_t>(member) * num_channels_ + c) * num_frames_,
            static_cast<size_t>(num_frames_)};
  }
  std::span<const double> channel(int member, int c) const {
    return {data_.data() + (static_cast<size_t>(member) * num_channels_ + c) * num_frames_,
            static_cast<size_t>(num_frames_)};
  }

  MultiChannelSignal member(int m) const {
    MultiChannelSignal out(num_frames_, num_channels_, sample_rate_);
    for (int c = 0; c < num_channels_; ++c) {
      auto src = channel(m, c);
      auto dst = out.channel(c);
      for (int64_t t = 0; t < num_frames_; ++t) dst[t] = src[t];
    }
    return out;
  }

  void set_member(int m, const MultiChannelSignal& sig) {
    if (sig.num_frames() != num_frames_ || sig.num_channels() != num_channels_ ||
        sig.sample_rate() != sample_rate_) {
      throw SignalError("EstimateSet::set_member: shape mismatch");
    }
    for (int c = 0; c < num_channels_; ++c) {
      auto src = sig.channel(c);
      auto dst = channel(m, c);
      for (int64_t t = 0; t < num_frames_; ++t) dst[t] = src[t];
    }
  }

  // Per-channel sum over members.
  MultiChannelSignal Sum() const {
    MultiChannelSignal out(num_frames_, num_channels_, sample_rate_);
    for (int m = 0; m < num_members_; ++m) {
      for (int c = 0; c < num_channels_; ++c) {
        auto src = channel(m, c);
        auto dst = out.channel(c);
        for (int64_t t = 0; t < num_frames_; ++t) dst[t] += src[t];
      }
    }
    return out;
  }

 private:
  int64_t num_frames_ = 0;
  int num_channels_ = 0;
  int num_members_ = 0;
  int sample_rate_ = 0;
  std::vector<double> data_;
};

double Energy(std::span<const double> x);
double Dot(std::span<const double> a, std::span<const double> b);
double Rms(std::span<const double> x);

}  // namespace mcmixit

#endif  // MCMIXIT_SIGNAL_H_
