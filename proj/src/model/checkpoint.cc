// src/model/checkpoint.cc

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

#include "mcmixit/model/checkpoint.h"

#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

namespace mcmixit {

namespace {

constexpr char kMagic[8] = {'M', 'C', 'M', 'X', 'C', 'K', 'P', 'T'};
constexpr uint32_t kVersion = 1;

void PutU32(std::string& out, uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void PutU64(std::string& out, uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void PutI64(std::string& out, int64_t v) { PutU64(out, static_cast<uint64_t>(v)); }

void PutF64(std::string& out, double v) {
  uint64_t bits;
  std::memcpy(&bits, &v, sizeof(bits));
  PutU64(out, bits);
}

class Reader {
 public:
  explicit Reader(std::string data) : data_(std::move(data)) {}

  uint32_t GetU32() {
    Need(4);
    uint32_t v = 0;
    for (int i = 0; i < 4; ++i) {
      v |= static_cast<uint32_t>(static_cast<unsigned char>(data_[pos_ + static_cast<size_t>(i)]))
           << (8 * i);
    }
    pos_ += 4;
    return v;
  }

  uint64_t GetU64() {
    Need(8);
    uint64_t v = 0;
    for (int i = 0; i < 8; ++i) {
      v |= static_cast<uint64_t>(static_cast<unsigned char>(data_[pos_ + static_cast<size_t>(i)]))
           << (8 * i);
    }
    pos_ += 8;
    return v;
  }

  int64_t GetI64() { return static_cast<int64_t>(GetU64()); }

  double GetF64() {
    const uint64_t bits = GetU64();
    double v;
    std::memcpy(&v, &bits, sizeof(v));
    return v;
  }

  std::string GetBytes(size_t n) {
    Need(n);
    std::string s = data_.substr(pos_, n);
    pos_ += n;
    return s;
  }

  bool AtEnd() const { return pos_ == data_.size(); }

 private:
  void Need(size_t n) {
    if (pos_ + n > data_.size()) throw CheckpointError("checkpoint truncated");
  }

  std::string data_;
  size_t pos_ = 0;
};

void PutConfig(std::string& out, const ModelConfig& c) {
  PutU32(out, static_cast<uint32_t>(c.num_superblocks));
  PutU32(out, static_cast<uint32_t>(c.blocks_per_superblock));
  PutU32(out, static_cast<uint32_t>(c.kernel_width));
  PutU32(out, static_cast<uint32_t>(c.window));
  PutU32(out, static_cast<uint32_t>(c.hop));
  PutU32(out, static_cast<uint32_t>(c.bottleneck_dim));
  PutU32(out, static_cast<uint32_t>(c.conv_channels));
  PutU32(out, static_cast<uint32_t>(c.tac_dim));
  PutU32(out, static_cast<uint32_t>(c.num_outputs));
  PutU32(out, static_cast<uint32_t>(c.encoder_bases));
}

ModelConfig GetConfig(Reader& r) {
  ModelConfig c;
  c.num_superblocks = static_cast<int>(r.GetU32());
  c.blocks_per_superblock = static_cast<int>(r.GetU32());
  c.kernel_width = static_cast<int>(r.GetU32());
  c.window = static_cast<int>(r.GetU32());
  c.hop = static_cast<int>(r.GetU32());
  c.bottleneck_dim = static_cast<int>(r.GetU32());
  c.conv_channels = static_cast<int>(r.GetU32());
  c.tac_dim = static_cast<int>(r.GetU32());
  c.num_outputs = static_cast<int>(r.GetU32());
  c.encoder_bases = static_cast<int>(r.GetU32());
  return c;
}

}  // namespace

void SaveCheckpoint(const std::string& path, const Checkpoint& checkpoint) {
  std::string out;
  out.append(kMagic, sizeof(kMagic));
  PutU32(out, kVersion);
  PutConfig(out, checkpoint.params.config);
  out.push_back(checkpoint.params.tac_bypassed ? 1 : 0);

  const auto named = checkpoint.params.NamedTensors();
  PutU32(out, static_cast<uint32_t>(named.size()));
  for (const auto& [name, tensor] : named) {
    PutU32(out, static_cast<uint32_t>(name.size()));
    out.append(name);
    PutU32(out, static_cast<uint32_t>(tensor.shape().size()));
    for (int64_t d : tensor.shape()) PutI64(out, d);
    for (double v : tensor.value()) PutF64(out, v);
  }

  out.push_back(checkpoint.optimizer ? 1 : 0);
  if (checkpoint.optimizer) {
    const auto& opt = *checkpoint.optimizer;
    if (opt.first_moment.size() != named.size() || opt.second_moment.size() != named.size()) {
      throw CheckpointError("optimizer snapshot does not align with parameter tensors");
    }
    PutU64(out, opt.step);
    for (size_t i = 0; i < named.size(); ++i) {
      for (double v : opt.first_moment[i]) PutF64(out, v);
      for (double v : opt.second_moment[i]) PutF64(out, v);
    }
  }

  out.push_back(checkpoint.trainer ? 1 : 0);
  if (checkpoint.trainer) {
    const auto& tr = *checkpoint.trainer;
    PutU64(out, tr.step);
    PutU64(out, tr.unsup_index);
    PutU64(out, tr.sup_index);
    for (uint64_t w : tr.rng_state) PutU64(out, w);
  }

  const std::string tmp = path + ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw CheckpointError("cannot open for write: " + tmp);
    f.write(out.data(), static_cast<std::streamsize>(out.size()));
    if (!f) throw CheckpointError("write failed: " + tmp);
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw CheckpointError("rename failed: " + path + ": " + ec.message());
}

Checkpoint LoadCheckpoint(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw CheckpointError("cannot open checkpoint: " + path);
  std::ostringstream buf;
  buf << f.rdbuf();
  Reader r(buf.str());

  const std::string magic = r.GetBytes(sizeof(kMagic));
  if (std::memcmp(magic.data(), kMagic, sizeof(kMagic)) != 0) {
    throw CheckpointError("bad magic: not a checkpoint file: " + path);
  }
  const uint32_t version = r.GetU32();
  if (version != kVersion) {
    throw CheckpointError("unsupported checkpoint version " + std::to_string(version));
  }

  Checkpoint ck;
  const ModelConfig config = GetConfig(r);
  config.Check();
  const bool bypassed = r.GetBytes(1)[0] != 0;
  ck.params = InitParams(config, /*seed=*/0);
  ck.params.tac_bypassed = bypassed;

  const auto named = ck.params.NamedTensors();
  const uint32_t count = r.GetU32();
  if (count != named.size()) {
    throw CheckpointError("tensor count mismatch: file has " + std::to_string(count) +
                          ", config implies " + std::to_string(named.size()));
  }
  for (const auto& [name, tensor] : named) {
    const uint32_t name_len = r.GetU32();
    const std::string file_name = r.GetBytes(name_len);
    if (file_name != name) {
      throw CheckpointError("tensor order mismatch: expected " + name + ", found " + file_name);
    }
    const uint32_t ndim = r.GetU32();
    std::vector<int64_t> dims(ndim);
    for (auto& d : dims) d = r.GetI64();
    if (dims != tensor.shape()) {
      throw CheckpointError("tensor shape mismatch for " + name);
    }
    for (auto& v : const_cast<std::vector<double>&>(tensor.value())) v = r.GetF64();
  }

  if (r.GetBytes(1)[0] != 0) {
    OptimizerSnapshot opt;
    opt.step = r.GetU64();
    opt.first_moment.resize(named.size());
    opt.second_moment.resize(named.size());
    for (size_t i = 0; i < named.size(); ++i) {
      const size_t n = static_cast<size_t>(named[i].second.size());
      opt.first_moment[i].resize(n);
      for (auto& v : opt.first_moment[i]) v = r.GetF64();
      opt.second_moment[i].resize(n);
      for (auto& v : opt.second_moment[i]) v = r.GetF64();
    }
    ck.optimizer = std::move(opt);
  }

  if (r.GetBytes(1)[0] != 0) {
    TrainerSnapshot tr;
    tr.step = r.GetU64();
    tr.unsup_index = r.GetU64();
    tr.sup_index = r.GetU64();
    for (auto& w : tr.rng_state) w = r.GetU64();
    ck.trainer = tr;
  }

  if (!r.AtEnd()) throw CheckpointError("trailing bytes in checkpoint: " + path);
  return ck;
}

void WarmStart(ModelParams& target, const std::string& path) {
  Checkpoint ck = LoadCheckpoint(path);
  const auto src = ck.params.NamedTensors();
  const auto dst = target.NamedTensors();

  // Collect every missing/extra/mismatched tensor, not just the first.
  std::vector<std::string> problems;
  std::map<std::string, const ad::Tensor*> src_map;
  for (const auto& [name, t] : src) src_map[name] = &t;
  std::map<std::string, const ad::Tensor*> dst_map;
  for (const auto& [name, t] : dst) dst_map[name] = &t;
  for (const auto& [name, t] : dst_map) {
    auto it = src_map.find(name);
    if (it == src_map.end()) {
      problems.push_back("missing in checkpoint: " + name);
    } else if (it->second->shape() != t->shape()) {
      std::ostringstream os;
      os << "shape mismatch: " << name << " expected [";
      for (size_t i = 0; i < t->shape().size(); ++i) os << (i ? "," : "") << t->shape()[i];
      os << "] got [";
      const auto& got = it->second->shape();
      for (size_t i = 0; i < got.size(); ++i) os << (i ? "," : "") << got[i];
      os << "]";
      problems.push_back(os.str());
    }
  }
  for (const auto& [name, t] : src_map) {
    if (dst_map.find(name) == dst_map.end()) problems.push_back("unexpected tensor: " + name);
  }
  if (!problems.empty()) {
    std::string msg = "warm start failed:";
    for (const auto& p : problems) msg += "\n  " + p;
    throw CheckpointError(msg);
  }
  for (const auto& [name, t] : dst) {
    const auto& sv = src_map[name]->value();
    auto& dv = const_cast<std::vector<double>&>(t.value());
    std::copy(sv.begin(), sv.end(), dv.begin());
  }
}

}  // namespace mcmixit
