// src/synth/dataset.cc

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

#include "mcmixit/synth/dataset.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>

#include "json.hpp"
#include "mcmixit/wav.h"

namespace mcmixit {

namespace {

void CheckDisjointIds(const Scene& a, const Scene& b) {
  std::set<int> ids;
  for (const auto& s : a.sources) ids.insert(s.id);
  for (const auto& s : b.sources) {
    if (!ids.insert(s.id).second) {
      throw SynthError("scenes share source id " + std::to_string(s.id));
    }
  }
}

std::vector<int> CollectIds(const Scene& a, const Scene& b) {
  std::vector<int> ids;
  for (const auto& s : a.sources) ids.push_back(s.id);
  for (const auto& s : b.sources) ids.push_back(s.id);
  return ids;
}

struct ScenePair {
  Scene a;
  Scene b;
  std::vector<double> close_talk_b;  // dry scene-b source, trimmed to T
};

// Draw order is fixed: source A signal, gain, azimuth; source B signal, gain,
// azimuth; then optional per-mic FIRs (A first).  Changing it changes every
// downstream example.
ScenePair BuildScenePair(const DataConfig& cfg, uint64_t example_seed, int64_t samples) {
  Rng rng(example_seed);
  const int64_t src_len = samples + kSincTaps;
  SceneSource sa;
  sa.id = 1;
  sa.signal = ToneComplex(rng, src_len, cfg.sample_rate);
  sa.gain = rng.Uniform(0.5, 1.0);
  sa.delays = CircularArrayDelays(cfg.mics, rng.Uniform(0.0, 2.0 * M_PI), cfg.sample_rate);
  SceneSource sb;
  sb.id = 2;
  sb.signal = ModulatedNoise(rng, src_len, cfg.sample_rate);
  sb.gain = rng.Uniform(0.5, 1.0);
  sb.delays = CircularArrayDelays(cfg.mics, rng.Uniform(0.0, 2.0 * M_PI), cfg.sample_rate);
  if (cfg.spatial_fir) {
    for (int c = 0; c < cfg.mics; ++c) {
      sa.spatial_fir.push_back(ExponentialFir(rng, cfg.spatial_fir_len));
    }
    for (int c = 0; c < cfg.mics; ++c) {
      sb.spatial_fir.push_back(ExponentialFir(rng, cfg.spatial_fir_len));
    }
  }
  ScenePair out;
  out.close_talk_b.assign(sb.signal.begin(), sb.signal.begin() + samples);
  out.a = Scene{{std::move(sa)}, cfg.noise_level, DeriveSeed(example_seed, 0xA0, 0)};
  out.b = Scene{{std::move(sb)}, cfg.noise_level, DeriveSeed(example_seed, 0xA0, 1)};
  return out;
}

}  // namespace

const char* ExampleKindName(ExampleKind kind) {
  switch (kind) {
    case ExampleKind::kUnsupervisedMom: return "mom";
    case ExampleKind::kSupervisedMixed: return "supervised_mixed";
    case ExampleKind::kSupervisedFiltered: return "supervised_filtered";
  }
  throw SynthError("unknown example kind");
}

ExampleKind ParseExampleKind(const std::string& name) {
  if (name == "mom") return ExampleKind::kUnsupervisedMom;
  if (name == "supervised_mixed") return ExampleKind::kSupervisedMixed;
  if (name == "supervised_filtered") return ExampleKind::kSupervisedFiltered;
  throw SynthError("unknown example kind: " + name);
}

const char* SplitName(Split split) {
  switch (split) {
    case Split::kTrain: return "train";
    case Split::kValidation: return "validation";
    case Split::kTest: return "test";
  }
  throw SynthError("unknown split");
}

Split ParseSplit(const std::string& name) {
  if (name == "train") return Split::kTrain;
  if (name == "validation") return Split::kValidation;
  if (name == "test") return Split::kTest;
  throw SynthError("unknown split: " + name);
}

uint64_t SplitSeed(uint64_t base_seed, Split split) {
  return DeriveSeed(base_seed, 0x5EED, static_cast<uint64_t>(split));
}

void DataConfig::Check() const {
  if (sample_rate < 1 || mics < 1) throw SynthError("data config: bad rate or mic count");
  if (unsup_samples < 1 || sup_samples < 1) throw SynthError("data config: bad example length");
  if (noise_level < 0.0) throw SynthError("data config: negative noise level");
  if (spatial_fir_len < 1 || spatial_fir_len > kMaxSpatialFirLen) {
    throw SynthError("data config: bad spatial FIR length");
  }
  if (filter_len < 1) throw SynthError("data config: bad filter length");
}

TrainingExample MakeMom(const Scene& scene_a, const Scene& scene_b, int num_mics, int64_t samples,
                        int sample_rate) {
  CheckDisjointIds(scene_a, scene_b);
  auto ra = RenderScene(scene_a, num_mics, samples, sample_rate);
  auto rb = RenderScene(scene_b, num_mics, samples, sample_rate);
  TrainingExample ex;
  ex.kind = ExampleKind::kUnsupervisedMom;
  ex.references = EstimateSet(samples, num_mics, 2, sample_rate);
  ex.references.set_member(0, ra.mixture);
  ex.references.set_member(1, rb.mixture);
  ex.input = ra.mixture + rb.mixture;
  ex.source_ids = CollectIds(scene_a, scene_b);
  return ex;
}

TrainingExample MakeSupervisedMixed(const Scene& scene_a, const Scene& scene_b, int num_mics,
                                    int64_t samples, int sample_rate) {
  if (scene_a.sources.size() != 1 || scene_b.sources.size() != 1) {
    throw SynthError("supervised_mixed: each scene must hold exactly one source");
  }
  TrainingExample ex = MakeMom(scene_a, scene_b, num_mics, samples, sample_rate);
  ex.kind = ExampleKind::kSupervisedMixed;
  return ex;
}

TrainingExample MakeSupervisedFiltered(const Scene& scene_a, const Scene& scene_b,
                                       const std::vector<double>& close_talk_b, int num_mics,
                                       int64_t samples, int sample_rate, int filter_len) {
  CheckDisjointIds(scene_a, scene_b);
  if (static_cast<int64_t>(close_talk_b.size()) < samples) {
    throw SynthError("supervised_filtered: close-talk shorter than example");
  }
  auto ra = RenderScene(scene_a, num_mics, samples, sample_rate);
  auto rb = RenderScene(scene_b, num_mics, samples, sample_rate);
  std::span<const double> close_talk(close_talk_b.data(), static_cast<size_t>(samples));
  auto fit = EstimateReferenceFilter(close_talk, rb.mixture, filter_len);
  TrainingExample ex;
  ex.kind = ExampleKind::kSupervisedFiltered;
  ex.references = EstimateSet(samples, num_mics, 3, sample_rate);
  ex.references.set_member(0, ra.mixture);
  ex.references.set_member(1, fit.filtered);
  ex.references.set_member(2, fit.residual);
  ex.input = ra.mixture + rb.mixture;
  ex.source_ids = CollectIds(scene_a, scene_b);
  return ex;
}

DatasetStream::DatasetStream(const DataConfig& config, ExampleKind kind, Split split)
    : config_(config), kind_(kind), split_(split), split_seed_(SplitSeed(config.seed, split)) {
  config_.Check();
}

int64_t DatasetStream::example_samples() const {
  return kind_ == ExampleKind::kUnsupervisedMom ? config_.unsup_samples : config_.sup_samples;
}

TrainingExample DatasetStream::Example(uint64_t index) const {
  const int64_t samples = example_samples();
  const uint64_t eseed = DeriveSeed(split_seed_, 0xE0 + static_cast<uint64_t>(kind_), index);
  auto pair = BuildScenePair(config_, eseed, samples);
  TrainingExample ex;
  switch (kind_) {
    case ExampleKind::kUnsupervisedMom:
      ex = MakeMom(pair.a, pair.b, config_.mics, samples, config_.sample_rate);
      break;
    case ExampleKind::kSupervisedMixed:
      ex = MakeSupervisedMixed(pair.a, pair.b, config_.mics, samples, config_.sample_rate);
      break;
    case ExampleKind::kSupervisedFiltered:
      ex = MakeSupervisedFiltered(pair.a, pair.b, pair.close_talk_b, config_.mics, samples,
                                  config_.sample_rate, config_.filter_len);
      break;
  }
  ex.seed = eseed;
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%06llu", static_cast<unsigned long long>(index));
  ex.id = std::string(SplitName(split_)) + "-" + ExampleKindName(kind_) + "-" + buf;
  return ex;
}

void WriteShard(const std::string& out_dir, const DatasetStream& stream, uint64_t first_index,
                uint64_t count) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw SynthError("cannot create shard directory: " + out_dir + ": " + ec.message());
  std::ofstream manifest(fs::path(out_dir) / "manifest.jsonl", std::ios::trunc);
  if (!manifest) throw SynthError("cannot write manifest in " + out_dir);
  for (uint64_t i = 0; i < count; ++i) {
    TrainingExample ex = stream.Example(first_index + i);
    const std::string input_name = ex.id + "_input.wav";
    WriteWav((fs::path(out_dir) / input_name).string(), ex.input);
    nlohmann::json rec;
    rec["id"] = ex.id;
    rec["kind"] = ExampleKindName(ex.kind);
    rec["input"] = input_name;
    std::vector<std::string> ref_names;
    for (int n = 0; n < ex.references.num_members(); ++n) {
      const std::string ref_name = ex.id + "_ref" + std::to_string(n) + ".wav";
      WriteWav((fs::path(out_dir) / ref_name).string(), ex.references.member(n));
      ref_names.push_back(ref_name);
    }
    rec["references"] = ref_names;
    rec["num_refs"] = ex.references.num_members();
    rec["mics"] = ex.input.num_channels();
    rec["seed"] = ex.seed;
    manifest << rec.dump() << "\n";
  }
  if (!manifest) throw SynthError("manifest write failed in " + out_dir);
}

std::vector<TrainingExample> ReadShard(const std::string& dir) {
  namespace fs = std::filesystem;
  std::ifstream manifest(fs::path(dir) / "manifest.jsonl");
  if (!manifest) throw SynthError("cannot open manifest in " + dir);
  std::vector<TrainingExample> out;
  std::string line;
  while (std::getline(manifest, line)) {
    if (line.empty()) continue;
    nlohmann::json rec;
    try {
      rec = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw SynthError(std::string("bad manifest line: ") + e.what());
    }
    TrainingExample ex;
    ex.id = rec.at("id").get<std::string>();
    ex.kind = ParseExampleKind(rec.at("kind").get<std::string>());
    ex.seed = rec.at("seed").get<uint64_t>();
    ex.input = ReadWav((fs::path(dir) / rec.at("input").get<std::string>()).string());
    const auto ref_names = rec.at("references").get<std::vector<std::string>>();
    if (ref_names.empty()) throw SynthError("manifest entry without references: " + ex.id);
    ex.references = EstimateSet(ex.input.num_frames(), ex.input.num_channels(),
                                static_cast<int>(ref_names.size()), ex.input.sample_rate());
    for (size_t n = 0; n < ref_names.size(); ++n) {
      ex.references.set_member(static_cast<int>(n),
                               ReadWav((fs::path(dir) / ref_names[n]).string()));
    }
    out.push_back(std::move(ex));
  }
  return out;
}

}  // namespace mcmixit
