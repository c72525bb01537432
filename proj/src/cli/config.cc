// src/cli/config.cc

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

#include "mcmixit/cli/config.h"

#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace mcmixit {
namespace {

std::string Trim(const std::string& s) {
  size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  size_t e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

int64_t ParseIntValue(const std::string& key, const std::string& value) {
  try {
    size_t pos = 0;
    int64_t v = std::stoll(value, &pos);
    if (pos != value.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    throw ConfigError(key + ": expected an integer, got \"" + value + "\"");
  }
}

double ParseDoubleValue(const std::string& key, const std::string& value) {
  try {
    size_t pos = 0;
    double v = std::stod(value, &pos);
    if (pos != value.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    throw ConfigError(key + ": expected a number, got \"" + value + "\"");
  }
}

bool ParseBoolValue(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  throw ConfigError(key + ": expected true/false, got \"" + value + "\"");
}

struct KeyEntry {
  std::string default_value;
  std::string doc;
  std::function<void(RunConfig&, const std::string& key, const std::string& value)> apply;
};

// Registry of every key: default, one-line doc, setter.
const std::map<std::string, KeyEntry>& Registry() {
  static const std::map<std::string, KeyEntry>* kRegistry = [] {
    auto* r = new std::map<std::string, KeyEntry>;
    auto add = [r](const std::string& key, const std::string& def, const std::string& doc,
                   std::function<void(RunConfig&, const std::string&, const std::string&)> fn) {
      (*r)[key] = KeyEntry{def, doc, std::move(fn)};
    };

    add("model.preset", "paper", "architecture preset: paper or tiny (later keys override)",
        [](RunConfig& c, const std::string& k, const std::string& v) {
          if (v == "paper") {
            c.model = ModelConfig();
          } else if (v == "tiny") {
            c.model = ModelConfig::Tiny();
          } else {
            throw ConfigError(k + ": expected paper or tiny, got \"" + v + "\"");
          }
        });
    add("model.num_superblocks", "4", "repeats of the dilated block stack",
        [](RunConfig& c, const std::string& k, const std::string& v) {
          c.model.num_superblocks = static_cast<int>(ParseIntValue(k, v));
        });
    add("model.blocks_per_superblock", "8", "dilated conv blocks per superblock (dilation 2^b)",
        [](RunConfig& c, const std::string& k, const std::string& v) {
          c.model.blocks_per_superblock = static_cast<int>(ParseIntValue(k, v));
        });
    add("model.kernel_width", "3", "depthwise conv kernel width (odd)",
        [](RunConfig& c, const std::string& k, const std::string& v) {
          c.model.kernel_width = static_cast<int>(ParseIntValue(k, v));
        });
    add("model.window", "64", "encoder window length in samples",
        [](RunConfig& c, const std::string& k, const std::string& v) {
          c.model.window = static_cast<int>(ParseIntValue(k, v));
        });
    add("model.hop", "32", "encoder hop in samples (must divide window)",
        [](RunConfig& c, const std::string& k, const std::string& v) {
          c.model.hop = static_cast<int>(ParseIntValue(k, v));
        });
    add("model.bottleneck_dim", "128", "TCN bottleneck width K",
        [](RunConfig& c, const std::string& k, const std::string& v) {
          c.model.bottleneck_dim = static_cast<int>(ParseIntValue(k, v));
        });
    add("model.conv_channels", "512", "expanded conv width H inside each block",
        [](RunConfig& c, const std::string& k, const std::string& v) {
          c.model.conv_channels = static_cast<int>(ParseIntValue(k, v));
        });
    add("model.tac_dim", "128", "TAC transform/average width",
        [](RunConfig& c, const std::string& k, const std::string& v) {
          c.model.tac_dim = static_cast<int>(ParseIntValue(k, v));
        });
    add("model.num_outputs", "8", "number of separated sources M",
        [](RunConfig& c, const std::string& k, const std::string& v) {
          c.model.num_outputs = static_cast<int>(ParseIntValue(k, v));
        });
    add("model.encoder_bases", "128", "encoder basis count F",
        [](RunConfig& c, const std::string& k, const std::string& v) {
          c.model.encoder_bases = static_cast<int>(ParseIntValue(k, v));
        });

    add("train.mode", "unsupervised", "training mode: supervised, unsupervised, or semi",
        [](RunConfig& c, const std::string& k, const std::string& v) {
          try {
            c.train.mode = ParseTrainMode(v);
          } catch (const TrainingError& e) {
            throw ConfigError(k + ": " + e.what());
          }
        });
    add("train.learning_rate", "0.0003", "Adam learning rate",
        [](RunConfig& c, const std::string& k, const std::string& v) {
          c.train.learning_rate = ParseDoubleValue(k, v);
        });
    add("train.batch_size", "8", "examples per optimizer step",
        [](RunConfig& c, const std::string& k, const std::string& v) {
          c.train.batch_size = static_cast<int>(ParseIntValue(k, v));
        });
    add("train.steps", "10000", "total optimizer steps",
        [](RunConfig& c, const std::string& k, const std::string& v) {
          c.train.steps = ParseIntValue(k, v);
        });
    add("train.adam_beta1", "0.9", "Adam first-moment decay",
        [](RunConfig& c, const std::string& k, const std::string& v) {
          c.train.adam_beta1 = ParseDoubleValue(k, v);
        });
    add("train.adam_beta2", "0.999", "Adam second-moment decay",
        [](RunConfig& c, const std::string& k, const std::string& v) {
          c.train.adam_beta2 = ParseDoubleValue(k, v);
        });
    add("train.adam_eps", "1e-08", "Adam denominator epsilon",
        [](RunConfig& c, const std::string& k, const std::string& v) {
          c.train.adam_eps = ParseDoubleValue(k, v);
        });
    add("train.semi_mix_ratio", "0.5", "supervised fraction of each semi-mode batch",
        [](RunConfig& c, const std::string& k, const std::string& v) {
          c.train.semi_mix_ratio = ParseDoubleValue(k, v);
        });
    add("train.warm_start", "", "checkpoint whose weights initialize a fresh run",
        [](RunConfig& c, const std::string&, const std::string& v) {
          c.train.warm_start_path = v;
        });
    add("train.precision", "64", "float precision in bits (only 64 is supported)",
        [](RunConfig& c, const std::string& k, const std::string& v) {
          c.train.precision = static_cast<int>(ParseIntValue(k, v));
        });
    add("train.supervised_kind", "supervised_filtered",
        "supervised example kind: supervised_mixed or supervised_filtered",
        [](RunConfig& c, const std::string& k, const std::string& v) {
          try {
            c.train.supervised_kind = ParseExampleKind(v);
          } catch (const SynthError& e) {
            throw ConfigError(k + ": " + e.what());
          }
          if (c.train.supervised_kind == ExampleKind::kUnsupervisedMom) {
            throw ConfigError(k + ": mom is not a supervised kind");
          }
        });
    add("train.checkpoint_interval", "1000", "steps between periodic checkpoints",
        [](RunConfig& c, const std::string& k, const std::string& v) {
          c.checkpoint_interval = ParseIntValue(k, v);
          if (c.checkpoint_interval < 1) throw ConfigError(k + ": must be >= 1");
        });
    add("train.seed", "1", "parameter init + trainer RNG seed",
        [](RunConfig& c, const std::string& k, const std::string& v) {
          int64_t v64 = ParseIntValue(k, v);
          if (v64 < 0) throw ConfigError(k + ": must be >= 0");
          c.seed = static_cast<uint64_t>(v64);
          c.seed_set = true;
        });

    add("data.sample_rate", "16000", "sample rate in Hz",
        [](RunConfig& c, const std::string& k, const std::string& v) {
          c.data.sample_rate = static_cast<int>(ParseIntValue(k, v));
        });
    add("data.mics", "2", "microphone count of synthesized scenes",
        [](RunConfig& c, const std::string& k, const std::string& v) {
          c.data.mics = static_cast<int>(ParseIntValue(k, v));
        });
    add("data.unsup_samples", "160000", "frames per unsupervised (MoM) example",
        [](RunConfig& c, const std::string& k, const std::string& v) {
          c.data.unsup_samples = ParseIntValue(k, v);
        });
    add("data.sup_samples", "80000", "frames per supervised example",
        [](RunConfig& c, const std::string& k, const std::string& v) {
          c.data.sup_samples = ParseIntValue(k, v);
        });
    add("data.noise_level", "0", "sensor noise RMS relative to the summed source images",
        [](RunConfig& c, const std::string& k, const std::string& v) {
          c.data.noise_level = ParseDoubleValue(k, v);
        });
    add("data.spatial_fir", "false", "convolve each source image with a random decaying FIR",
        [](RunConfig& c, const std::string& k, const std::string& v) {
          c.data.spatial_fir = ParseBoolValue(k, v);
        });
    add("data.spatial_fir_len", "64", "length of the random spatial FIR in taps",
        [](RunConfig& c, const std::string& k, const std::string& v) {
          c.data.spatial_fir_len = static_cast<int>(ParseIntValue(k, v));
        });
    add("data.filter_len", "128", "FIR length fit when building filtered references",
        [](RunConfig& c, const std::string& k, const std::string& v) {
          c.data.filter_len = static_cast<int>(ParseIntValue(k, v));
        });
    add("data.seed", "17", "dataset synthesis seed",
        [](RunConfig& c, const std::string& k, const std::string& v) {
          int64_t v64 = ParseIntValue(k, v);
          if (v64 < 0) throw ConfigError(k + ": must be >= 0");
          c.data.seed = static_cast<uint64_t>(v64);
          c.data_seed_set = true;
        });
    return r;
  }();
  return *kRegistry;
}

}  // namespace

const std::vector<ConfigKeyDoc>& ConfigKeyDocs() {
  static const std::vector<ConfigKeyDoc>* kDocs = [] {
    auto* docs = new std::vector<ConfigKeyDoc>;
    for (const auto& [key, entry] : Registry()) {
      docs->push_back(ConfigKeyDoc{key, entry.default_value, entry.doc});
    }
    return docs;
  }();
  return *kDocs;
}

std::string ConfigHelpText() {
  std::ostringstream out;
  out << "Config keys (file sections [model]/[train]/[data], or --set key=value):\n";
  for (const auto& doc : ConfigKeyDocs()) {
    out << "  " << doc.key;
    for (size_t i = doc.key.size(); i < 28; ++i) out << ' ';
    out << doc.doc << " (default: " << (doc.default_value.empty() ? "empty" : doc.default_value)
        << ")\n";
  }
  return out.str();
}

void ApplyConfigKey(RunConfig& config, const std::string& key, const std::string& value) {
  auto it = Registry().find(key);
  if (it == Registry().end()) throw ConfigError("unknown config key: " + key);
  it->second.apply(config, key, Trim(value));
}

void LoadConfigFile(RunConfig& config, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::string section;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string s = Trim(line);
    if (s.empty() || s[0] == '#' || s[0] == ';') continue;
    if (s.front() == '[') {
      if (s.back() != ']') {
        throw ConfigError(path + ":" + std::to_string(lineno) + ": malformed section header");
      }
      section = Trim(s.substr(1, s.size() - 2));
      if (section != "model" && section != "train" && section != "data") {
        throw ConfigError(path + ":" + std::to_string(lineno) + ": unknown section [" + section +
                          "]");
      }
      continue;
    }
    size_t eq = s.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(path + ":" + std::to_string(lineno) + ": expected key = value");
    }
    if (section.empty()) {
      throw ConfigError(path + ":" + std::to_string(lineno) + ": key before any [section]");
    }
    std::string key = section + "." + Trim(s.substr(0, eq));
    try {
      ApplyConfigKey(config, key, s.substr(eq + 1));
    } catch (const ConfigError& e) {
      throw ConfigError(path + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
}

void ApplySeedEnvFallback(RunConfig& config, const char* env_value) {
  if (env_value == nullptr || *env_value == '\0') return;
  int64_t v64 = ParseIntValue("MCMIXIT_SEED", env_value);
  if (v64 < 0) throw ConfigError("MCMIXIT_SEED: must be >= 0");
  uint64_t seed = static_cast<uint64_t>(v64);
  if (!config.seed_set) config.seed = seed;
  if (!config.data_seed_set) config.data.seed = seed;
}

}  // namespace mcmixit
