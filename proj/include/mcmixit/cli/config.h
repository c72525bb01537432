// include/mcmixit/cli/config.h

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

#ifndef MCMIXIT_CLI_CONFIG_H_
#define MCMIXIT_CLI_CONFIG_H_

#include <stdexcept>
#include <string>
#include <vector>

#include "mcmixit/model/config.h"
#include "mcmixit/synth/dataset.h"
#include "mcmixit/train/trainer.h"

namespace mcmixit {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Union of every tunable the commands share.  Sourced from an optional
// config file plus flag overrides; flags win.
struct RunConfig {
  ModelConfig model;
  TrainConfig train;
  DataConfig data;
  int64_t checkpoint_interval = 1000;
  uint64_t seed = 1;  // parameter init + trainer RNG

  // Explicit assignments (file or flag) beat the MCMIXIT_SEED fallback.
  bool seed_set = false;
  bool data_seed_set = false;
};

struct ConfigKeyDoc {
  std::string key;  // dotted: "model.window"
  std::string default_value;
  std::string doc;
};

// One entry per recognized key, in display order.
const std::vector<ConfigKeyDoc>& ConfigKeyDocs();

// Key table rendered for --help.
std::string ConfigHelpText();

// Applies one dotted key ("model.window", "train.steps", ...).  Unknown keys
// and malformed values throw ConfigError naming the key.
void ApplyConfigKey(RunConfig& config, const std::string& key, const std::string& value);

// Loads a flat `key = value` file with [model] / [train] / [data] sections.
// Lines starting with '#' or ';' are comments.  Unknown sections or keys are
// errors, never silently ignored.
void LoadConfigFile(RunConfig& config, const std::string& path);

// Applies the MCMIXIT_SEED environment value (when set and non-empty) to any
// seed the file/flags left untouched.
void ApplySeedEnvFallback(RunConfig& config, const char* env_value);

}  // namespace mcmixit

#endif  // MCMIXIT_CLI_CONFIG_H_
