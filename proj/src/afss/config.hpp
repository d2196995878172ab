// Copyright 2026  The AFSS Authors
//
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

#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "afss/synthesis.hpp"
#include "afss/training.hpp"
#include "afss/transforms.hpp"

namespace afss {

inline constexpr const char* kConfigEnvVar = "AFSS_CONFIG";

struct SynthesisSection {
  SynthesisMode mode = SynthesisMode::kAfss;
  double branch_ratio = 0.5;
  std::string vc = "knn";
  int knn_k = 4;
  int griffin_lim_iters = 32;
  std::vector<std::string> vocoders{"griffin_lim"};
  int workers = 1;
  double max_failure_ratio = 0.01;

  bool operator==(const SynthesisSection&) const = default;
};

struct DetectorSection {
  std::string front_end = "toy";
  int toy_hidden = 32;
  double dropout = 0.5;

  bool operator==(const DetectorSection&) const = default;
};

struct PathsSection {
  std::string run_dir;
  std::string real_manifest;
  std::string train_manifest;
  std::string dev_manifest;
  std::vector<std::string> eval_manifests;

  bool operator==(const PathsSection&) const = default;
};

// Full experiment configuration. Every field has a default, so an empty
// file is a valid config.
struct ExperimentConfig {
  std::uint64_t seed = 0;
  int level = 1;
  std::array<IntensityPreset, 4> presets = DefaultPresetTable();
  RawBoostConfig rawboost;
  SynthesisSection synthesis;
  // External backends: name -> argv prefix, invoked with input/output wav paths.
  std::map<std::string, std::vector<std::string>> external_vc;
  std::map<std::string, std::vector<std::string>> external_vocoders;
  DetectorSection detector;
  TrainConfig training;
  int train_workers = 1;
  PathsSection paths;

  // The active preset with the shared RawBoost settings applied.
  IntensityPreset ActivePreset() const;
  void Validate() const;
  bool operator==(const ExperimentConfig&) const = default;
};

// INI text. Unknown sections or keys, duplicates and malformed values raise
// ConfigError naming `origin`.
ExperimentConfig ParseConfig(const std::string& text, const std::string& origin = "<config>");
ExperimentConfig LoadConfig(const std::filesystem::path& path);
// Canonical INI rendering; ParseConfig(SerializeConfig(c)) == c.
std::string SerializeConfig(const ExperimentConfig& c);

// Applies "section.key=value" (or "key=value" for top-level keys).
void ApplyOverride(ExperimentConfig& c, const std::string& assignment);
// Applies all assignments, then validates once; `c` is unchanged on error.
void ApplyOverrides(ExperimentConfig& c, const std::vector<std::string>& assignments);

// Canonical text of "section.key" (or a top-level key). Throws ConfigError if unknown.
std::string ConfigValue(const ExperimentConfig& c, const std::string& key);

// Explicit path, else $AFSS_CONFIG, else none (built-in defaults).
std::optional<std::filesystem::path> ResolveConfigPath(const std::optional<std::filesystem::path>& explicit_path);

// Splits a command line on whitespace; double quotes group words.
std::vector<std::string> SplitCommand(const std::string& cmd);

// Builds the backends named by the synthesis section.
SynthesisBackends MakeBackends(const ExperimentConfig& c);
std::unique_ptr<FrontEnd> MakeConfiguredFrontEnd(const ExperimentConfig& c);

}  // namespace afss
