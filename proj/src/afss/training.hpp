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

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "afss/checkpoint.hpp"
#include "afss/detector.hpp"
#include "afss/loss.hpp"
#include "afss/manifest.hpp"
#include "afss/metrics.hpp"

namespace afss {

struct TrainConfig {
  double lr_front = 5e-6;
  double lr_head = 1e-4;
  double lr_loss = 1e-6;
  double weight_decay = 1e-4;
  int max_epochs = 30;
  int warmup_epochs = 5;
  double final_lr = 1e-6;
  int batch_size = 12;
  int patience = 10;
  bool freeze_front_end = false;
  std::uint64_t seed = 0;

  void Validate() const;
  bool operator==(const TrainConfig&) const = default;
};

struct EpochRecord {
  int epoch = 0;
  std::size_t step = 0;
  double train_loss = 0.0;
  double dev_eer = 0.0;
  double w_fake = 0.0;
  double w_real = 0.0;
  bool improved = false;

  nlohmann::json ToJson() const;
  static EpochRecord FromJson(const nlohmann::json& j);
};

struct TrainOptions {
  TrainConfig cfg;
  // Holds checkpoints/last.ckpt, checkpoints/best.ckpt and history.jsonl.
  std::filesystem::path run_dir;
  // Stored verbatim in each checkpoint header.
  std::string config_snapshot;
  // Continue from checkpoints/last.ckpt when it exists.
  bool resume = false;
  // Return after this epoch as if interrupted.
  std::optional<int> stop_after_epoch;
  int workers = 1;
  std::function<void(const EpochRecord&)> on_epoch;
};

struct TrainResult {
  std::vector<EpochRecord> history;
  double best_eer = 0.0;
  int best_epoch = 0;
  bool early_stopped = false;
  bool completed = false;
  std::filesystem::path best_checkpoint;
  std::filesystem::path last_checkpoint;
};

// Trains `model` (already initialized) on `train` with dev-EER early stopping.
// Throws TrainingError naming the batch on a non-finite loss.
TrainResult Train(DetectorModel& model, const Manifest& train, const Manifest& dev, const TrainOptions& opts);

// Eval-mode scores (probability of spoof) for every record.
ScoreSet ScoreManifest(const DetectorModel& model, const Manifest& m, int workers = 1);

// Rebuilds a model from a checkpoint. Throws ConfigError if `expected_front_end`
// is non-empty and differs from the stored one.
DetectorModel LoadModel(const std::filesystem::path& checkpoint, const std::string& expected_front_end = "");

// Model-only checkpoint contents (parameters plus architecture header).
Checkpoint ModelCheckpoint(DetectorModel& model);

std::vector<EpochRecord> ReadHistory(const std::filesystem::path& path);

}  // namespace afss
