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

// Command-line front end. Talks to the pipeline only through the C API.

#include <CLI11.hpp>
#include <cstdio>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "afss.h"
#include "json.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitRuntime = 2;

struct OwnedString {
  char* p = nullptr;
  ~OwnedString() { afss_string_free(p); }
  std::string str() const { return p ? p : ""; }
};

struct ConfigHandle {
  afss_config* p = nullptr;
  ~ConfigHandle() { afss_config_free(p); }
};

class Failure {
 public:
  explicit Failure(afss_status st) : status(st), message(afss_last_error()) {}
  afss_status status;
  std::string message;
};

void Check(afss_status st) {
  if (st != AFSS_OK) throw Failure(st);
}

const char* OrNull(const std::optional<std::string>& s) { return s ? s->c_str() : nullptr; }

int ExitCodeFor(afss_status st) { return afss_status_is_validation(st) ? kExitValidation : kExitRuntime; }

// TrainConfig fields reachable as --<flag>, forwarded as training.<key>=value.
const std::vector<std::pair<std::string, std::string>> kTrainFlags = {
    {"--lr-front", "lr_front"},         {"--lr-head", "lr_head"},       {"--lr-loss", "lr_loss"},
    {"--weight-decay", "weight_decay"}, {"--max-epochs", "max_epochs"}, {"--warmup-epochs", "warmup_epochs"},
    {"--final-lr", "final_lr"},         {"--batch-size", "batch_size"}, {"--patience", "patience"},
    {"--freeze-front-end", "freeze_front_end"}};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"afss: pseudo-fake synthesis and spoofing-detector training"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_version_flag("--version", std::string(afss_version()));

  std::optional<std::string> config_path, run_dir;
  std::optional<unsigned long long> seed;
  std::vector<std::string> overrides;
  bool force = false;
  app.add_option("--config", config_path, "INI config file (default: $AFSS_CONFIG, else built-in defaults)");
  app.add_option("--seed", seed, "root seed for every random stage");
  app.add_option("--run-dir", run_dir, "run directory (default: [paths] run_dir)");
  app.add_option("--set", overrides, "config override section.key=value (repeatable)");
  app.add_flag("--force", force, "replace a differing config snapshot in the run directory");

  auto* synth = app.add_subcommand("synthesize", "generate pseudo-fakes from a bonafide manifest");
  std::optional<std::string> real_manifest;
  synth->add_option("--real", real_manifest, "bonafide manifest (default: [paths] real_manifest)");

  auto* train = app.add_subcommand("train", "train the detector, resuming from the last checkpoint");
  std::optional<std::string> train_manifest, dev_manifest;
  int stop_after = 0;
  bool fresh = false;
  train->add_option("--train", train_manifest, "training manifest (default: <run-dir>/manifests/train.tsv)");
  train->add_option("--dev", dev_manifest, "dev manifest for early stopping (default: [paths] dev_manifest)");
  train->add_option("--stop-after-epoch", stop_after, "stop after this epoch as if interrupted");
  train->add_flag("--fresh", fresh, "discard existing checkpoints and start over");
  std::vector<std::optional<std::string>> train_values(kTrainFlags.size());
  for (std::size_t i = 0; i < kTrainFlags.size(); ++i)
    train->add_option(kTrainFlags[i].first, train_values[i], "override training." + kTrainFlags[i].second);

  auto* evaluate = app.add_subcommand("evaluate", "score manifests with a checkpoint and summarize metrics");
  std::optional<std::string> checkpoint;
  std::vector<std::string> eval_manifests;
  evaluate->add_option("--checkpoint", checkpoint, "checkpoint (default: <run-dir>/checkpoints/best.ckpt)");
  evaluate->add_option("manifests", eval_manifests, "evaluation manifests (default: [paths] eval_manifests)");

  auto* score = app.add_subcommand("score", "metrics for an existing score file");
  std::string score_file, score_manifest;
  score->add_option("scores", score_file, "score file: one 'utterance_id score' per line")->required();
  score->add_option("manifest", score_manifest, "manifest holding the labels")->required();

  auto* validate = app.add_subcommand("validate", "check manifests for structural and audio problems");
  std::vector<std::string> validate_manifests;
  validate->add_option("manifests", validate_manifests, "manifests to check")->required();

  auto* toy = app.add_subcommand("toy-corpus", "write a synthetic multi-speaker bonafide corpus");
  std::string toy_dir;
  int toy_speakers = 8, toy_utts = 40;
  double toy_seconds = 2.0;
  toy->add_option("dir", toy_dir, "output directory")->required();
  toy->add_option("--speakers", toy_speakers, "number of speakers");
  toy->add_option("--utterances", toy_utts, "number of utterances");
  toy->add_option("--seconds", toy_seconds, "utterance duration");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitValidation;
  }

  try {
    if (*score) {
      OwnedString out;
      Check(afss_score_file(score_file.c_str(), score_manifest.c_str(), &out.p));
      std::cout << out.str() << "\n";
      return kExitOk;
    }
    if (*validate) {
      int code = kExitOk;
      for (const auto& m : validate_manifests) {
        OwnedString report;
        const afss_status st = afss_validate_manifest(m.c_str(), &report.p);
        if (st == AFSS_OK) {
          std::cout << m << ": ok\n";
          continue;
        }
        if (report.p) std::cerr << m << ":\n" << report.str();
        else std::cerr << "afss: " << afss_last_error() << "\n";
        code = std::max(code, ExitCodeFor(st));
      }
      return code;
    }
    if (*toy) {
      OwnedString path;
      Check(afss_make_toy_corpus(toy_dir.c_str(), toy_speakers, toy_utts, toy_seconds, seed.value_or(0), &path.p));
      std::cout << path.str() << "\n";
      return kExitOk;
    }

    ConfigHandle cfg;
    Check(afss_config_load(OrNull(config_path), &cfg.p));
    std::vector<std::string> assignments = overrides;
    if (seed) assignments.push_back("seed=" + std::to_string(*seed));
    for (std::size_t i = 0; i < kTrainFlags.size(); ++i)
      if (train_values[i]) assignments.push_back("training." + kTrainFlags[i].second + "=" + *train_values[i]);
    std::vector<const char*> raw;
    for (const auto& a : assignments) raw.push_back(a.c_str());
    Check(afss_config_set_all(cfg.p, raw.data(), raw.size()));

    OwnedString report;
    if (*synth) {
      Check(afss_synthesize(cfg.p, OrNull(real_manifest), OrNull(run_dir), force, &report.p));
      const auto j = nlohmann::json::parse(report.str());
      for (const auto& [prov, n] : j["counts"].items()) std::cout << prov << "\t" << n.get<long>() << "\n";
      for (const auto& f : j["failures"])
        std::cerr << "skipped " << f["utterance_id"].get<std::string>() << ": " << f["reason"].get<std::string>() << "\n";
      std::cout << "train manifest: " << j["train_manifest"].get<std::string>() << "\n";
    } else if (*train) {
      Check(afss_train(cfg.p, OrNull(train_manifest), OrNull(dev_manifest), OrNull(run_dir), force, fresh, stop_after,
                       &report.p));
      auto j = nlohmann::json::parse(report.str());
      for (const auto& e : j["history"]) std::cout << e.dump() << "\n";
      j.erase("history");
      std::cout << j.dump(2) << "\n";
    } else if (*evaluate) {
      std::vector<const char*> paths;
      for (const auto& m : eval_manifests) paths.push_back(m.c_str());
      Check(afss_evaluate(cfg.p, OrNull(checkpoint), paths.data(), paths.size(), OrNull(run_dir), force, &report.p));
      std::cout << report.str() << "\n";
    }
    return kExitOk;
  } catch (const Failure& f) {
    std::cerr << "afss: " << afss_status_name(f.status) << ": " << f.message << "\n";
    return ExitCodeFor(f.status);
  } catch (const std::exception& e) {
    std::cerr << "afss: " << e.what() << "\n";
    return kExitRuntime;
  }
}
