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

#include "afss.h"

#include <cmath>
#include <cstdlib>
#include <cstring>
#include <exception>
#include <new>
#include <string>

#include "afss/audio.hpp"
#include "afss/commands.hpp"
#include "afss/config.hpp"
#include "afss/error.hpp"
#include "afss/metrics.hpp"
#include "afss/toy_corpus.hpp"

struct afss_config {
  afss::ExperimentConfig cfg;
};

struct afss_waveform {
  afss::Waveform w;
};

struct afss_scoreset {
  afss::ScoreSet s;
};

namespace {

namespace fs = std::filesystem;

thread_local std::string g_last_error;

afss_status Fail(afss_status st, const std::string& msg) {
  g_last_error = msg;
  return st;
}

class ArgumentError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

void Require(bool ok, const char* what) {
  if (!ok) throw ArgumentError(what);
}

// Runs fn, translating exceptions into status codes and the thread-local message.
template <typename Fn>
afss_status Guard(Fn&& fn) {
  try {
    fn();
    g_last_error.clear();
    return AFSS_OK;
  } catch (const ArgumentError& e) {
    return Fail(AFSS_E_ARGUMENT, e.what());
  } catch (const afss::ValidationError& e) {
    return Fail(AFSS_E_VALIDATION, e.what());
  } catch (const afss::ConfigError& e) {
    return Fail(AFSS_E_CONFIG, e.what());
  } catch (const afss::FormatError& e) {
    return Fail(AFSS_E_FORMAT, e.what());
  } catch (const afss::IoError& e) {
    return Fail(AFSS_E_IO, e.what());
  } catch (const afss::InputError& e) {
    return Fail(AFSS_E_INPUT, e.what());
  } catch (const afss::BackendError& e) {
    return Fail(AFSS_E_BACKEND, e.what());
  } catch (const afss::TrainingError& e) {
    return Fail(AFSS_E_TRAINING, e.what());
  } catch (const std::filesystem::filesystem_error& e) {
    return Fail(AFSS_E_IO, e.what());
  } catch (const std::bad_alloc&) {
    return Fail(AFSS_E_RUNTIME, "out of memory");
  } catch (const std::exception& e) {
    return Fail(AFSS_E_RUNTIME, e.what());
  } catch (...) {
    return Fail(AFSS_E_RUNTIME, "unknown error");
  }
}

char* Dup(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

fs::path RunDirOf(const afss::ExperimentConfig& cfg, const char* run_dir) {
  return run_dir ? fs::path(run_dir) : fs::path(cfg.paths.run_dir);
}

std::string PathOr(const char* given, const std::string& fallback, const char* what) {
  if (given) return given;
  if (fallback.empty()) throw afss::ConfigError(std::string("no ") + what + " given and none configured");
  return fallback;
}

nlohmann::json SummaryJson(const afss::TrainResult& r) {
  nlohmann::json history = nlohmann::json::array();
  for (const auto& e : r.history) history.push_back(e.ToJson());
  return {{"epochs", r.history.size()},
          {"best_eer", r.best_eer},
          {"best_epoch", r.best_epoch},
          {"early_stopped", r.early_stopped},
          {"completed", r.completed},
          {"best_checkpoint", r.best_checkpoint.generic_string()},
          {"last_checkpoint", r.last_checkpoint.generic_string()},
          {"history", history}};
}

}  // namespace

extern "C" {

const char* afss_version(void) { return "1.0.0"; }

const char* afss_status_name(afss_status status) {
  switch (status) {
    case AFSS_OK: return "ok";
    case AFSS_E_VALIDATION: return "validation error";
    case AFSS_E_CONFIG: return "config error";
    case AFSS_E_ARGUMENT: return "argument error";
    case AFSS_E_FORMAT: return "format error";
    case AFSS_E_IO: return "io error";
    case AFSS_E_INPUT: return "input error";
    case AFSS_E_BACKEND: return "backend error";
    case AFSS_E_TRAINING: return "training error";
    case AFSS_E_RUNTIME: return "runtime error";
  }
  return "unknown status";
}

const char* afss_last_error(void) { return g_last_error.c_str(); }

int afss_status_is_validation(afss_status status) {
  return status == AFSS_E_VALIDATION || status == AFSS_E_CONFIG || status == AFSS_E_ARGUMENT ||
         status == AFSS_E_FORMAT;
}

void afss_string_free(char* s) { std::free(s); }

afss_status afss_config_default(afss_config** out) {
  return Guard([&] {
    Require(out, "out is null");
    *out = new afss_config{};
  });
}

afss_status afss_config_load(const char* path, afss_config** out) {
  return Guard([&] {
    Require(out, "out is null");
    *out = nullptr;
    std::optional<fs::path> given;
    if (path) given = fs::path(path);
    const auto resolved = afss::ResolveConfigPath(given);
    auto* c = new afss_config{};
    try {
      if (resolved) c->cfg = afss::LoadConfig(*resolved);
    } catch (...) {
      delete c;
      throw;
    }
    *out = c;
  });
}

afss_status afss_config_set(afss_config* cfg, const char* assignment) {
  return Guard([&] {
    Require(cfg && assignment, "null argument");
    afss::ApplyOverride(cfg->cfg, assignment);
  });
}

afss_status afss_config_set_all(afss_config* cfg, const char* const* assignments, size_t n) {
  return Guard([&] {
    Require(cfg && (assignments || n == 0), "null argument");
    std::vector<std::string> all;
    for (size_t i = 0; i < n; ++i) {
      Require(assignments[i], "assignment is null");
      all.emplace_back(assignments[i]);
    }
    afss::ApplyOverrides(cfg->cfg, all);
  });
}

afss_status afss_config_get(const afss_config* cfg, const char* key, char** value) {
  return Guard([&] {
    Require(cfg && key && value, "null argument");
    *value = Dup(afss::ConfigValue(cfg->cfg, key));
  });
}

afss_status afss_config_serialize(const afss_config* cfg, char** text) {
  return Guard([&] {
    Require(cfg && text, "null argument");
    *text = Dup(afss::SerializeConfig(cfg->cfg));
  });
}

afss_status afss_config_write(const afss_config* cfg, const char* path) {
  return Guard([&] {
    Require(cfg && path, "null argument");
    afss::AtomicWrite(path, afss::SerializeConfig(cfg->cfg));
  });
}

void afss_config_free(afss_config* cfg) { delete cfg; }

afss_status afss_synthesize(const afss_config* cfg, const char* real_manifest, const char* run_dir, int force,
                            char** report_json) {
  return Guard([&] {
    Require(cfg && report_json, "null argument");
    const std::string manifest = PathOr(real_manifest, cfg->cfg.paths.real_manifest, "real manifest");
    auto run = afss::RunDir::Open(RunDirOf(cfg->cfg, run_dir), cfg->cfg, force != 0);
    const auto r = afss::CmdSynthesize(cfg->cfg, manifest, run);
    nlohmann::json failures = nlohmann::json::array();
    for (const auto& f : r.failures) failures.push_back({{"utterance_id", f.utterance_id}, {"reason", f.reason}});
    const nlohmann::json j = {{"fake_manifest", r.fake_manifest.generic_string()},
                              {"train_manifest", r.merged_manifest.generic_string()},
                              {"counts", r.counts},
                              {"failures", failures}};
    *report_json = Dup(j.dump(2));
  });
}

afss_status afss_train(const afss_config* cfg, const char* train_manifest, const char* dev_manifest,
                       const char* run_dir, int force, int fresh, int stop_after_epoch, char** report_json) {
  return Guard([&] {
    Require(cfg && report_json, "null argument");
    const fs::path root = RunDirOf(cfg->cfg, run_dir);
    std::string train_default = cfg->cfg.paths.train_manifest;
    if (train_default.empty() && !root.empty()) train_default = (root / "manifests" / "train.tsv").string();
    const std::string train = PathOr(train_manifest, train_default, "training manifest");
    const std::string dev = PathOr(dev_manifest, cfg->cfg.paths.dev_manifest, "dev manifest");
    auto run = afss::RunDir::Open(root, cfg->cfg, force != 0);
    afss::TrainCommandOptions o;
    o.fresh = fresh != 0;
    if (stop_after_epoch > 0) o.stop_after_epoch = stop_after_epoch;
    *report_json = Dup(SummaryJson(afss::CmdTrain(cfg->cfg, train, dev, run, o)).dump(2));
  });
}

afss_status afss_evaluate(const afss_config* cfg, const char* checkpoint, const char* const* manifests,
                          size_t n_manifests, const char* run_dir, int force, char** report_json) {
  return Guard([&] {
    Require(cfg && report_json, "null argument");
    Require(n_manifests == 0 || manifests, "manifests is null");
    std::vector<fs::path> paths;
    for (size_t i = 0; i < n_manifests; ++i) {
      Require(manifests[i], "manifest entry is null");
      paths.emplace_back(manifests[i]);
    }
    if (paths.empty())
      for (const auto& p : cfg->cfg.paths.eval_manifests) paths.emplace_back(p);
    auto run = afss::RunDir::Open(RunDirOf(cfg->cfg, run_dir), cfg->cfg, force != 0);
    const fs::path ckpt = checkpoint ? fs::path(checkpoint) : run.checkpoints() / "best.ckpt";
    const auto report = afss::CmdEvaluate(cfg->cfg, ckpt, paths, run);
    nlohmann::json j = report.ToJson();
    j["summary_file"] = report.summary_file.generic_string();
    *report_json = Dup(j.dump(2));
  });
}

afss_status afss_score_file(const char* score_file, const char* manifest, char** summary_json) {
  return Guard([&] {
    Require(score_file && manifest && summary_json, "null argument");
    *summary_json = Dup(afss::CmdScore(score_file, manifest).ToJson().dump(2));
  });
}

afss_status afss_validate_manifest(const char* manifest, char** report) {
  std::vector<afss::ManifestIssue> issues;
  const afss_status st = Guard([&] {
    Require(manifest && report, "null argument");
    *report = nullptr;
    issues = afss::CmdValidate(manifest);
    std::string text;
    for (const auto& i : issues) text += "line " + std::to_string(i.line) + ": " + i.message + "\n";
    *report = Dup(text);
  });
  if (st == AFSS_OK && !issues.empty())
    return Fail(AFSS_E_VALIDATION, std::string(manifest) + ": " + std::to_string(issues.size()) + " issue(s)");
  return st;
}

afss_status afss_make_toy_corpus(const char* dir, int n_speakers, int n_utterances, double seconds, uint64_t seed,
                                 char** manifest_path) {
  return Guard([&] {
    Require(dir && manifest_path, "null argument");
    Require(n_speakers > 0 && n_utterances > 0 && seconds > 0.0, "corpus sizes must be positive");
    afss::ToyCorpusOptions o;
    o.n_speakers = n_speakers;
    o.n_utterances = n_utterances;
    o.seconds = seconds;
    o.seed = seed;
    *manifest_path = Dup(afss::MakeToyCorpus(o, dir).string());
  });
}

afss_status afss_waveform_load(const char* path, afss_waveform** out) {
  return Guard([&] {
    Require(path && out, "null argument");
    *out = new afss_waveform{afss::LoadWav(path)};
  });
}

afss_status afss_waveform_from_samples(const double* samples, size_t n, int sample_rate, afss_waveform** out) {
  return Guard([&] {
    Require(out && (samples || n == 0), "null argument");
    Require(sample_rate > 0, "sample rate must be positive");
    *out = new afss_waveform{afss::Waveform(std::vector<double>(samples, samples + n), sample_rate)};
  });
}

afss_status afss_waveform_save(const afss_waveform* w, const char* path) {
  return Guard([&] {
    Require(w && path, "null argument");
    afss::SaveWav(w->w, path);
  });
}

size_t afss_waveform_length(const afss_waveform* w) { return w ? w->w.size() : 0; }

int afss_waveform_sample_rate(const afss_waveform* w) { return w ? w->w.sample_rate : 0; }

const double* afss_waveform_samples(const afss_waveform* w) { return w ? w->w.samples.data() : nullptr; }

void afss_waveform_free(afss_waveform* w) { delete w; }

afss_status afss_scoreset_create(afss_scoreset** out) {
  return Guard([&] {
    Require(out, "out is null");
    *out = new afss_scoreset{};
  });
}

afss_status afss_scoreset_add(afss_scoreset* s, const char* utterance_id, int is_spoof, double score) {
  return Guard([&] {
    Require(s && utterance_id, "null argument");
    Require(std::isfinite(score), "score must be finite");
    s->s.Add(utterance_id, is_spoof ? afss::Label::kFake : afss::Label::kReal, score);
  });
}

afss_status afss_scoreset_metrics(const afss_scoreset* s, double* eer, double* auc, double* acc, double* ap) {
  return Guard([&] {
    Require(s, "null argument");
    const afss::MetricSummary m = afss::Summarize(s->s);
    if (eer) *eer = m.eer;
    if (auc) *auc = m.auc;
    if (acc) *acc = m.acc;
    if (ap) *ap = m.ap;
  });
}

void afss_scoreset_free(afss_scoreset* s) { delete s; }

}  // extern "C"
