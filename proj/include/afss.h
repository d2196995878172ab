/*
   Copyright 2026  The AFSS Authors

   Licensed under the Apache License, Version 2.0 (the "License");
   you may not use this file except in compliance with the License.
   You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

   Unless required by applicable law or agreed to in writing, software
   distributed under the License is distributed on an "AS IS" BASIS,
   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
   See the License for the specific language governing permissions and
   limitations under the License.
 */

/* C interface to the AFSS anti-spoofing pipeline.
 *
 * Every function returns an afss_status. On failure the thread-local message
 * from afss_last_error() describes the problem. Objects are opaque handles
 * released with their matching _free function. Strings returned through
 * char** out-parameters are owned by the caller and released with
 * afss_string_free().
 */
#ifndef AFSS_H_
#define AFSS_H_

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define AFSS_API __declspec(dllexport)
#else
#define AFSS_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum afss_status {
  AFSS_OK = 0,
  AFSS_E_VALIDATION = 1, /* input data violates a contract (labels, manifest content) */
  AFSS_E_CONFIG = 2,     /* invalid configuration value or unknown key */
  AFSS_E_ARGUMENT = 3,   /* null pointer or out-of-range argument */
  AFSS_E_FORMAT = 4,     /* malformed file (manifest, wav, checkpoint, score file) */
  AFSS_E_IO = 5,         /* file system failure */
  AFSS_E_INPUT = 6,      /* unusable audio (too short, silent, non-finite) */
  AFSS_E_BACKEND = 7,    /* external converter or vocoder failed */
  AFSS_E_TRAINING = 8,   /* non-finite loss or similar optimization failure */
  AFSS_E_RUNTIME = 9     /* anything else, including a locked run directory */
} afss_status;

typedef struct afss_config afss_config;
typedef struct afss_waveform afss_waveform;
typedef struct afss_scoreset afss_scoreset;

AFSS_API const char* afss_version(void);
AFSS_API const char* afss_status_name(afss_status status);
/* Message of the last failure on this thread; "" after success. */
AFSS_API const char* afss_last_error(void);
/* 1 for statuses that signal bad input or configuration, 0 otherwise. */
AFSS_API int afss_status_is_validation(afss_status status);
AFSS_API void afss_string_free(char* s);

/* ---- configuration ---- */

AFSS_API afss_status afss_config_default(afss_config** out);
/* NULL path falls back to $AFSS_CONFIG, then to built-in defaults. */
AFSS_API afss_status afss_config_load(const char* path, afss_config** out);
/* "section.key=value", or "seed=N" for the top-level seed. */
AFSS_API afss_status afss_config_set(afss_config* cfg, const char* assignment);
/* Applies several assignments and validates once; cfg is unchanged on error. */
AFSS_API afss_status afss_config_set_all(afss_config* cfg, const char* const* assignments, size_t n);
/* Current value of "section.key" in canonical form. */
AFSS_API afss_status afss_config_get(const afss_config* cfg, const char* key, char** value);
AFSS_API afss_status afss_config_serialize(const afss_config* cfg, char** text);
AFSS_API afss_status afss_config_write(const afss_config* cfg, const char* path);
AFSS_API void afss_config_free(afss_config* cfg);

/* ---- commands ----
 * run_dir may be NULL to use [paths] run_dir. Reports are JSON documents.
 * force != 0 overwrites a differing config snapshot in the run directory.
 */

AFSS_API afss_status afss_synthesize(const afss_config* cfg, const char* real_manifest, const char* run_dir,
                                     int force, char** report_json);
/* stop_after_epoch <= 0 trains to completion; fresh != 0 ignores last.ckpt. */
AFSS_API afss_status afss_train(const afss_config* cfg, const char* train_manifest, const char* dev_manifest,
                                const char* run_dir, int force, int fresh, int stop_after_epoch,
                                char** report_json);
/* checkpoint NULL selects <run_dir>/checkpoints/best.ckpt. */
AFSS_API afss_status afss_evaluate(const afss_config* cfg, const char* checkpoint, const char* const* manifests,
                                   size_t n_manifests, const char* run_dir, int force, char** report_json);
AFSS_API afss_status afss_score_file(const char* score_file, const char* manifest, char** summary_json);
/* Returns AFSS_E_VALIDATION when issues were found; report lists one per line. */
AFSS_API afss_status afss_validate_manifest(const char* manifest, char** report);
/* Writes wav files under <dir>/audio plus <dir>/real.tsv; returns the manifest path. */
AFSS_API afss_status afss_make_toy_corpus(const char* dir, int n_speakers, int n_utterances, double seconds,
                                          uint64_t seed, char** manifest_path);

/* ---- waveforms ---- */

AFSS_API afss_status afss_waveform_load(const char* path, afss_waveform** out);
AFSS_API afss_status afss_waveform_from_samples(const double* samples, size_t n, int sample_rate,
                                                afss_waveform** out);
AFSS_API afss_status afss_waveform_save(const afss_waveform* w, const char* path);
AFSS_API size_t afss_waveform_length(const afss_waveform* w);
AFSS_API int afss_waveform_sample_rate(const afss_waveform* w);
/* Borrowed pointer, valid until the waveform is freed. */
AFSS_API const double* afss_waveform_samples(const afss_waveform* w);
AFSS_API void afss_waveform_free(afss_waveform* w);

/* ---- score sets ---- */

AFSS_API afss_status afss_scoreset_create(afss_scoreset** out);
AFSS_API afss_status afss_scoreset_add(afss_scoreset* s, const char* utterance_id, int is_spoof, double score);
AFSS_API afss_status afss_scoreset_metrics(const afss_scoreset* s, double* eer, double* auc, double* acc,
                                           double* ap);
AFSS_API void afss_scoreset_free(afss_scoreset* s);

#ifdef __cplusplus
}
#endif

#endif /* AFSS_H_ */
