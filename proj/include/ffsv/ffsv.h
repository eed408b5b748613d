// Copyright 2026 The ffsv Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

/*
 * C interface to the ffsv far-field speaker-verification toolkit.
 *
 * Objects are opaque handles created by ffsv_*_create / ffsv_*_read calls and
 * released with the matching ffsv_*_free. Every fallible call returns an
 * ffsv_status; on failure ffsv_last_error() describes the problem. The message
 * is thread-local and valid until the next failing call on the same thread.
 *
 * Handles are not internally synchronized. Distinct handles may be used from
 * different threads concurrently; read-only calls on a shared handle are safe.
 */
#ifndef FFSV_FFSV_H_
#define FFSV_FFSV_H_

#include <stddef.h>
#include <stdint.h>

#if defined(FFSV_BUILDING_LIBRARY)
#define FFSV_API __attribute__((visibility("default")))
#else
#define FFSV_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum ffsv_status {
  FFSV_OK = 0,
  FFSV_E_INVALID_ARGUMENT = 1, /* bad option, config key or value */
  FFSV_E_IO = 2,               /* file or directory not accessible */
  FFSV_E_FORMAT = 3,           /* malformed WAV / embedding / TSV file */
  FFSV_E_DATA = 4,             /* valid input that cannot be processed */
  FFSV_E_INTERNAL = 5
} ffsv_status;

FFSV_API const char* ffsv_version(void);
FFSV_API const char* ffsv_last_error(void);
FFSV_API const char* ffsv_status_name(ffsv_status status);

/* ---- audio ---------------------------------------------------------- */

typedef struct ffsv_audio ffsv_audio;

/* channel < 0 requires a mono file. */
FFSV_API ffsv_status ffsv_audio_read_wav(const char* path, int channel,
                                         ffsv_audio** out);
FFSV_API ffsv_status ffsv_audio_from_samples(const double* samples, size_t count,
                                             uint32_t sample_rate_hz,
                                             ffsv_audio** out);
/* Writes 16-bit PCM mono. */
FFSV_API ffsv_status ffsv_audio_write_wav(const ffsv_audio* audio,
                                          const char* path);
FFSV_API size_t ffsv_audio_length(const ffsv_audio* audio);
FFSV_API uint32_t ffsv_audio_sample_rate(const ffsv_audio* audio);
FFSV_API const double* ffsv_audio_samples(const ffsv_audio* audio);
FFSV_API void ffsv_audio_free(ffsv_audio* audio);

/* ---- noise extraction ----------------------------------------------- */

/* Voiced intervals [starts[i], ends[i]). A call with capacity 0 only stores
 * the count. A nonzero capacity that is too small fails with
 * FFSV_E_INVALID_ARGUMENT; *count still receives the required size. */
FFSV_API ffsv_status ffsv_detect_activity(const ffsv_audio* audio,
                                          double threshold_db, size_t frame_len,
                                          size_t hop, size_t* starts,
                                          size_t* ends, size_t capacity,
                                          size_t* count);

/* ---- augmentation --------------------------------------------------- */

FFSV_API ffsv_status ffsv_mix_at_snr(const ffsv_audio* clean,
                                     const ffsv_audio* noise,
                                     double target_snr_db, ffsv_audio** out,
                                     double* gain, double* rescale);

/* ---- denoising ------------------------------------------------------ */

typedef struct ffsv_gate_options {
  double prop_decrease;
  double n_std_thresh;
  int stationary;
  size_t n_fft;
  size_t hop;
  size_t smooth_frames;
  size_t smooth_bins;
  double ema_coeff;
} ffsv_gate_options;

FFSV_API void ffsv_gate_options_default(ffsv_gate_options* options);
FFSV_API ffsv_status ffsv_spectral_gate(const ffsv_audio* audio,
                                        const ffsv_gate_options* options,
                                        ffsv_audio** out);

/* ---- embeddings ----------------------------------------------------- */

typedef struct ffsv_mel_options {
  size_t n_fft;
  size_t hop;
  size_t n_mels;
  double f_min;
  double f_max; /* <= 0: Nyquist */
  double log_floor;
} ffsv_mel_options;

FFSV_API void ffsv_mel_options_default(ffsv_mel_options* options);

/* Writes 2 * n_mels values into out. */
FFSV_API ffsv_status ffsv_baseline_embed(const ffsv_audio* audio,
                                         const ffsv_mel_options* options,
                                         float* out, size_t capacity,
                                         size_t* dim);

typedef struct ffsv_embedding_set ffsv_embedding_set;

FFSV_API ffsv_status ffsv_embedding_set_create(size_t dim,
                                               ffsv_embedding_set** out);
FFSV_API ffsv_status ffsv_embedding_set_add(ffsv_embedding_set* set,
                                            const char* utterance_id,
                                            const float* values, size_t dim);
FFSV_API ffsv_status ffsv_embedding_set_read(const char* path,
                                             ffsv_embedding_set** out);
FFSV_API ffsv_status ffsv_embedding_set_write(const ffsv_embedding_set* set,
                                              const char* path);
FFSV_API size_t ffsv_embedding_set_size(const ffsv_embedding_set* set);
FFSV_API size_t ffsv_embedding_set_dim(const ffsv_embedding_set* set);
/* Records are ordered by id; index must be < size. NULL when out of range. */
FFSV_API const char* ffsv_embedding_set_id(const ffsv_embedding_set* set,
                                           size_t index);
FFSV_API const float* ffsv_embedding_set_values(const ffsv_embedding_set* set,
                                                size_t index);
FFSV_API const float* ffsv_embedding_set_find(const ffsv_embedding_set* set,
                                              const char* utterance_id);
FFSV_API void ffsv_embedding_set_free(ffsv_embedding_set* set);

/* ---- scoring -------------------------------------------------------- */

FFSV_API ffsv_status ffsv_cosine_dissimilarity(const float* a, const float* b,
                                               size_t dim, double* out);

/* labels[i] != 0 marks a target trial. similarity != 0 when higher scores
 * mean "same speaker"; dissimilarities are negated internally. */
FFSV_API ffsv_status ffsv_compute_eer(const double* scores, const int* labels,
                                      size_t count, int similarity,
                                      double* eer);
FFSV_API ffsv_status ffsv_compute_min_dcf(const double* scores,
                                          const int* labels, size_t count,
                                          int similarity, double p_target,
                                          double c_miss, double c_fa,
                                          double* min_dcf);

/* ---- experiment configuration and stages ---------------------------- */

typedef struct ffsv_config ffsv_config;

FFSV_API ffsv_status ffsv_config_create(ffsv_config** out);
/* key=value text file; '#' comments. */
FFSV_API ffsv_status ffsv_config_load(const char* path, ffsv_config** out);
FFSV_API ffsv_status ffsv_config_set(ffsv_config* config, const char* key,
                                     const char* value);
/* NULL for an unknown key. Valid until the next set on this key. */
FFSV_API const char* ffsv_config_get(const ffsv_config* config,
                                     const char* key);
FFSV_API void ffsv_config_free(ffsv_config* config);

typedef struct ffsv_pool_summary {
  size_t clips;
  size_t empty_sources;
  size_t total_samples;
  double total_duration_s;
  uint32_t sample_rate_hz;
} ffsv_pool_summary;

typedef struct ffsv_embed_summary {
  size_t utterances;
  size_t records;
  size_t dim;
} ffsv_embed_summary;

typedef struct ffsv_eval_summary {
  double eer;
  double min_dcf;
  double p_target;
  double c_miss;
  double c_fa;
  size_t n_target;
  size_t n_nontarget;
  size_t scored;
  size_t skipped;
  size_t excluded;
} ffsv_eval_summary;

/* Summary pointers may be NULL. */
FFSV_API ffsv_status ffsv_stage_mine_noise(const ffsv_config* config,
                                           const char* in_dir,
                                           const char* out_dir,
                                           ffsv_pool_summary* summary);
FFSV_API ffsv_status ffsv_stage_augment(const ffsv_config* config,
                                        const char* enroll_dir,
                                        const char* pool_dir,
                                        const char* out_dir, size_t* files);
FFSV_API ffsv_status ffsv_stage_denoise(const ffsv_config* config,
                                        const char* in_dir, const char* out_dir,
                                        size_t* files);
/* external may be NULL or empty for the baseline embedder. */
FFSV_API ffsv_status ffsv_stage_embed(const ffsv_config* config,
                                      const char* in_dir, const char* out_file,
                                      const char* external,
                                      ffsv_embed_summary* summary);
FFSV_API ffsv_status ffsv_stage_evaluate(const ffsv_config* config,
                                         const char* enroll_embeddings,
                                         const char* test_embeddings,
                                         const char* trials,
                                         const char* out_dir,
                                         ffsv_eval_summary* summary);
FFSV_API ffsv_status ffsv_run_pipeline(const ffsv_config* config,
                                       ffsv_eval_summary* summary);

/* Writes a synthetic two-role corpus under root: enroll/, test/, trials.tsv. */
FFSV_API ffsv_status ffsv_make_corpus(const char* root, uint64_t seed,
                                      int speakers);

#ifdef __cplusplus
}
#endif

#endif /* FFSV_FFSV_H_ */
