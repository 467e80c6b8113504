/* Copyright 2026 awe-lab authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

/* C interface to the acoustic word embedding library. All functions return
 * an awe_status; on failure awe_last_error() describes the most recent
 * error on the calling thread. Objects are opaque handles released with the
 * matching *_free function. */

#ifndef AWE_C_H_
#define AWE_C_H_

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum {
  AWE_OK = 0,
  AWE_ERR_INVALID_ARGUMENT = 1,
  AWE_ERR_IO = 2,
  AWE_ERR_RUNTIME = 3
} awe_status;

/* Message for the last failing call on this thread; empty string if none. */
const char* awe_last_error(void);

/* Parallelism cap from the AWE_THREADS environment variable (default 1). */
int awe_thread_budget(void);

typedef struct awe_corpus awe_corpus;
typedef struct awe_clusters awe_clusters;
typedef struct awe_model awe_model;
typedef struct awe_embeddings awe_embeddings;

/* --- corpus ------------------------------------------------------------ */

typedef struct {
  int n_languages;
  int shared_phone_pool;
  int phones_per_language;
  int vocab_size_per_language;
  int word_length_min;
  int word_length_max;
  int speakers_per_language;
  int instances_per_word;
  int frames_per_phone_min;
  int frames_per_phone_max;
  int feature_dim;
  double speaker_shift_scale;
  double noise_scale;
  double channel_scale;
  uint64_t seed;
} awe_synthetic_spec;

void awe_synthetic_spec_defaults(awe_synthetic_spec* spec);

awe_status awe_corpus_generate(const awe_synthetic_spec* spec, awe_corpus** out);
awe_status awe_corpus_load(const char* meta_path, const char* feat_path, awe_corpus** out);
awe_status awe_corpus_save(const awe_corpus* corpus, const char* meta_path,
                           const char* feat_path);
awe_status awe_corpus_filter_language(const awe_corpus* corpus, const char* language,
                                      awe_corpus** out);
int awe_corpus_size(const awe_corpus* corpus);
int awe_corpus_dim(const awe_corpus* corpus);
void awe_corpus_free(awe_corpus* corpus);

/* --- simulated term discovery ------------------------------------------ */

typedef struct {
  double label_error_rate;
  int boundary_jitter_frames;
  int n_pairs;        /* 0 keeps all within-cluster pairs */
  int fix_boundaries; /* boolean */
  int fix_labels;     /* boolean */
  uint64_t seed;
} awe_corruption_config;

void awe_corruption_config_defaults(awe_corruption_config* config);

awe_status awe_simulate_utd(const awe_corpus* corpus, const awe_corruption_config* config,
                            awe_clusters** out);
awe_status awe_clusters_save(const awe_clusters* clusters, const char* path);
awe_status awe_clusters_load(const char* path, awe_clusters** out);
void awe_clusters_free(awe_clusters* clusters);

/* --- models -------------------------------------------------------------
 * kind: ae | cae | cae_lc | classifier | classifier_branched | siamese */

typedef struct {
  const char* kind;
  int encoder_layers;
  int encoder_units;
  int decoder_layers;
  int decoder_units;
  int embedding_dim;
  double margin;
  int lang_embedding_dim;
  int vocab_cap_per_language;
} awe_model_config;

typedef struct {
  double learning_rate;
  int batch_size;
  int pair_batch_size;
  int epochs;
  int ae_pretrain_epochs;
  int siamese_p;
  int siamese_k;
  uint64_t seed;
} awe_train_config;

void awe_model_config_defaults(awe_model_config* config);
void awe_train_config_defaults(awe_train_config* config);

/* Supervised training on the listed languages of the corpus. n_pairs is the
 * CAE pair sample size (0 = every same-type pair once). log_path may be NULL
 * to skip writing the per-epoch training log. */
awe_status awe_train_supervised(const awe_corpus* corpus, const char* const* languages,
                                int n_languages, const awe_model_config* model_config,
                                const awe_train_config* train_config, int n_pairs,
                                const char* log_path, awe_model** out);

/* Training on simulated discovered clusters (single-language corpus). */
awe_status awe_train_utd(const awe_corpus* corpus, const awe_clusters* clusters,
                         const awe_model_config* model_config,
                         const awe_train_config* train_config, int n_pairs,
                         const char* log_path, awe_model** out);

awe_status awe_model_save(const awe_model* model, const char* path);
awe_status awe_model_load(const char* path, awe_model** out);
void awe_model_free(awe_model* model);

/* --- embeddings ---------------------------------------------------------- */

awe_status awe_embed_corpus(const awe_model* model, const awe_corpus* corpus, int n_threads,
                            awe_embeddings** out);
awe_status awe_downsample_corpus(const awe_corpus* corpus, int n_keep, awe_embeddings** out);
int awe_embeddings_rows(const awe_embeddings* embeddings);
int awe_embeddings_cols(const awe_embeddings* embeddings);
awe_status awe_embeddings_row(const awe_embeddings* embeddings, int row, double* out);
awe_status awe_embeddings_save_tsv(const awe_embeddings* embeddings, const char* path);
awe_status awe_embeddings_load_tsv(const char* path, awe_embeddings** out);
void awe_embeddings_free(awe_embeddings* embeddings);

/* --- evaluation -----------------------------------------------------------
 * mode: all | cross_speaker | cross_speaker_excl */

awe_status awe_eval_samediff(const awe_embeddings* embeddings, const awe_corpus* corpus,
                             const char* mode, const char* metrics_path,
                             const char* pr_curve_path /* nullable */);

awe_status awe_eval_dtw(const awe_corpus* corpus, const char* mode, int n_threads,
                        const char* metrics_path, const char* pr_curve_path /* nullable */);

/* --- probes ---------------------------------------------------------------
 * label for the classifier probe: speaker | language | word */

awe_status awe_probe_duration(const awe_embeddings* embeddings, const awe_corpus* corpus,
                              uint64_t seed, double* r2_out);
awe_status awe_probe_classifier(const awe_embeddings* embeddings, const awe_corpus* corpus,
                                const char* label, uint64_t seed, const char* out_path);
awe_status awe_probe_edit_distance(const awe_embeddings* embeddings, const awe_corpus* corpus,
                                   int max_bin, const char* out_path);
awe_status awe_probe_pca(const awe_embeddings* embeddings, const char* out_path);

/* --- experiments --------------------------------------------------------- */

/* Runs the full pipeline described by the config file; outputs land in the
 * config's output_dir, ending with manifest.tsv. */
awe_status awe_run_experiment(const char* config_path);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* AWE_C_H_ */
