// Copyright 2026 awe-lab authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Command-line frontend; all work goes through the C API in awe_c.h.

#include <cstdio>
#include <memory>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "awe_c.h"

namespace {

int Fail(awe_status status) {
  std::fprintf(stderr, "error: %s\n", awe_last_error());
  return static_cast<int>(status);
}

#define CHECK(call)                         \
  do {                                      \
    awe_status status_ = (call);            \
    if (status_ != AWE_OK) return Fail(status_); \
  } while (0)

struct CorpusHandle {
  awe_corpus* ptr = nullptr;
  ~CorpusHandle() { awe_corpus_free(ptr); }
};
struct ClustersHandle {
  awe_clusters* ptr = nullptr;
  ~ClustersHandle() { awe_clusters_free(ptr); }
};
struct ModelHandle {
  awe_model* ptr = nullptr;
  ~ModelHandle() { awe_model_free(ptr); }
};
struct EmbeddingsHandle {
  awe_embeddings* ptr = nullptr;
  ~EmbeddingsHandle() { awe_embeddings_free(ptr); }
};

struct CorpusArgs {
  std::string meta, feats, language;
};

void AddCorpusOptions(CLI::App* cmd, CorpusArgs& args) {
  cmd->add_option("--meta", args.meta, "corpus metadata TSV")->required();
  cmd->add_option("--feats", args.feats, "corpus feature file")->required();
  cmd->add_option("--language", args.language, "restrict to one language");
}

int LoadCorpusArg(const CorpusArgs& args, CorpusHandle& corpus) {
  CHECK(awe_corpus_load(args.meta.c_str(), args.feats.c_str(), &corpus.ptr));
  if (!args.language.empty()) {
    CorpusHandle filtered;
    CHECK(awe_corpus_filter_language(corpus.ptr, args.language.c_str(), &filtered.ptr));
    std::swap(corpus.ptr, filtered.ptr);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acoustic word embedding lab"};
  app.require_subcommand(1);

  // --- gen-corpus ---------------------------------------------------------
  auto* gen = app.add_subcommand("gen-corpus", "generate a synthetic multilingual corpus");
  awe_synthetic_spec spec;
  awe_synthetic_spec_defaults(&spec);
  std::string gen_meta, gen_feats;
  gen->add_option("--meta", gen_meta, "output metadata TSV")->required();
  gen->add_option("--feats", gen_feats, "output feature file")->required();
  gen->add_option("--languages", spec.n_languages, "number of languages");
  gen->add_option("--phone-pool", spec.shared_phone_pool, "shared phone pool size");
  gen->add_option("--phones-per-language", spec.phones_per_language);
  gen->add_option("--vocab", spec.vocab_size_per_language, "word types per language");
  gen->add_option("--word-length-min", spec.word_length_min);
  gen->add_option("--word-length-max", spec.word_length_max);
  gen->add_option("--speakers", spec.speakers_per_language, "speakers per language");
  gen->add_option("--instances", spec.instances_per_word, "instances per word per speaker");
  gen->add_option("--frames-per-phone-min", spec.frames_per_phone_min);
  gen->add_option("--frames-per-phone-max", spec.frames_per_phone_max);
  gen->add_option("--dim", spec.feature_dim, "feature dimension");
  gen->add_option("--speaker-shift", spec.speaker_shift_scale);
  gen->add_option("--noise", spec.noise_scale);
  gen->add_option("--channel", spec.channel_scale);
  gen->add_option("--seed", spec.seed);

  // --- simulate-utd ---------------------------------------------------------
  auto* utd = app.add_subcommand("simulate-utd", "corrupt gold clusters into pseudo terms");
  CorpusArgs utd_corpus;
  AddCorpusOptions(utd, utd_corpus);
  awe_corruption_config corruption;
  awe_corruption_config_defaults(&corruption);
  std::string utd_out;
  utd->add_option("--out", utd_out, "output cluster TSV")->required();
  utd->add_option("--label-error-rate", corruption.label_error_rate);
  utd->add_option("--boundary-jitter", corruption.boundary_jitter_frames);
  utd->add_flag("--fix-boundaries", corruption.fix_boundaries);
  utd->add_flag("--fix-labels", corruption.fix_labels);
  utd->add_option("--seed", corruption.seed);

  // --- train -----------------------------------------------------------------
  auto* train = app.add_subcommand("train", "train an embedding model");
  CorpusArgs train_corpus;
  AddCorpusOptions(train, train_corpus);
  awe_model_config model_config;
  awe_model_config_defaults(&model_config);
  awe_train_config train_config;
  awe_train_config_defaults(&train_config);
  std::string kind = "cae", train_out, train_log, train_clusters;
  std::vector<std::string> train_languages;
  int train_pairs = 0;
  train->add_option("--out", train_out, "output checkpoint")->required();
  train->add_option("--kind", kind,
                    "ae | cae | cae_lc | classifier | classifier_branched | siamese");
  train->add_option("--languages", train_languages, "training languages (supervised)")
      ->delimiter(',');
  train->add_option("--clusters", train_clusters, "discovered cluster TSV (UTD training)");
  train->add_option("--log", train_log, "per-epoch loss TSV");
  train->add_option("--pairs", train_pairs, "pair sample size (0 = all pairs)");
  train->add_option("--encoder-layers", model_config.encoder_layers);
  train->add_option("--encoder-units", model_config.encoder_units);
  train->add_option("--decoder-layers", model_config.decoder_layers);
  train->add_option("--decoder-units", model_config.decoder_units);
  train->add_option("--embedding-dim", model_config.embedding_dim);
  train->add_option("--margin", model_config.margin);
  train->add_option("--lang-embedding-dim", model_config.lang_embedding_dim);
  train->add_option("--vocab-cap", model_config.vocab_cap_per_language);
  train->add_option("--lr", train_config.learning_rate);
  train->add_option("--batch-size", train_config.batch_size);
  train->add_option("--pair-batch-size", train_config.pair_batch_size);
  train->add_option("--epochs", train_config.epochs);
  train->add_option("--ae-pretrain-epochs", train_config.ae_pretrain_epochs);
  train->add_option("--siamese-p", train_config.siamese_p);
  train->add_option("--siamese-k", train_config.siamese_k);
  train->add_option("--seed", train_config.seed);

  // --- embed -------------------------------------------------------------------
  auto* embed = app.add_subcommand("embed", "embed every segment of a corpus");
  CorpusArgs embed_corpus;
  AddCorpusOptions(embed, embed_corpus);
  std::string embed_model, embed_out;
  int embed_keep = 0;
  embed->add_option("--model", embed_model, "model checkpoint");
  embed->add_option("--downsample", embed_keep, "downsampling baseline with this many frames");
  embed->add_option("--out", embed_out, "output embedding TSV")->required();

  // --- eval-samediff ---------------------------------------------------------
  auto* evs = app.add_subcommand("eval-samediff", "same-different AP of stored embeddings");
  CorpusArgs evs_corpus;
  AddCorpusOptions(evs, evs_corpus);
  std::string evs_embeddings, evs_mode = "cross_speaker", evs_metrics, evs_pr;
  evs->add_option("--embeddings", evs_embeddings, "embedding TSV")->required();
  evs->add_option("--mode", evs_mode, "all | cross_speaker | cross_speaker_excl");
  evs->add_option("--metrics", evs_metrics, "output metric TSV")->required();
  evs->add_option("--pr-curve", evs_pr, "output precision/recall TSV");

  // --- eval-dtw -----------------------------------------------------------------
  auto* evd = app.add_subcommand("eval-dtw", "same-different AP of the DTW baseline");
  CorpusArgs evd_corpus;
  AddCorpusOptions(evd, evd_corpus);
  std::string evd_mode = "cross_speaker", evd_metrics, evd_pr;
  evd->add_option("--mode", evd_mode, "all | cross_speaker | cross_speaker_excl");
  evd->add_option("--metrics", evd_metrics, "output metric TSV")->required();
  evd->add_option("--pr-curve", evd_pr, "output precision/recall TSV");

  // --- probe --------------------------------------------------------------------
  auto* probe = app.add_subcommand("probe", "diagnostics on stored embeddings");
  CorpusArgs probe_corpus;
  AddCorpusOptions(probe, probe_corpus);
  std::string probe_embeddings, probe_kind, probe_out;
  uint64_t probe_seed = 0;
  int probe_max_bin = 5;
  probe->add_option("--embeddings", probe_embeddings, "embedding TSV")->required();
  probe->add_option("--kind", probe_kind,
                    "duration | speaker | language | word | edit_distance | pca")
      ->required();
  probe->add_option("--out", probe_out, "output TSV")->required();
  probe->add_option("--seed", probe_seed, "train/test split seed");
  probe->add_option("--max-bin", probe_max_bin, "edit-distance bin cap");

  // --- run-experiment --------------------------------------------------------
  auto* run = app.add_subcommand("run-experiment", "full pipeline from a config file");
  std::string run_config;
  run->add_option("--config", run_config, "experiment config file")->required();

  CLI11_PARSE(app, argc, argv);
  const int threads = awe_thread_budget();

  if (gen->parsed()) {
    CorpusHandle corpus;
    CHECK(awe_corpus_generate(&spec, &corpus.ptr));
    CHECK(awe_corpus_save(corpus.ptr, gen_meta.c_str(), gen_feats.c_str()));
    std::printf("segments\t%d\n", awe_corpus_size(corpus.ptr));
    return 0;
  }

  if (utd->parsed()) {
    CorpusHandle corpus;
    if (int rc = LoadCorpusArg(utd_corpus, corpus)) return rc;
    ClustersHandle clusters;
    CHECK(awe_simulate_utd(corpus.ptr, &corruption, &clusters.ptr));
    CHECK(awe_clusters_save(clusters.ptr, utd_out.c_str()));
    return 0;
  }

  if (train->parsed()) {
    model_config.kind = kind.c_str();
    CorpusHandle corpus;
    if (int rc = LoadCorpusArg(train_corpus, corpus)) return rc;
    ModelHandle model;
    const char* log = train_log.empty() ? nullptr : train_log.c_str();
    if (!train_clusters.empty()) {
      ClustersHandle clusters;
      CHECK(awe_clusters_load(train_clusters.c_str(), &clusters.ptr));
      CHECK(awe_train_utd(corpus.ptr, clusters.ptr, &model_config, &train_config, train_pairs,
                          log, &model.ptr));
    } else {
      if (train_languages.empty()) {
        std::fprintf(stderr, "error: train needs --languages or --clusters\n");
        return 1;
      }
      std::vector<const char*> langs;
      for (const std::string& l : train_languages) langs.push_back(l.c_str());
      CHECK(awe_train_supervised(corpus.ptr, langs.data(), static_cast<int>(langs.size()),
                                 &model_config, &train_config, train_pairs, log, &model.ptr));
    }
    CHECK(awe_model_save(model.ptr, train_out.c_str()));
    return 0;
  }

  if (embed->parsed()) {
    CorpusHandle corpus;
    if (int rc = LoadCorpusArg(embed_corpus, corpus)) return rc;
    EmbeddingsHandle embeddings;
    if (embed_keep > 0) {
      CHECK(awe_downsample_corpus(corpus.ptr, embed_keep, &embeddings.ptr));
    } else if (!embed_model.empty()) {
      ModelHandle model;
      CHECK(awe_model_load(embed_model.c_str(), &model.ptr));
      CHECK(awe_embed_corpus(model.ptr, corpus.ptr, threads, &embeddings.ptr));
    } else {
      std::fprintf(stderr, "error: embed needs --model or --downsample\n");
      return 1;
    }
    CHECK(awe_embeddings_save_tsv(embeddings.ptr, embed_out.c_str()));
    return 0;
  }

  if (evs->parsed()) {
    CorpusHandle corpus;
    if (int rc = LoadCorpusArg(evs_corpus, corpus)) return rc;
    EmbeddingsHandle embeddings;
    CHECK(awe_embeddings_load_tsv(evs_embeddings.c_str(), &embeddings.ptr));
    CHECK(awe_eval_samediff(embeddings.ptr, corpus.ptr, evs_mode.c_str(), evs_metrics.c_str(),
                            evs_pr.empty() ? nullptr : evs_pr.c_str()));
    return 0;
  }

  if (evd->parsed()) {
    CorpusHandle corpus;
    if (int rc = LoadCorpusArg(evd_corpus, corpus)) return rc;
    CHECK(awe_eval_dtw(corpus.ptr, evd_mode.c_str(), threads, evd_metrics.c_str(),
                       evd_pr.empty() ? nullptr : evd_pr.c_str()));
    return 0;
  }

  if (probe->parsed()) {
    CorpusHandle corpus;
    if (int rc = LoadCorpusArg(probe_corpus, corpus)) return rc;
    EmbeddingsHandle embeddings;
    CHECK(awe_embeddings_load_tsv(probe_embeddings.c_str(), &embeddings.ptr));
    if (probe_kind == "duration") {
      double r2 = 0.0;
      CHECK(awe_probe_duration(embeddings.ptr, corpus.ptr, probe_seed, &r2));
      FILE* f = std::fopen(probe_out.c_str(), "w");
      if (!f) {
        std::fprintf(stderr, "error: cannot open %s\n", probe_out.c_str());
        return 1;
      }
      std::fprintf(f, "metric\tvalue\nr2\t%.17g\n", r2);
      std::fclose(f);
    } else if (probe_kind == "speaker" || probe_kind == "language" || probe_kind == "word") {
      CHECK(awe_probe_classifier(embeddings.ptr, corpus.ptr, probe_kind.c_str(), probe_seed,
                                 probe_out.c_str()));
    } else if (probe_kind == "edit_distance") {
      CHECK(awe_probe_edit_distance(embeddings.ptr, corpus.ptr, probe_max_bin,
                                    probe_out.c_str()));
    } else if (probe_kind == "pca") {
      CHECK(awe_probe_pca(embeddings.ptr, probe_out.c_str()));
    } else {
      std::fprintf(stderr, "error: unknown probe kind %s\n", probe_kind.c_str());
      return 1;
    }
    return 0;
  }

  if (run->parsed()) {
    CHECK(awe_run_experiment(run_config.c_str()));
    return 0;
  }

  return 0;
}
