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

#include "awe_c.h"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include "awe/corpus.hpp"
#include "awe/dtw.hpp"
#include "awe/eval.hpp"
#include "awe/experiment.hpp"
#include "awe/features.hpp"
#include "awe/models.hpp"
#include "awe/probe.hpp"

struct awe_corpus {
  awe::Corpus value;
};
struct awe_clusters {
  awe::DiscoveredClusters value;
};
struct awe_model {
  awe::ModelParams value;
};
struct awe_embeddings {
  awe::Mat value;
};

namespace {

thread_local std::string g_last_error;

template <typename Fn>
awe_status Guard(Fn&& fn) {
  try {
    fn();
    g_last_error.clear();
    return AWE_OK;
  } catch (const std::invalid_argument& e) {
    g_last_error = e.what();
    return AWE_ERR_INVALID_ARGUMENT;
  } catch (const std::ios_base::failure& e) {
    g_last_error = e.what();
    return AWE_ERR_IO;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return AWE_ERR_RUNTIME;
  }
}

void Require(bool ok, const char* what) {
  if (!ok) throw std::invalid_argument(what);
}

awe::SyntheticSpec FromC(const awe_synthetic_spec& s) {
  awe::SyntheticSpec spec;
  spec.n_languages = s.n_languages;
  spec.shared_phone_pool = s.shared_phone_pool;
  spec.phones_per_language = s.phones_per_language;
  spec.vocab_size_per_language = s.vocab_size_per_language;
  spec.word_length_min = s.word_length_min;
  spec.word_length_max = s.word_length_max;
  spec.speakers_per_language = s.speakers_per_language;
  spec.instances_per_word = s.instances_per_word;
  spec.frames_per_phone_min = s.frames_per_phone_min;
  spec.frames_per_phone_max = s.frames_per_phone_max;
  spec.feature_dim = s.feature_dim;
  spec.speaker_shift_scale = s.speaker_shift_scale;
  spec.noise_scale = s.noise_scale;
  spec.channel_scale = s.channel_scale;
  spec.seed = s.seed;
  return spec;
}

awe::CorruptionConfig FromC(const awe_corruption_config& c) {
  awe::CorruptionConfig cfg;
  cfg.label_error_rate = c.label_error_rate;
  cfg.boundary_jitter_frames = c.boundary_jitter_frames;
  cfg.n_pairs = c.n_pairs;
  cfg.fix_boundaries = c.fix_boundaries != 0;
  cfg.fix_labels = c.fix_labels != 0;
  cfg.seed = c.seed;
  return cfg;
}

awe::ModelConfig FromC(const awe_model_config& c) {
  Require(c.kind != nullptr, "model config: kind is null");
  awe::ModelConfig cfg;
  cfg.kind = awe::ModelKindFromName(c.kind);
  cfg.encoder_layers = c.encoder_layers;
  cfg.encoder_units = c.encoder_units;
  cfg.decoder_layers = c.decoder_layers;
  cfg.decoder_units = c.decoder_units;
  cfg.embedding_dim = c.embedding_dim;
  cfg.margin = c.margin;
  cfg.lang_embedding_dim = c.lang_embedding_dim;
  cfg.vocab_cap_per_language = c.vocab_cap_per_language;
  return cfg;
}

awe::TrainConfig FromC(const awe_train_config& c) {
  awe::TrainConfig cfg;
  cfg.learning_rate = c.learning_rate;
  cfg.batch_size = c.batch_size;
  cfg.pair_batch_size = c.pair_batch_size;
  cfg.epochs = c.epochs;
  cfg.ae_pretrain_epochs = c.ae_pretrain_epochs;
  cfg.siamese_p = c.siamese_p;
  cfg.siamese_k = c.siamese_k;
  cfg.seed = c.seed;
  return cfg;
}

}  // namespace

extern "C" {

const char* awe_last_error(void) { return g_last_error.c_str(); }

int awe_thread_budget(void) { return awe::ThreadBudget(); }

void awe_synthetic_spec_defaults(awe_synthetic_spec* spec) {
  awe::SyntheticSpec d;
  spec->n_languages = d.n_languages;
  spec->shared_phone_pool = d.shared_phone_pool;
  spec->phones_per_language = d.phones_per_language;
  spec->vocab_size_per_language = d.vocab_size_per_language;
  spec->word_length_min = d.word_length_min;
  spec->word_length_max = d.word_length_max;
  spec->speakers_per_language = d.speakers_per_language;
  spec->instances_per_word = d.instances_per_word;
  spec->frames_per_phone_min = d.frames_per_phone_min;
  spec->frames_per_phone_max = d.frames_per_phone_max;
  spec->feature_dim = d.feature_dim;
  spec->speaker_shift_scale = d.speaker_shift_scale;
  spec->noise_scale = d.noise_scale;
  spec->channel_scale = d.channel_scale;
  spec->seed = d.seed;
}

void awe_corruption_config_defaults(awe_corruption_config* config) {
  awe::CorruptionConfig d;
  config->label_error_rate = d.label_error_rate;
  config->boundary_jitter_frames = d.boundary_jitter_frames;
  config->n_pairs = d.n_pairs;
  config->fix_boundaries = d.fix_boundaries ? 1 : 0;
  config->fix_labels = d.fix_labels ? 1 : 0;
  config->seed = d.seed;
}

void awe_model_config_defaults(awe_model_config* config) {
  awe::ModelConfig d;
  config->kind = "cae";
  config->encoder_layers = d.encoder_layers;
  config->encoder_units = d.encoder_units;
  config->decoder_layers = d.decoder_layers;
  config->decoder_units = d.decoder_units;
  config->embedding_dim = d.embedding_dim;
  config->margin = d.margin;
  config->lang_embedding_dim = d.lang_embedding_dim;
  config->vocab_cap_per_language = d.vocab_cap_per_language;
}

void awe_train_config_defaults(awe_train_config* config) {
  awe::TrainConfig d;
  config->learning_rate = d.learning_rate;
  config->batch_size = d.batch_size;
  config->pair_batch_size = d.pair_batch_size;
  config->epochs = d.epochs;
  config->ae_pretrain_epochs = d.ae_pretrain_epochs;
  config->siamese_p = d.siamese_p;
  config->siamese_k = d.siamese_k;
  config->seed = d.seed;
}

awe_status awe_corpus_generate(const awe_synthetic_spec* spec, awe_corpus** out) {
  return Guard([&] {
    Require(spec && out, "corpus_generate: null argument");
    *out = new awe_corpus{awe::GenerateCorpus(FromC(*spec))};
  });
}

awe_status awe_corpus_load(const char* meta_path, const char* feat_path, awe_corpus** out) {
  return Guard([&] {
    Require(meta_path && feat_path && out, "corpus_load: null argument");
    *out = new awe_corpus{awe::LoadCorpus(meta_path, feat_path)};
  });
}

awe_status awe_corpus_save(const awe_corpus* corpus, const char* meta_path,
                           const char* feat_path) {
  return Guard([&] {
    Require(corpus && meta_path && feat_path, "corpus_save: null argument");
    awe::SaveCorpus(corpus->value, meta_path, feat_path);
  });
}

awe_status awe_corpus_filter_language(const awe_corpus* corpus, const char* language,
                                      awe_corpus** out) {
  return Guard([&] {
    Require(corpus && language && out, "corpus_filter_language: null argument");
    *out = new awe_corpus{corpus->value.FilterLanguage(language)};
  });
}

int awe_corpus_size(const awe_corpus* corpus) { return corpus ? corpus->value.size() : 0; }
int awe_corpus_dim(const awe_corpus* corpus) { return corpus ? corpus->value.dim() : 0; }
void awe_corpus_free(awe_corpus* corpus) { delete corpus; }

awe_status awe_simulate_utd(const awe_corpus* corpus, const awe_corruption_config* config,
                            awe_clusters** out) {
  return Guard([&] {
    Require(corpus && config && out, "simulate_utd: null argument");
    *out = new awe_clusters{awe::SimulateUtd(corpus->value, FromC(*config))};
  });
}

awe_status awe_clusters_save(const awe_clusters* clusters, const char* path) {
  return Guard([&] {
    Require(clusters && path, "clusters_save: null argument");
    awe::SaveClusters(clusters->value, path);
  });
}

awe_status awe_clusters_load(const char* path, awe_clusters** out) {
  return Guard([&] {
    Require(path && out, "clusters_load: null argument");
    *out = new awe_clusters{awe::LoadClusters(path)};
  });
}

void awe_clusters_free(awe_clusters* clusters) { delete clusters; }

awe_status awe_train_supervised(const awe_corpus* corpus, const char* const* languages,
                                int n_languages, const awe_model_config* model_config,
                                const awe_train_config* train_config, int n_pairs,
                                const char* log_path, awe_model** out) {
  return Guard([&] {
    Require(corpus && languages && model_config && train_config && out,
            "train_supervised: null argument");
    Require(n_languages > 0, "train_supervised: no languages");
    std::vector<std::string> langs;
    for (int i = 0; i < n_languages; ++i) {
      Require(languages[i] != nullptr, "train_supervised: null language");
      langs.emplace_back(languages[i]);
    }
    awe::ModelConfig mc = FromC(*model_config);
    awe::TrainConfig tc = FromC(*train_config);
    awe::Vocabulary vocab =
        awe::Vocabulary::Build(corpus->value, langs, mc.vocab_cap_per_language);
    awe::TrainingSet set = awe::BuildSupervisedSet(corpus->value, langs, vocab, mc.kind,
                                                   n_pairs, awe::DeriveSeed(tc.seed, "pairs"));
    awe::TrainResult result = awe::Train(mc, tc, set);
    if (log_path) awe::WriteTrainLog(result.log, log_path);
    *out = new awe_model{std::move(result.params)};
  });
}

awe_status awe_train_utd(const awe_corpus* corpus, const awe_clusters* clusters,
                         const awe_model_config* model_config,
                         const awe_train_config* train_config, int n_pairs,
                         const char* log_path, awe_model** out) {
  return Guard([&] {
    Require(corpus && clusters && model_config && train_config && out,
            "train_utd: null argument");
    awe::ModelConfig mc = FromC(*model_config);
    awe::TrainConfig tc = FromC(*train_config);
    awe::TrainingSet set = awe::BuildUtdSet(corpus->value, clusters->value, mc.kind, n_pairs,
                                            awe::DeriveSeed(tc.seed, "pairs"));
    awe::TrainResult result = awe::Train(mc, tc, set);
    if (log_path) awe::WriteTrainLog(result.log, log_path);
    *out = new awe_model{std::move(result.params)};
  });
}

awe_status awe_model_save(const awe_model* model, const char* path) {
  return Guard([&] {
    Require(model && path, "model_save: null argument");
    awe::SaveCheckpoint(model->value, path);
  });
}

awe_status awe_model_load(const char* path, awe_model** out) {
  return Guard([&] {
    Require(path && out, "model_load: null argument");
    *out = new awe_model{awe::LoadCheckpoint(path)};
  });
}

void awe_model_free(awe_model* model) { delete model; }

awe_status awe_embed_corpus(const awe_model* model, const awe_corpus* corpus, int n_threads,
                            awe_embeddings** out) {
  return Guard([&] {
    Require(model && corpus && out, "embed_corpus: null argument");
    *out = new awe_embeddings{awe::EmbedCorpus(model->value, corpus->value, n_threads)};
  });
}

awe_status awe_downsample_corpus(const awe_corpus* corpus, int n_keep, awe_embeddings** out) {
  return Guard([&] {
    Require(corpus && out, "downsample_corpus: null argument");
    const awe::Corpus& c = corpus->value;
    Require(c.size() > 0, "downsample_corpus: empty corpus");
    awe::Mat emb(c.size(), static_cast<Eigen::Index>(n_keep) * c.dim());
    for (int id = 0; id < c.size(); ++id)
      emb.row(id) = awe::DownsampleEmbed(c.segment(id), n_keep).transpose();
    *out = new awe_embeddings{std::move(emb)};
  });
}

int awe_embeddings_rows(const awe_embeddings* embeddings) {
  return embeddings ? static_cast<int>(embeddings->value.rows()) : 0;
}

int awe_embeddings_cols(const awe_embeddings* embeddings) {
  return embeddings ? static_cast<int>(embeddings->value.cols()) : 0;
}

awe_status awe_embeddings_row(const awe_embeddings* embeddings, int row, double* out) {
  return Guard([&] {
    Require(embeddings && out, "embeddings_row: null argument");
    Require(row >= 0 && row < embeddings->value.rows(), "embeddings_row: row out of range");
    for (Eigen::Index c = 0; c < embeddings->value.cols(); ++c)
      out[c] = embeddings->value(row, c);
  });
}

awe_status awe_embeddings_save_tsv(const awe_embeddings* embeddings, const char* path) {
  return Guard([&] {
    Require(embeddings && path, "embeddings_save_tsv: null argument");
    std::ofstream f(path);
    if (!f) throw std::runtime_error(std::string("cannot open ") + path);
    const awe::Mat& m = embeddings->value;
    f << "id";
    for (Eigen::Index c = 0; c < m.cols(); ++c) f << "\te" << c;
    f << '\n';
    char buf[64];
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      f << r;
      for (Eigen::Index c = 0; c < m.cols(); ++c) {
        std::snprintf(buf, sizeof(buf), "%.17g", m(r, c));
        f << '\t' << buf;
      }
      f << '\n';
    }
  });
}

awe_status awe_embeddings_load_tsv(const char* path, awe_embeddings** out) {
  return Guard([&] {
    Require(path && out, "embeddings_load_tsv: null argument");
    std::ifstream f(path);
    if (!f) throw std::runtime_error(std::string("cannot open ") + path);
    std::string line;
    if (!std::getline(f, line)) throw std::runtime_error("embeddings file is empty");
    std::vector<std::vector<double>> rows;
    while (std::getline(f, line)) {
      if (line.empty()) continue;
      std::istringstream ss(line);
      std::string cell;
      std::getline(ss, cell, '\t');  // id column
      std::vector<double> row;
      while (std::getline(ss, cell, '\t')) row.push_back(std::stod(cell));
      if (!rows.empty() && rows[0].size() != row.size())
        throw std::runtime_error("embeddings file has ragged rows");
      rows.push_back(std::move(row));
    }
    if (rows.empty()) throw std::runtime_error("embeddings file has no rows");
    awe::Mat m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows[0].size()));
    for (std::size_t r = 0; r < rows.size(); ++r)
      for (std::size_t c = 0; c < rows[r].size(); ++c)
        m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
    *out = new awe_embeddings{std::move(m)};
  });
}

void awe_embeddings_free(awe_embeddings* embeddings) { delete embeddings; }

awe_status awe_eval_samediff(const awe_embeddings* embeddings, const awe_corpus* corpus,
                             const char* mode, const char* metrics_path,
                             const char* pr_curve_path) {
  return Guard([&] {
    Require(embeddings && corpus && mode && metrics_path, "eval_samediff: null argument");
    awe::SameDiffResult result =
        awe::SameDiffAp(embeddings->value, corpus->value, awe::SameDiffModeFromName(mode));
    awe::WriteSameDiffResult(result, metrics_path, pr_curve_path ? pr_curve_path : "");
  });
}

awe_status awe_eval_dtw(const awe_corpus* corpus, const char* mode, int n_threads,
                        const char* metrics_path, const char* pr_curve_path) {
  return Guard([&] {
    Require(corpus && mode && metrics_path, "eval_dtw: null argument");
    const awe::Corpus& c = corpus->value;
    std::vector<awe::PairMeta> meta;
    for (int id = 0; id < c.size(); ++id) {
      const awe::SegmentMeta& m = c.segment(id).meta;
      meta.push_back(awe::PairMeta{awe::WordKey(m.language, m.word), m.speaker});
    }
    std::vector<double> costs = awe::PairwiseDtwCosts(c, /*normalize=*/true, n_threads);
    awe::SameDiffResult result =
        awe::SameDiffApFromDistances(costs, meta, awe::SameDiffModeFromName(mode));
    awe::WriteSameDiffResult(result, metrics_path, pr_curve_path ? pr_curve_path : "");
  });
}

awe_status awe_probe_duration(const awe_embeddings* embeddings, const awe_corpus* corpus,
                              uint64_t seed, double* r2_out) {
  return Guard([&] {
    Require(embeddings && corpus && r2_out, "probe_duration: null argument");
    std::vector<double> durations;
    for (int id = 0; id < corpus->value.size(); ++id)
      durations.push_back(corpus->value.segment(id).meta.duration_ms);
    *r2_out = awe::FitDurationRegression(embeddings->value, durations, seed);
  });
}

awe_status awe_probe_classifier(const awe_embeddings* embeddings, const awe_corpus* corpus,
                                const char* label, uint64_t seed, const char* out_path) {
  return Guard([&] {
    Require(embeddings && corpus && label && out_path, "probe_classifier: null argument");
    std::string which = label;
    std::vector<std::string> labels;
    for (int id = 0; id < corpus->value.size(); ++id) {
      const awe::SegmentMeta& m = corpus->value.segment(id).meta;
      if (which == "speaker") labels.push_back(m.speaker);
      else if (which == "language") labels.push_back(m.language);
      else if (which == "word") labels.push_back(awe::WordKey(m.language, m.word));
      else throw std::invalid_argument("probe_classifier: unknown label " + which);
    }
    awe::ClassifierProbeResult result =
        awe::FitLinearClassifier(embeddings->value, labels, seed);
    awe::WriteClassifierProbe(result, out_path);
  });
}

awe_status awe_probe_edit_distance(const awe_embeddings* embeddings, const awe_corpus* corpus,
                                   int max_bin, const char* out_path) {
  return Guard([&] {
    Require(embeddings && corpus && out_path, "probe_edit_distance: null argument");
    std::vector<awe::EditDistanceBin> bins =
        awe::CosineByEditDistance(corpus->value, embeddings->value, max_bin);
    awe::WriteEditDistanceBins(bins, out_path);
  });
}

awe_status awe_probe_pca(const awe_embeddings* embeddings, const char* out_path) {
  return Guard([&] {
    Require(embeddings && out_path, "probe_pca: null argument");
    awe::WritePca2d(awe::Pca2d(embeddings->value), out_path);
  });
}

awe_status awe_run_experiment(const char* config_path) {
  return Guard([&] {
    Require(config_path != nullptr, "run_experiment: null config path");
    awe::RunExperiment(awe::ExperimentConfig::ParseFile(config_path));
  });
}

}  // extern "C"
