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

#include "awe/experiment.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include "awe/features.hpp"
#include "awe/probe.hpp"
#include "awe/rng.hpp"

namespace fs = std::filesystem;

namespace awe {

namespace {

std::string Trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

std::vector<std::string> SplitList(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = Trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

bool ParseBool(const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw std::invalid_argument("bad boolean value: " + v);
}

using Section = std::map<std::string, std::string>;

struct IniFile {
  std::map<std::string, Section> sections;
  std::vector<std::string> section_order;
};

IniFile ParseIni(const std::string& text) {
  IniFile ini;
  std::istringstream ss(text);
  std::string line, current = "";
  while (std::getline(ss, line)) {
    line = Trim(line);
    if (line.empty() || line[0] == '#') continue;
    if (line.front() == '[' && line.back() == ']') {
      current = Trim(line.substr(1, line.size() - 2));
      if (ini.sections.find(current) == ini.sections.end()) ini.section_order.push_back(current);
      ini.sections[current];
      continue;
    }
    std::size_t eq = line.find('=');
    if (eq == std::string::npos) throw std::invalid_argument("bad config line: " + line);
    ini.sections[current][Trim(line.substr(0, eq))] = Trim(line.substr(eq + 1));
  }
  return ini;
}

std::string FormatG(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// Collects emitted files and their hashes; every file is written to a
// temporary name first and renamed into place.
class Emitter {
 public:
  explicit Emitter(fs::path dir) : dir_(std::move(dir)) {}

  void Emit(const std::string& rel, const std::function<void(const std::string&)>& writer) {
    fs::path tmp = dir_ / (rel + ".tmp");
    writer(tmp.string());
    fs::rename(tmp, dir_ / rel);
    entries_.push_back(ManifestEntry{rel, HashFile((dir_ / rel).string())});
  }

  void EmitPair(const std::string& rel_a, const std::string& rel_b,
                const std::function<void(const std::string&, const std::string&)>& writer) {
    fs::path tmp_a = dir_ / (rel_a + ".tmp");
    fs::path tmp_b = dir_ / (rel_b + ".tmp");
    writer(tmp_a.string(), tmp_b.string());
    fs::rename(tmp_a, dir_ / rel_a);
    fs::rename(tmp_b, dir_ / rel_b);
    entries_.push_back(ManifestEntry{rel_a, HashFile((dir_ / rel_a).string())});
    entries_.push_back(ManifestEntry{rel_b, HashFile((dir_ / rel_b).string())});
  }

  const std::vector<ManifestEntry>& entries() const { return entries_; }
  const fs::path& dir() const { return dir_; }

 private:
  fs::path dir_;
  std::vector<ManifestEntry> entries_;
};

struct ApRow {
  std::string model;
  std::string language;
  SameDiffResult result;
};

void WriteApTable(const std::vector<ApRow>& rows, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  out << "model\tlanguage\tmode\tap\tn_positive_pairs\tn_total_pairs\n";
  for (const ApRow& row : rows) {
    out << row.model << '\t' << row.language << '\t' << SameDiffModeName(row.result.mode) << '\t'
        << FormatG(row.result.ap) << '\t' << row.result.n_positive_pairs << '\t'
        << row.result.n_total_pairs << '\n';
  }
}

}  // namespace

std::string HashFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot hash " + path);
  std::uint64_t h = 0xcbf29ce484222325ULL;
  char buf[4096];
  while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
    for (std::streamsize i = 0; i < in.gcount(); ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 0x100000001b3ULL;
    }
    if (!in) break;
  }
  char hex[17];
  std::snprintf(hex, sizeof(hex), "%016llx", static_cast<unsigned long long>(h));
  return hex;
}

int ThreadBudget() {
  const char* env = std::getenv("AWE_THREADS");
  if (!env) return 1;
  int n = std::atoi(env);
  return n < 1 ? 1 : n;
}

ExperimentConfig ExperimentConfig::ParseFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ParseText(ss.str());
}

ExperimentConfig ExperimentConfig::ParseText(const std::string& text) {
  IniFile ini = ParseIni(text);
  ExperimentConfig cfg;

  if (auto it = ini.sections.find("experiment"); it != ini.sections.end()) {
    for (const auto& [key, value] : it->second) {
      if (key == "output_dir") cfg.output_dir = value;
      else if (key == "seed") cfg.seed = std::stoull(value);
      else if (key == "training_languages") cfg.training_languages = SplitList(value);
      else if (key == "zero_resource_languages") cfg.zero_resource_languages = SplitList(value);
      else if (key == "eval_mode") cfg.eval_mode = SameDiffModeFromName(value);
      else if (key == "baselines") cfg.baselines = SplitList(value);
      else if (key == "probes") cfg.probes = SplitList(value);
      else if (key == "noise_ladder") cfg.noise_ladder = ParseBool(value);
      else if (key == "downsample_keep") cfg.downsample_keep = std::stoi(value);
      else if (key == "cae_pairs") cfg.cae_pairs = std::stoi(value);
      else if (key == "language_ladder") {
        for (const std::string& v : SplitList(value)) cfg.language_ladder.push_back(std::stoi(v));
      } else {
        throw std::invalid_argument("unknown [experiment] key: " + key);
      }
    }
  }

  if (auto it = ini.sections.find("corpus"); it != ini.sections.end()) {
    const Section& s = it->second;
    if (s.count("meta_path") || s.count("feat_path")) {
      cfg.corpus_meta_path = s.at("meta_path");
      cfg.corpus_feat_path = s.at("feat_path");
    } else {
      SyntheticSpec spec;
      for (const auto& [key, value] : s) {
        if (key == "n_languages") spec.n_languages = std::stoi(value);
        else if (key == "shared_phone_pool") spec.shared_phone_pool = std::stoi(value);
        else if (key == "phones_per_language") spec.phones_per_language = std::stoi(value);
        else if (key == "vocab_size_per_language") spec.vocab_size_per_language = std::stoi(value);
        else if (key == "word_length_min") spec.word_length_min = std::stoi(value);
        else if (key == "word_length_max") spec.word_length_max = std::stoi(value);
        else if (key == "speakers_per_language") spec.speakers_per_language = std::stoi(value);
        else if (key == "instances_per_word") spec.instances_per_word = std::stoi(value);
        else if (key == "frames_per_phone_min") spec.frames_per_phone_min = std::stoi(value);
        else if (key == "frames_per_phone_max") spec.frames_per_phone_max = std::stoi(value);
        else if (key == "feature_dim") spec.feature_dim = std::stoi(value);
        else if (key == "speaker_shift_scale") spec.speaker_shift_scale = std::stod(value);
        else if (key == "noise_scale") spec.noise_scale = std::stod(value);
        else if (key == "channel_scale") spec.channel_scale = std::stod(value);
        else throw std::invalid_argument("unknown [corpus] key: " + key);
      }
      cfg.corpus_spec = spec;
    }
  }

  if (auto it = ini.sections.find("train"); it != ini.sections.end()) {
    for (const auto& [key, value] : it->second) {
      if (key == "learning_rate") cfg.train.learning_rate = std::stod(value);
      else if (key == "batch_size") cfg.train.batch_size = std::stoi(value);
      else if (key == "pair_batch_size") cfg.train.pair_batch_size = std::stoi(value);
      else if (key == "epochs") cfg.train.epochs = std::stoi(value);
      else if (key == "ae_pretrain_epochs") cfg.train.ae_pretrain_epochs = std::stoi(value);
      else if (key == "siamese_p") cfg.train.siamese_p = std::stoi(value);
      else if (key == "siamese_k") cfg.train.siamese_k = std::stoi(value);
      else throw std::invalid_argument("unknown [train] key: " + key);
    }
  }

  if (auto it = ini.sections.find("utd"); it != ini.sections.end()) {
    for (const auto& [key, value] : it->second) {
      if (key == "label_error_rate") cfg.utd.label_error_rate = std::stod(value);
      else if (key == "boundary_jitter_frames") cfg.utd.boundary_jitter_frames = std::stoi(value);
      else if (key == "n_pairs") cfg.utd.n_pairs = std::stoi(value);
      else if (key == "fix_boundaries") cfg.utd.fix_boundaries = ParseBool(value);
      else if (key == "fix_labels") cfg.utd.fix_labels = ParseBool(value);
      else throw std::invalid_argument("unknown [utd] key: " + key);
    }
  }

  for (const std::string& name : ini.section_order) {
    if (name.rfind("model.", 0) != 0) continue;
    ExperimentModel model;
    model.name = name.substr(6);
    for (const auto& [key, value] : ini.sections[name]) {
      if (key == "kind") model.config.kind = ModelKindFromName(value);
      else if (key == "training") model.utd = (value == "utd");
      else if (key == "encoder_layers") model.config.encoder_layers = std::stoi(value);
      else if (key == "encoder_units") model.config.encoder_units = std::stoi(value);
      else if (key == "decoder_layers") model.config.decoder_layers = std::stoi(value);
      else if (key == "decoder_units") model.config.decoder_units = std::stoi(value);
      else if (key == "embedding_dim") model.config.embedding_dim = std::stoi(value);
      else if (key == "margin") model.config.margin = std::stod(value);
      else if (key == "lang_embedding_dim") model.config.lang_embedding_dim = std::stoi(value);
      else if (key == "vocab_cap") model.config.vocab_cap_per_language = std::stoi(value);
      else throw std::invalid_argument("unknown [" + name + "] key: " + key);
    }
    cfg.models.push_back(std::move(model));
  }

  cfg.Validate();
  return cfg;
}

void ExperimentConfig::Validate() const {
  for (const std::string& lang : zero_resource_languages) {
    if (std::find(training_languages.begin(), training_languages.end(), lang) !=
        training_languages.end())
      throw std::invalid_argument("zero-resource language also listed for training: " + lang);
  }
  if (!corpus_spec && corpus_meta_path.empty())
    throw std::invalid_argument("config needs a [corpus] section (spec or paths)");
  for (const std::string& b : baselines) {
    if (b != "downsample" && b != "dtw")
      throw std::invalid_argument("unknown baseline: " + b);
  }
  for (const std::string& p : probes) {
    if (p != "duration" && p != "speaker" && p != "language" && p != "edit_distance" && p != "pca")
      throw std::invalid_argument("unknown probe: " + p);
  }
  for (int k : language_ladder) {
    if (k < 1 || k > static_cast<int>(training_languages.size()))
      throw std::invalid_argument("language_ladder count out of range");
  }
}

std::vector<ManifestEntry> RunExperiment(const ExperimentConfig& config) {
  config.Validate();
  const int threads = ThreadBudget();
  fs::create_directories(config.output_dir);
  Emitter emit{fs::path(config.output_dir)};

  auto stage = [](const std::string& name, auto&& fn) {
    try {
      return fn();
    } catch (const StageError&) {
      throw;
    } catch (const std::exception& e) {
      throw StageError(name, e.what());
    }
  };

  // --- corpus ---------------------------------------------------------
  Corpus corpus = stage("corpus", [&] {
    if (config.corpus_spec) {
      SyntheticSpec spec = *config.corpus_spec;
      spec.seed = DeriveSeed(config.seed, "corpus");
      Corpus c = GenerateCorpus(spec);
      emit.EmitPair("corpus_meta.tsv", "corpus_feats.bin",
                    [&](const std::string& a, const std::string& b) { SaveCorpus(c, a, b); });
      return c;
    }
    return LoadCorpus(config.corpus_meta_path, config.corpus_feat_path);
  });

  std::map<std::string, Corpus> zr_corpora;
  for (const std::string& lang : config.zero_resource_languages)
    zr_corpora.emplace(lang, corpus.FilterLanguage(lang));

  std::vector<ApRow> ap_rows;
  std::map<std::string, Mat> probe_embeddings;  // zero-resource lang -> first model's embeddings
  const ExperimentModel* probe_model = config.models.empty() ? nullptr : &config.models[0];
  ModelParams probe_params;
  bool have_probe_params = false;

  auto train_supervised = [&](const ExperimentModel& m, const std::vector<std::string>& langs,
                              const std::string& tag) {
    Vocabulary vocab = Vocabulary::Build(corpus, langs, m.config.vocab_cap_per_language);
    TrainingSet set = BuildSupervisedSet(corpus, langs, vocab, m.config.kind, config.cae_pairs,
                                         DeriveSeed(config.seed, "pairs/" + tag));
    TrainConfig tc = config.train;
    tc.seed = DeriveSeed(config.seed, "train/" + tag);
    return Train(m.config, tc, set);
  };

  auto train_utd = [&](const ExperimentModel& m, const std::string& lang,
                       CorruptionConfig cc, const std::string& tag) {
    const Corpus& mono = zr_corpora.at(lang);
    cc.seed = DeriveSeed(config.seed, "utd/" + m.name + "/" + lang);
    DiscoveredClusters clusters = SimulateUtd(mono, cc);
    TrainingSet set = BuildUtdSet(mono, clusters, m.config.kind, cc.n_pairs,
                                  DeriveSeed(config.seed, "pairs/" + tag));
    TrainConfig tc = config.train;
    tc.seed = DeriveSeed(config.seed, "train/" + tag);
    return Train(m.config, tc, set);
  };

  // --- models ----------------------------------------------------------
  for (const ExperimentModel& m : config.models) {
    stage("train/" + m.name, [&] {
      if (!m.utd) {
        TrainResult result = train_supervised(m, config.training_languages, m.name);
        emit.Emit("model_" + m.name + ".awem",
                  [&](const std::string& p) { SaveCheckpoint(result.params, p); });
        emit.Emit("train_" + m.name + ".tsv",
                  [&](const std::string& p) { WriteTrainLog(result.log, p, /*zero_wall_ms=*/true); });
        for (const std::string& lang : config.zero_resource_languages) {
          Mat emb = EmbedCorpus(result.params, zr_corpora.at(lang), threads);
          ap_rows.push_back(ApRow{m.name, lang, SameDiffAp(emb, zr_corpora.at(lang), config.eval_mode)});
          if (&m == probe_model) probe_embeddings[lang] = emb;
        }
        if (&m == probe_model) {
          probe_params = result.params;
          have_probe_params = true;
        }
      } else {
        for (const std::string& lang : config.zero_resource_languages) {
          std::string tag = m.name + "/" + lang;
          TrainResult result = train_utd(m, lang, config.utd, tag);
          emit.Emit("model_" + m.name + "_" + lang + ".awem",
                    [&](const std::string& p) { SaveCheckpoint(result.params, p); });
          emit.Emit("train_" + m.name + "_" + lang + ".tsv",
                    [&](const std::string& p) { WriteTrainLog(result.log, p, true); });
          Mat emb = EmbedCorpus(result.params, zr_corpora.at(lang), threads);
          ap_rows.push_back(ApRow{m.name, lang, SameDiffAp(emb, zr_corpora.at(lang), config.eval_mode)});
          if (&m == probe_model) probe_embeddings[lang] = emb;
          if (&m == probe_model && !have_probe_params) {
            probe_params = result.params;
            have_probe_params = true;
          }
        }
      }
      return 0;
    });
  }

  // --- baselines ---------------------------------------------------------
  stage("baselines", [&] {
    for (const std::string& baseline : config.baselines) {
      for (const std::string& lang : config.zero_resource_languages) {
        const Corpus& zr = zr_corpora.at(lang);
        if (baseline == "downsample") {
          Mat emb(zr.size(), static_cast<Eigen::Index>(config.downsample_keep) * zr.dim());
          for (int id = 0; id < zr.size(); ++id)
            emb.row(id) = DownsampleEmbed(zr.segment(id), config.downsample_keep).transpose();
          ap_rows.push_back(ApRow{"downsample", lang, SameDiffAp(emb, zr, config.eval_mode)});
          if (!probe_model && probe_embeddings.find(lang) == probe_embeddings.end())
            probe_embeddings[lang] = emb;
        } else {
          std::vector<PairMeta> meta;
          for (int id = 0; id < zr.size(); ++id) {
            const SegmentMeta& sm = zr.segment(id).meta;
            meta.push_back(PairMeta{WordKey(sm.language, sm.word), sm.speaker});
          }
          std::vector<double> costs = PairwiseDtwCosts(zr, /*normalize=*/true, threads);
          ap_rows.push_back(ApRow{"dtw", lang, SameDiffApFromDistances(costs, meta, config.eval_mode)});
        }
      }
    }
    return 0;
  });

  stage("eval", [&] {
    emit.Emit("ap_table.tsv", [&](const std::string& p) { WriteApTable(ap_rows, p); });
    return 0;
  });

  // --- language ladder ---------------------------------------------------
  if (!config.language_ladder.empty()) {
    stage("language-ladder", [&] {
      std::ofstream table;
      std::vector<std::string> lines;
      for (int k : config.language_ladder) {
        std::vector<std::string> langs(config.training_languages.begin(),
                                       config.training_languages.begin() + k);
        for (const ExperimentModel& m : config.models) {
          if (m.utd) continue;
          TrainResult result =
              train_supervised(m, langs, m.name + "/ladder" + std::to_string(k));
          for (const std::string& lang : config.zero_resource_languages) {
            Mat emb = EmbedCorpus(result.params, zr_corpora.at(lang), threads);
            SameDiffResult r = SameDiffAp(emb, zr_corpora.at(lang), config.eval_mode);
            lines.push_back(m.name + "\t" + std::to_string(k) + "\t" + lang + "\t" +
                            FormatG(r.ap));
          }
        }
      }
      emit.Emit("ap_vs_languages.tsv", [&](const std::string& p) {
        std::ofstream out(p);
        out << "model\tn_training_languages\tlanguage\tap\n";
        for (const std::string& line : lines) out << line << '\n';
      });
      return 0;
    });
  }

  // --- noise ladder --------------------------------------------------------
  if (config.noise_ladder) {
    stage("noise-ladder", [&] {
      struct Condition {
        const char* name;
        bool fix_boundaries;
        bool fix_labels;
      };
      const Condition conditions[] = {{"raw", false, false},
                                      {"fix_boundaries", true, false},
                                      {"fix_labels", false, true},
                                      {"fix_both", true, true}};
      std::vector<std::string> lines;
      for (const ExperimentModel& m : config.models) {
        if (!m.utd) continue;
        for (const std::string& lang : config.zero_resource_languages) {
          for (const Condition& cond : conditions) {
            CorruptionConfig cc = config.utd;
            cc.fix_boundaries = cond.fix_boundaries;
            cc.fix_labels = cond.fix_labels;
            std::string tag = m.name + "/" + lang + "/" + cond.name;
            TrainResult result = train_utd(m, lang, cc, tag);
            Mat emb = EmbedCorpus(result.params, zr_corpora.at(lang), threads);
            SameDiffResult r = SameDiffAp(emb, zr_corpora.at(lang), config.eval_mode);
            lines.push_back(m.name + "\t" + lang + "\t" + cond.name + "\t" + FormatG(r.ap));
          }
        }
      }
      emit.Emit("noise_ladder.tsv", [&](const std::string& p) {
        std::ofstream out(p);
        out << "model\tlanguage\tcondition\tap\n";
        for (const std::string& line : lines) out << line << '\n';
      });
      return 0;
    });
  }

  // --- probes --------------------------------------------------------------
  if (!config.probes.empty() && !probe_embeddings.empty()) {
    stage("probe", [&] {
      auto has = [&](const char* name) {
        return std::find(config.probes.begin(), config.probes.end(), name) != config.probes.end();
      };
      std::vector<std::string> duration_lines, speaker_lines;
      for (const auto& [lang, emb] : probe_embeddings) {
        const Corpus& zr = zr_corpora.at(lang);
        if (has("duration")) {
          std::vector<double> durations;
          for (int id = 0; id < zr.size(); ++id)
            durations.push_back(zr.segment(id).meta.duration_ms);
          double r2 = FitDurationRegression(emb, durations,
                                            DeriveSeed(config.seed, "probe/duration/" + lang));
          duration_lines.push_back(lang + "\t" + FormatG(r2));
        }
        if (has("speaker")) {
          std::vector<std::string> speakers;
          for (int id = 0; id < zr.size(); ++id) speakers.push_back(zr.segment(id).meta.speaker);
          ClassifierProbeResult r = FitLinearClassifier(
              emb, speakers, DeriveSeed(config.seed, "probe/speaker/" + lang));
          speaker_lines.push_back(lang + "\t" + FormatG(r.accuracy));
        }
        if (has("edit_distance")) {
          std::vector<EditDistanceBin> bins = CosineByEditDistance(zr, emb, 5);
          emit.Emit("probe_edit_distance_" + lang + ".tsv",
                    [&](const std::string& p) { WriteEditDistanceBins(bins, p); });
        }
        if (has("pca")) {
          Mat coords = Pca2d(emb);
          emit.Emit("pca_" + lang + ".tsv", [&](const std::string& p) { WritePca2d(coords, p); });
        }
      }
      if (has("duration")) {
        emit.Emit("probe_duration.tsv", [&](const std::string& p) {
          std::ofstream out(p);
          out << "language\tr2\n";
          for (const std::string& line : duration_lines) out << line << '\n';
        });
      }
      if (has("speaker")) {
        emit.Emit("probe_speaker.tsv", [&](const std::string& p) {
          std::ofstream out(p);
          out << "language\taccuracy\n";
          for (const std::string& line : speaker_lines) out << line << '\n';
        });
      }
      if (has("language") && have_probe_params) {
        // Language identity of shared triphone slices, all languages pooled.
        std::vector<std::string> all_langs = corpus.Languages();
        std::vector<Segment> tri = SharedTriphoneSegments(corpus, all_langs, 2);
        if (tri.size() >= 2 * all_langs.size()) {
          Mat emb(static_cast<Eigen::Index>(tri.size()), probe_params.config.embedding_dim);
          std::vector<std::string> labels;
          for (std::size_t i = 0; i < tri.size(); ++i) {
            emb.row(static_cast<Eigen::Index>(i)) = Embed(probe_params, tri[i]).transpose();
            labels.push_back(tri[i].meta.language);
          }
          ClassifierProbeResult r =
              FitLinearClassifier(emb, labels, DeriveSeed(config.seed, "probe/language"));
          emit.Emit("probe_language.tsv",
                    [&](const std::string& p) { WriteClassifierProbe(r, p); });
        }
      }
      return 0;
    });
  }

  // --- manifest -------------------------------------------------------------
  std::vector<ManifestEntry> manifest = emit.entries();
  {
    std::ofstream out(fs::path(config.output_dir) / "manifest.tsv");
    out << "file\tfnv1a64\n";
    for (const ManifestEntry& entry : manifest) out << entry.file << '\t' << entry.hash << '\n';
  }
  return manifest;
}

}  // namespace awe
