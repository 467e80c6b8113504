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

#include "awe/models.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <thread>

namespace awe {

namespace {

void ScaleAll(ParamList list, double factor) {
  for (const ParamRef& r : list.refs())
    for (Eigen::Index j = 0; j < r.size; ++j) r.data[j] *= factor;
}

template <typename T>
void WriteBin(std::ofstream& out, T value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T ReadBin(std::ifstream& in) {
  T value{};
  in.read(reinterpret_cast<char*>(&value), sizeof(T));
  if (!in) throw std::runtime_error("checkpoint truncated");
  return value;
}

void WriteIntVec(std::ofstream& out, const std::vector<int>& v) {
  WriteBin<std::uint32_t>(out, static_cast<std::uint32_t>(v.size()));
  for (int x : v) WriteBin<std::int32_t>(out, x);
}

std::vector<int> ReadIntVec(std::ifstream& in) {
  auto n = ReadBin<std::uint32_t>(in);
  std::vector<int> v(n);
  for (auto& x : v) x = ReadBin<std::int32_t>(in);
  return v;
}

}  // namespace

std::string ModelKindName(ModelKind kind) {
  switch (kind) {
    case ModelKind::kAe: return "ae";
    case ModelKind::kCae: return "cae";
    case ModelKind::kCaeLc: return "cae_lc";
    case ModelKind::kClassifier: return "classifier";
    case ModelKind::kClassifierBranched: return "classifier_branched";
    case ModelKind::kSiamese: return "siamese";
  }
  throw std::invalid_argument("unknown model kind");
}

ModelKind ModelKindFromName(const std::string& name) {
  if (name == "ae") return ModelKind::kAe;
  if (name == "cae") return ModelKind::kCae;
  if (name == "cae_lc") return ModelKind::kCaeLc;
  if (name == "classifier") return ModelKind::kClassifier;
  if (name == "classifier_branched") return ModelKind::kClassifierBranched;
  if (name == "siamese") return ModelKind::kSiamese;
  throw std::invalid_argument("unknown model kind: " + name);
}

void ModelConfig::Validate() const {
  auto require = [](bool ok, const char* msg) {
    if (!ok) throw std::invalid_argument(std::string("invalid model config: ") + msg);
  };
  require(encoder_layers >= 1 && encoder_units >= 1, "encoder sizes >= 1");
  require(decoder_layers >= 1 && decoder_units >= 1, "decoder sizes >= 1");
  require(embedding_dim >= 1, "embedding_dim >= 1");
  require(margin > 0, "margin > 0");
  require(lang_embedding_dim >= 1, "lang_embedding_dim >= 1");
  require(vocab_cap_per_language >= 1, "vocab cap >= 1");
}

void TrainConfig::Validate() const {
  auto require = [](bool ok, const char* msg) {
    if (!ok) throw std::invalid_argument(std::string("invalid train config: ") + msg);
  };
  require(learning_rate > 0, "learning_rate > 0");
  require(batch_size >= 1 && pair_batch_size >= 1, "batch sizes >= 1");
  require(epochs >= 0 && ae_pretrain_epochs >= 0, "epochs >= 0");
  require(siamese_p >= 2, "siamese_p >= 2");
  require(siamese_k >= 2, "siamese_k >= 2");
}

Vocabulary Vocabulary::Build(const Corpus& corpus, const std::vector<std::string>& languages,
                             int cap_per_language) {
  Vocabulary vocab;
  vocab.languages = languages;
  int next_class = 0;
  for (std::size_t l = 0; l < languages.size(); ++l) {
    // Most frequent types first, ties by word string; capped per language.
    std::vector<std::pair<std::string, int>> counts;  // word -> count
    std::string prefix = languages[l] + "\t";
    for (const auto& [key, ids] : corpus.by_word()) {
      if (key.compare(0, prefix.size(), prefix) == 0)
        counts.emplace_back(key.substr(prefix.size()), static_cast<int>(ids.size()));
    }
    std::sort(counts.begin(), counts.end(), [](const auto& a, const auto& b) {
      if (a.second != b.second) return a.second > b.second;
      return a.first < b.first;
    });
    if (static_cast<int>(counts.size()) > cap_per_language)
      counts.resize(static_cast<std::size_t>(cap_per_language));
    std::sort(counts.begin(), counts.end());  // stable class order within a language
    int within = 0;
    for (const auto& [word, count] : counts) {
      vocab.class_of_key[WordKey(languages[l], word)] = next_class;
      vocab.class_language.push_back(static_cast<int>(l));
      vocab.class_within_language.push_back(within++);
      ++next_class;
    }
    vocab.language_class_count.push_back(within);
  }
  return vocab;
}

ModelParams ModelParams::Init(const ModelConfig& config, int input_dim, int n_classes,
                              int n_languages, std::uint64_t seed,
                              const std::vector<int>* language_class_count) {
  config.Validate();
  if (input_dim < 1) throw std::invalid_argument("input_dim >= 1 required");

  ModelParams m;
  m.config = config;
  m.input_dim = input_dim;
  m.n_classes = n_classes;
  m.n_languages = n_languages;

  Rng rng(DeriveSeed(seed, "init"));
  for (int k = 0; k < config.encoder_layers; ++k) {
    int in = (k == 0) ? input_dim : config.encoder_units;
    m.encoder.push_back(GruLayerParams::Init(in, config.encoder_units, rng));
  }
  m.proj = LinearParams::Init(config.encoder_units, config.embedding_dim, rng);

  if (config.UsesDecoder()) {
    int cond = config.embedding_dim +
               (config.kind == ModelKind::kCaeLc ? config.lang_embedding_dim : 0);
    for (int k = 0; k < config.decoder_layers; ++k) {
      int in = (k == 0) ? cond : config.decoder_units;
      m.decoder.push_back(GruLayerParams::Init(in, config.decoder_units, rng));
    }
    m.out = LinearParams::Init(config.decoder_units, input_dim, rng);
  }

  if (config.kind == ModelKind::kClassifier) {
    if (n_classes < 1) throw std::invalid_argument("classifier requires n_classes >= 1");
    m.softmax = LinearParams::Init(config.embedding_dim, n_classes, rng);
  }

  if (config.kind == ModelKind::kClassifierBranched) {
    std::vector<int> counts;
    if (language_class_count) {
      counts = *language_class_count;
    } else if (n_languages == 1) {
      counts = {n_classes};
    } else {
      throw std::invalid_argument("branched classifier needs per-language class counts");
    }
    m.language_class_count = counts;
    for (int kl : counts) {
      m.branch_fc.push_back(LinearParams::Init(config.embedding_dim, config.embedding_dim, rng));
      m.branch_softmax.push_back(LinearParams::Init(config.embedding_dim, kl, rng));
    }
  }

  if (config.kind == ModelKind::kCaeLc) {
    if (n_languages < 1) throw std::invalid_argument("cae_lc requires n_languages >= 1");
    m.lang_embedding = Mat(n_languages, config.lang_embedding_dim);
    double limit = std::sqrt(6.0 / (n_languages + config.lang_embedding_dim));
    for (int i = 0; i < n_languages; ++i)
      for (int j = 0; j < config.lang_embedding_dim; ++j)
        m.lang_embedding(i, j) = rng.Uniform(-limit, limit);
  }
  return m;
}

ModelParams ModelParams::GradsLike() const {
  ModelParams g;
  g.config = config;
  g.input_dim = input_dim;
  g.n_classes = n_classes;
  g.n_languages = n_languages;
  for (const auto& layer : encoder)
    g.encoder.push_back(GruLayerParams::Zeros(layer.input_size(), layer.hidden_size()));
  g.proj = LinearParams::Zeros(proj.input_size(), proj.output_size());
  for (const auto& layer : decoder)
    g.decoder.push_back(GruLayerParams::Zeros(layer.input_size(), layer.hidden_size()));
  if (out.W.size() > 0) g.out = LinearParams::Zeros(out.input_size(), out.output_size());
  if (softmax.W.size() > 0)
    g.softmax = LinearParams::Zeros(softmax.input_size(), softmax.output_size());
  for (const auto& fc : branch_fc)
    g.branch_fc.push_back(LinearParams::Zeros(fc.input_size(), fc.output_size()));
  for (const auto& sm : branch_softmax)
    g.branch_softmax.push_back(LinearParams::Zeros(sm.input_size(), sm.output_size()));
  if (lang_embedding.size() > 0)
    g.lang_embedding = Mat::Zero(lang_embedding.rows(), lang_embedding.cols());
  g.class_language = class_language;
  g.class_within_language = class_within_language;
  g.language_class_count = language_class_count;
  return g;
}

ParamList ModelParams::Params() {
  ParamList list;
  for (std::size_t k = 0; k < encoder.size(); ++k)
    list.Add(CollectParams("encoder" + std::to_string(k), encoder[k]));
  list.Add(CollectParams("proj", proj));
  for (std::size_t k = 0; k < decoder.size(); ++k)
    list.Add(CollectParams("decoder" + std::to_string(k), decoder[k]));
  if (out.W.size() > 0) list.Add(CollectParams("out", out));
  if (softmax.W.size() > 0) list.Add(CollectParams("softmax", softmax));
  for (std::size_t l = 0; l < branch_fc.size(); ++l) {
    list.Add(CollectParams("branch_fc" + std::to_string(l), branch_fc[l]));
    list.Add(CollectParams("branch_softmax" + std::to_string(l), branch_softmax[l]));
  }
  if (lang_embedding.size() > 0) list.Add("lang_embedding", lang_embedding);
  return list;
}

// --- losses -------------------------------------------------------------

double ClassifierLoss(ModelParams& model, const std::vector<const Segment*>& batch,
                      const std::vector<int>& classes, ModelParams* grads) {
  if (batch.size() != classes.size() || batch.empty())
    throw std::invalid_argument("classifier_loss: batch/class mismatch");
  const bool branched = model.config.kind == ModelKind::kClassifierBranched;
  const double inv_batch = 1.0 / static_cast<double>(batch.size());

  double total = 0.0;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const int cls = classes[i];
    if (cls < 0 || cls >= model.n_classes)
      throw std::invalid_argument("classifier_loss: unknown class " + std::to_string(cls));

    EncoderCache cache;
    Vec z = EncoderEmbed(model.encoder, model.proj, batch[i]->frames, grads ? &cache : nullptr);

    Vec logits, bvec;
    int lang = 0, within = cls;
    if (branched) {
      lang = model.class_language.at(static_cast<std::size_t>(cls));
      within = model.class_within_language.at(static_cast<std::size_t>(cls));
      const LinearParams& fc = model.branch_fc[static_cast<std::size_t>(lang)];
      const LinearParams& sm = model.branch_softmax[static_cast<std::size_t>(lang)];
      bvec = (fc.W * z + fc.b).array().tanh();
      logits = sm.W * bvec + sm.b;
    } else {
      logits = model.softmax.W * z + model.softmax.b;
    }

    double mx = logits.maxCoeff();
    Vec ex = (logits.array() - mx).exp();
    double denom = ex.sum();
    Vec prob = ex / denom;
    total += -(std::log(prob[within]) );

    if (grads) {
      Vec dlogits = prob;
      dlogits[within] -= 1.0;
      dlogits *= inv_batch;

      Vec dz;
      if (branched) {
        LinearParams& gfc = grads->branch_fc[static_cast<std::size_t>(lang)];
        LinearParams& gsm = grads->branch_softmax[static_cast<std::size_t>(lang)];
        gsm.W += dlogits * bvec.transpose();
        gsm.b += dlogits;
        Vec dbvec = model.branch_softmax[static_cast<std::size_t>(lang)].W.transpose() * dlogits;
        Vec da = dbvec.cwiseProduct((1.0 - bvec.array().square()).matrix());
        gfc.W += da * z.transpose();
        gfc.b += da;
        dz = model.branch_fc[static_cast<std::size_t>(lang)].W.transpose() * da;
      } else {
        grads->softmax.W += dlogits * z.transpose();
        grads->softmax.b += dlogits;
        dz = model.softmax.W.transpose() * dlogits;
      }
      EncoderBackward(model.encoder, model.proj, cache, dz, grads->encoder, grads->proj);
    }
  }
  return total * inv_batch;
}

double ContrastiveLoss(const Vec& za, const Vec& zp, const Vec& zn, double margin,
                       Vec* dza, Vec* dzp, Vec* dzn) {
  if (za.size() != zp.size() || za.size() != zn.size())
    throw std::invalid_argument("contrastive_loss: dimension mismatch");
  double d_ap = (za - zp).squaredNorm();
  double d_an = (za - zn).squaredNorm();
  double j = margin + d_ap - d_an;
  if (j <= 0.0) return 0.0;
  if (dza) *dza += 2.0 * (zn - zp);
  if (dzp) *dzp += -2.0 * (za - zp);
  if (dzn) *dzn += 2.0 * (za - zn);
  return j;
}

std::vector<Triplet> MineSemiHard(const Mat& embeddings, const std::vector<int>& labels) {
  const int n = static_cast<int>(embeddings.rows());
  if (static_cast<int>(labels.size()) != n)
    throw std::invalid_argument("mine_semi_hard: label count mismatch");

  std::vector<Triplet> out;
  for (int a = 0; a < n; ++a) {
    for (int p = 0; p < n; ++p) {
      if (p == a || labels[static_cast<std::size_t>(p)] != labels[static_cast<std::size_t>(a)])
        continue;
      double d_ap = (embeddings.row(a) - embeddings.row(p)).squaredNorm();
      int best_semi = -1, best_far = -1;
      double semi_d = std::numeric_limits<double>::infinity();
      double far_d = -std::numeric_limits<double>::infinity();
      for (int neg = 0; neg < n; ++neg) {
        if (labels[static_cast<std::size_t>(neg)] == labels[static_cast<std::size_t>(a)]) continue;
        double d_an = (embeddings.row(a) - embeddings.row(neg)).squaredNorm();
        if (d_an > d_ap && d_an < semi_d) {
          semi_d = d_an;
          best_semi = neg;
        }
        if (d_an > far_d) {
          far_d = d_an;
          best_far = neg;
        }
      }
      if (best_semi < 0 && best_far < 0)
        throw std::runtime_error("mine_semi_hard: batch has no negative item");
      out.push_back(Triplet{a, p, best_semi >= 0 ? best_semi : best_far});
    }
  }
  return out;
}

double CaeLoss(ModelParams& model, const Mat& input, const Mat& target, int language,
               ModelParams* grads) {
  if (!model.config.UsesDecoder())
    throw std::invalid_argument("cae_loss: model has no decoder");
  if (input.cols() != target.cols() || static_cast<int>(input.cols()) != model.input_dim)
    throw std::invalid_argument("cae_loss: frame dimension mismatch");
  const bool conditioned = model.config.kind == ModelKind::kCaeLc && language >= 0;
  if (model.config.kind == ModelKind::kCaeLc && language < 0)
    throw std::invalid_argument("cae_loss: cae_lc requires a language id");

  EncoderCache enc_cache;
  Vec z = EncoderEmbed(model.encoder, model.proj, input, grads ? &enc_cache : nullptr);

  Vec cond;
  if (conditioned) {
    cond.resize(z.size() + model.lang_embedding.cols());
    cond << z, model.lang_embedding.row(language).transpose();
  } else {
    cond = z;
  }

  DecoderCache dec_cache;
  Mat f = DecoderForward(model.decoder, model.out, cond, static_cast<int>(target.rows()),
                         grads ? &dec_cache : nullptr);
  Mat diff = f - target;
  double loss = diff.squaredNorm();

  if (grads) {
    Mat dF = 2.0 * diff;
    Vec dcond;
    DecoderBackward(model.decoder, model.out, dec_cache, dF, grads->decoder, grads->out, &dcond);
    Vec dz = dcond.head(z.size());
    if (conditioned)
      grads->lang_embedding.row(language) += dcond.tail(model.lang_embedding.cols()).transpose();
    EncoderBackward(model.encoder, model.proj, enc_cache, dz, grads->encoder, grads->proj);
  }
  return loss;
}

double AeLoss(ModelParams& model, const Segment& x, ModelParams* grads) {
  return CaeLoss(model, x.frames, x.frames, -1, grads);
}

double SiameseBatchLoss(ModelParams& model, const std::vector<const Segment*>& batch,
                        const std::vector<int>& labels, ModelParams* grads) {
  const int n = static_cast<int>(batch.size());
  if (n < 2) throw std::invalid_argument("siamese batch too small");

  std::vector<EncoderCache> caches(static_cast<std::size_t>(n));
  Mat z(n, model.config.embedding_dim);
  for (int i = 0; i < n; ++i) {
    z.row(i) = EncoderEmbed(model.encoder, model.proj, batch[static_cast<std::size_t>(i)]->frames,
                            grads ? &caches[static_cast<std::size_t>(i)] : nullptr)
                   .transpose();
  }

  std::vector<Triplet> triplets = MineSemiHard(z, labels);
  if (triplets.empty()) return 0.0;
  const double inv = 1.0 / static_cast<double>(triplets.size());

  Mat dZ = Mat::Zero(n, model.config.embedding_dim);
  double total = 0.0;
  for (const Triplet& t : triplets) {
    Vec za = z.row(t.anchor).transpose();
    Vec zp = z.row(t.positive).transpose();
    Vec zn = z.row(t.negative).transpose();
    Vec dza = Vec::Zero(za.size()), dzp = Vec::Zero(za.size()), dzn = Vec::Zero(za.size());
    total += ContrastiveLoss(za, zp, zn, model.config.margin, grads ? &dza : nullptr,
                             grads ? &dzp : nullptr, grads ? &dzn : nullptr);
    if (grads) {
      dZ.row(t.anchor) += inv * dza.transpose();
      dZ.row(t.positive) += inv * dzp.transpose();
      dZ.row(t.negative) += inv * dzn.transpose();
    }
  }
  if (grads) {
    for (int i = 0; i < n; ++i) {
      if (dZ.row(i).squaredNorm() == 0.0) continue;
      EncoderBackward(model.encoder, model.proj, caches[static_cast<std::size_t>(i)],
                      dZ.row(i).transpose(), grads->encoder, grads->proj);
    }
  }
  return total * inv;
}

// --- training sets ------------------------------------------------------

TrainingSet BuildSupervisedSet(const Corpus& corpus, const std::vector<std::string>& languages,
                               const Vocabulary& vocab, ModelKind kind, int n_pairs,
                               std::uint64_t seed) {
  std::vector<int> ids;
  for (const std::string& lang : languages) {
    auto it = corpus.by_language().find(lang);
    if (it == corpus.by_language().end())
      throw std::invalid_argument("training language not in corpus: " + lang);
    ids.insert(ids.end(), it->second.begin(), it->second.end());
  }
  std::sort(ids.begin(), ids.end());
  Corpus sub = corpus.Subset(ids);

  std::map<std::string, int> lang_index;
  for (std::size_t l = 0; l < languages.size(); ++l) lang_index[languages[l]] = static_cast<int>(l);

  TrainingSet set;
  set.input_dim = sub.dim();
  set.n_classes = vocab.size();
  set.n_languages = static_cast<int>(languages.size());
  set.class_language = vocab.class_language;
  set.class_within_language = vocab.class_within_language;
  set.language_class_count = vocab.language_class_count;

  for (int id = 0; id < sub.size(); ++id) {
    const Segment& seg = sub.segment(id);
    TrainItem item;
    item.segment = seg;
    item.language_index = lang_index.at(seg.meta.language);
    auto it = vocab.class_of_key.find(WordKey(seg.meta.language, seg.meta.word));
    item.class_index = (it == vocab.class_of_key.end()) ? -1 : it->second;
    if (item.class_index < 0 &&
        (kind == ModelKind::kClassifier || kind == ModelKind::kClassifierBranched ||
         kind == ModelKind::kSiamese))
      continue;  // word type beyond the per-language cap
    set.items.push_back(std::move(item));
  }

  if (kind == ModelKind::kCae || kind == ModelKind::kCaeLc) {
    PairList pl;
    if (n_pairs > 0) {
      pl = SampleWordPairs(sub, n_pairs, seed);
    } else {
      // All same-type pairs once.
      for (const auto& [key, wids] : sub.by_word())
        for (std::size_t a = 0; a < wids.size(); ++a)
          for (std::size_t b = a + 1; b < wids.size(); ++b)
            pl.pairs.emplace_back(wids[a], wids[b]);
      std::sort(pl.pairs.begin(), pl.pairs.end());
    }
    for (const auto& [i, j] : pl.pairs) {
      TrainPair pair;
      pair.a = sub.segment(i);
      pair.b = sub.segment(j);
      pair.language_index = lang_index.at(pair.a.meta.language);
      set.pairs.push_back(std::move(pair));
    }
  }
  return set;
}

TrainingSet BuildUtdSet(const Corpus& corpus, const DiscoveredClusters& clusters, ModelKind kind,
                        int n_pairs, std::uint64_t seed) {
  TrainingSet set;
  set.input_dim = corpus.dim();
  set.n_languages = 1;
  set.n_classes = static_cast<int>(clusters.clusters.size());
  set.language_class_count = {set.n_classes};

  std::vector<std::pair<int, int>> within;  // item-index pairs
  int cls = 0;
  for (const auto& [label, spans] : clusters.clusters) {
    std::vector<int> members;
    for (const SegmentSpan& span : spans) {
      TrainItem item;
      item.segment = MaterializeSpan(corpus, span, label);
      item.class_index = cls;
      item.language_index = 0;
      members.push_back(static_cast<int>(set.items.size()));
      set.items.push_back(std::move(item));
    }
    for (std::size_t a = 0; a < members.size(); ++a)
      for (std::size_t b = a + 1; b < members.size(); ++b)
        within.emplace_back(members[a], members[b]);
    ++cls;
  }
  set.class_language.assign(static_cast<std::size_t>(set.n_classes), 0);
  set.class_within_language.resize(static_cast<std::size_t>(set.n_classes));
  std::iota(set.class_within_language.begin(), set.class_within_language.end(), 0);

  if (kind == ModelKind::kCae || kind == ModelKind::kCaeLc || kind == ModelKind::kAe) {
    std::vector<std::pair<int, int>> chosen;
    if (n_pairs > 0 && !within.empty()) {
      Rng rng(DeriveSeed(seed, "utd-pairs"));
      for (int k = 0; k < n_pairs; ++k) chosen.push_back(within[rng.Index(within.size())]);
    } else {
      chosen = within;
    }
    for (const auto& [a, b] : chosen) {
      TrainPair pair;
      pair.a = set.items[static_cast<std::size_t>(a)].segment;
      pair.b = set.items[static_cast<std::size_t>(b)].segment;
      pair.language_index = 0;
      set.pairs.push_back(std::move(pair));
    }
  }
  return set;
}

// --- training loop ------------------------------------------------------

namespace {

std::vector<std::size_t> ShuffledIndices(std::size_t n, Rng& rng) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  for (std::size_t i = n; i > 1; --i) std::swap(idx[i - 1], idx[rng.Index(i)]);
  return idx;
}

}  // namespace

TrainResult Train(const ModelConfig& config, const TrainConfig& train, const TrainingSet& data) {
  config.Validate();
  train.Validate();
  if (data.input_dim < 1) throw std::invalid_argument("train: empty training set");

  const ModelKind kind = config.kind;
  const bool needs_items = kind == ModelKind::kAe || kind == ModelKind::kClassifier ||
                           kind == ModelKind::kClassifierBranched || kind == ModelKind::kSiamese;
  if (needs_items && data.items.empty())
    throw std::invalid_argument("train: model kind requires segments");
  if ((kind == ModelKind::kCae || kind == ModelKind::kCaeLc) && data.pairs.empty())
    throw std::invalid_argument("train: CAE kinds require pairs");

  TrainResult result;
  result.params = ModelParams::Init(config, data.input_dim, data.n_classes, data.n_languages,
                                    train.seed, &data.language_class_count);
  result.params.class_language = data.class_language;
  result.params.class_within_language = data.class_within_language;
  if (!data.language_class_count.empty())
    result.params.language_class_count = data.language_class_count;
  ModelParams& model = result.params;

  ModelParams grads = model.GradsLike();
  Adam adam(AdamConfig{train.learning_rate, 0.9, 0.999, 1e-8});
  ParamList params = model.Params();
  ParamList grad_refs = grads.Params();
  Rng rng(DeriveSeed(train.seed, "train"));

  auto zero_grads = [&]() {
    for (const ParamRef& r : grad_refs.refs())
      std::memset(r.data, 0, sizeof(double) * static_cast<std::size_t>(r.size));
  };

  auto run_classifier_epoch = [&]() {
    double total = 0.0;
    std::vector<std::size_t> order = ShuffledIndices(data.items.size(), rng);
    for (std::size_t pos = 0; pos < order.size(); pos += static_cast<std::size_t>(train.batch_size)) {
      std::size_t end = std::min(order.size(), pos + static_cast<std::size_t>(train.batch_size));
      std::vector<const Segment*> batch;
      std::vector<int> classes;
      for (std::size_t k = pos; k < end; ++k) {
        batch.push_back(&data.items[order[k]].segment);
        classes.push_back(data.items[order[k]].class_index);
      }
      zero_grads();
      double loss = ClassifierLoss(model, batch, classes, &grads);
      adam.Step(params.refs(), grad_refs.refs());
      total += loss * static_cast<double>(batch.size());
    }
    return total / static_cast<double>(data.items.size());
  };

  auto run_ae_epoch = [&](const std::vector<const Segment*>& segments) {
    double total = 0.0;
    std::vector<std::size_t> order = ShuffledIndices(segments.size(), rng);
    for (std::size_t pos = 0; pos < order.size(); pos += static_cast<std::size_t>(train.batch_size)) {
      std::size_t end = std::min(order.size(), pos + static_cast<std::size_t>(train.batch_size));
      zero_grads();
      double batch_loss = 0.0;
      for (std::size_t k = pos; k < end; ++k)
        batch_loss += AeLoss(model, *segments[order[k]], &grads);
      double inv = 1.0 / static_cast<double>(end - pos);
      ScaleAll(grad_refs, inv);
      adam.Step(params.refs(), grad_refs.refs());
      total += batch_loss;
    }
    return total / static_cast<double>(segments.size());
  };

  // Every pair is presented in both input-output directions.
  struct DirectedPair {
    const Mat* input;
    const Mat* target;
    int language;
  };
  std::vector<DirectedPair> directed;
  if (kind == ModelKind::kCae || kind == ModelKind::kCaeLc) {
    directed.reserve(data.pairs.size() * 2);
    for (const TrainPair& p : data.pairs) {
      directed.push_back(DirectedPair{&p.a.frames, &p.b.frames, p.language_index});
      directed.push_back(DirectedPair{&p.b.frames, &p.a.frames, p.language_index});
    }
  }

  auto run_cae_epoch = [&](const std::vector<DirectedPair>& set) {
    double total = 0.0;
    std::vector<std::size_t> order = ShuffledIndices(set.size(), rng);
    for (std::size_t pos = 0; pos < order.size();
         pos += static_cast<std::size_t>(train.pair_batch_size)) {
      std::size_t end = std::min(order.size(), pos + static_cast<std::size_t>(train.pair_batch_size));
      zero_grads();
      double batch_loss = 0.0;
      for (std::size_t k = pos; k < end; ++k) {
        const DirectedPair& dp = set[order[k]];
        batch_loss += CaeLoss(model, *dp.input, *dp.target,
                              kind == ModelKind::kCaeLc ? dp.language : -1, &grads);
      }
      double inv = 1.0 / static_cast<double>(end - pos);
      ScaleAll(grad_refs, inv);
      adam.Step(params.refs(), grad_refs.refs());
      total += batch_loss;
    }
    return total / static_cast<double>(set.size());
  };

  auto run_siamese_epoch = [&]() {
    // Classes with at least two in-batch instances are required for mining;
    // batches are built as P classes x K instances.
    std::map<int, std::vector<std::size_t>> by_class;
    for (std::size_t i = 0; i < data.items.size(); ++i)
      by_class[data.items[i].class_index].push_back(i);
    std::vector<int> eligible;
    for (const auto& [c, members] : by_class)
      if (members.size() >= 2) eligible.push_back(c);
    if (eligible.size() < 2)
      throw std::runtime_error("train: siamese needs >= 2 classes with >= 2 instances");

    const std::size_t batch_capacity =
        static_cast<std::size_t>(train.siamese_p) * static_cast<std::size_t>(train.siamese_k);
    std::size_t steps = std::max<std::size_t>(1, data.items.size() / batch_capacity);
    double total = 0.0;
    for (std::size_t s = 0; s < steps; ++s) {
      std::vector<std::size_t> class_order = ShuffledIndices(eligible.size(), rng);
      std::size_t p_take = std::min<std::size_t>(static_cast<std::size_t>(train.siamese_p),
                                                 eligible.size());
      std::vector<const Segment*> batch;
      std::vector<int> labels;
      for (std::size_t c = 0; c < p_take; ++c) {
        const std::vector<std::size_t>& members = by_class[eligible[class_order[c]]];
        std::vector<std::size_t> pick;
        if (members.size() >= static_cast<std::size_t>(train.siamese_k)) {
          std::vector<std::size_t> morder = ShuffledIndices(members.size(), rng);
          for (int k = 0; k < train.siamese_k; ++k) pick.push_back(members[morder[static_cast<std::size_t>(k)]]);
        } else {
          for (int k = 0; k < train.siamese_k; ++k) pick.push_back(members[rng.Index(members.size())]);
        }
        for (std::size_t idx : pick) {
          batch.push_back(&data.items[idx].segment);
          labels.push_back(data.items[idx].class_index);
        }
      }
      zero_grads();
      double loss = SiameseBatchLoss(model, batch, labels, &grads);
      adam.Step(params.refs(), grad_refs.refs());
      total += loss;
    }
    return total / static_cast<double>(steps);
  };

  int epoch_index = 0;
  auto log_epoch = [&](double loss, std::chrono::steady_clock::time_point t0) {
    auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                  std::chrono::steady_clock::now() - t0)
                  .count();
    if (!std::isfinite(loss)) throw std::runtime_error("train: non-finite epoch loss");
    result.log.push_back(TrainLogEntry{epoch_index++, loss, static_cast<long>(ms)});
  };

  if ((kind == ModelKind::kCae || kind == ModelKind::kCaeLc) && train.ae_pretrain_epochs > 0) {
    // Autoencoder warm-up: each pair side reconstructs itself; the
    // conditioned kind keeps its language input.
    std::vector<DirectedPair> self;
    self.reserve(data.pairs.size() * 2);
    for (const TrainPair& p : data.pairs) {
      self.push_back(DirectedPair{&p.a.frames, &p.a.frames, p.language_index});
      self.push_back(DirectedPair{&p.b.frames, &p.b.frames, p.language_index});
    }
    for (int e = 0; e < train.ae_pretrain_epochs; ++e) {
      auto t0 = std::chrono::steady_clock::now();
      log_epoch(run_cae_epoch(self), t0);
    }
  }

  for (int e = 0; e < train.epochs; ++e) {
    auto t0 = std::chrono::steady_clock::now();
    double loss = 0.0;
    switch (kind) {
      case ModelKind::kClassifier:
      case ModelKind::kClassifierBranched:
        loss = run_classifier_epoch();
        break;
      case ModelKind::kSiamese:
        loss = run_siamese_epoch();
        break;
      case ModelKind::kAe: {
        std::vector<const Segment*> segments;
        for (const TrainItem& item : data.items) segments.push_back(&item.segment);
        loss = run_ae_epoch(segments);
        break;
      }
      case ModelKind::kCae:
      case ModelKind::kCaeLc:
        loss = run_cae_epoch(directed);
        break;
    }
    log_epoch(loss, t0);
  }
  return result;
}

Vec Embed(const ModelParams& model, const Segment& segment) {
  return EncoderEmbed(model.encoder, model.proj, segment.frames);
}

Mat EmbedCorpus(const ModelParams& model, const Corpus& corpus, int n_threads) {
  Mat out(corpus.size(), model.config.embedding_dim);
  auto work = [&](int begin, int end) {
    for (int id = begin; id < end; ++id)
      out.row(id) = Embed(model, corpus.segment(id)).transpose();
  };
  if (n_threads <= 1 || corpus.size() < 2 * n_threads) {
    work(0, corpus.size());
  } else {
    std::vector<std::thread> pool;
    int chunk = (corpus.size() + n_threads - 1) / n_threads;
    for (int t = 0; t < n_threads; ++t) {
      int begin = t * chunk;
      int end = std::min(corpus.size(), begin + chunk);
      if (begin < end) pool.emplace_back(work, begin, end);
    }
    for (auto& th : pool) th.join();
  }
  return out;
}

void WriteTrainLog(const std::vector<TrainLogEntry>& log, const std::string& path,
                   bool zero_wall_ms) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  out << "epoch\tloss\twall_ms\n";
  char buf[64];
  for (const TrainLogEntry& e : log) {
    std::snprintf(buf, sizeof(buf), "%.17g", e.loss);
    out << e.epoch << '\t' << buf << '\t' << (zero_wall_ms ? 0L : e.wall_ms) << '\n';
  }
}

// --- checkpoints ----------------------------------------------------------

void SaveCheckpoint(const ModelParams& model, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path);
  out.write("AWEM", 4);
  WriteBin<std::uint32_t>(out, 1);  // version
  const ModelConfig& c = model.config;
  WriteBin<std::uint32_t>(out, static_cast<std::uint32_t>(c.kind));
  WriteBin<std::int32_t>(out, c.encoder_layers);
  WriteBin<std::int32_t>(out, c.encoder_units);
  WriteBin<std::int32_t>(out, c.decoder_layers);
  WriteBin<std::int32_t>(out, c.decoder_units);
  WriteBin<std::int32_t>(out, c.embedding_dim);
  WriteBin<std::int32_t>(out, c.lang_embedding_dim);
  WriteBin<std::int32_t>(out, c.vocab_cap_per_language);
  WriteBin<double>(out, c.margin);
  WriteBin<std::int32_t>(out, model.input_dim);
  WriteBin<std::int32_t>(out, model.n_classes);
  WriteBin<std::int32_t>(out, model.n_languages);
  WriteIntVec(out, model.class_language);
  WriteIntVec(out, model.class_within_language);
  WriteIntVec(out, model.language_class_count);

  ParamList list = const_cast<ModelParams&>(model).Params();
  WriteBin<std::uint32_t>(out, static_cast<std::uint32_t>(list.refs().size()));
  for (const ParamRef& r : list.refs()) {
    WriteBin<std::uint32_t>(out, static_cast<std::uint32_t>(r.name.size()));
    out.write(r.name.data(), static_cast<std::streamsize>(r.name.size()));
    WriteBin<std::uint64_t>(out, static_cast<std::uint64_t>(r.size));
    out.write(reinterpret_cast<const char*>(r.data),
              static_cast<std::streamsize>(sizeof(double) * static_cast<std::size_t>(r.size)));
  }
}

ModelParams LoadCheckpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, "AWEM", 4) != 0)
    throw std::runtime_error("bad checkpoint magic (expected AWEM)");
  auto version = ReadBin<std::uint32_t>(in);
  if (version != 1) throw std::runtime_error("unsupported checkpoint version");

  ModelConfig c;
  c.kind = static_cast<ModelKind>(ReadBin<std::uint32_t>(in));
  c.encoder_layers = ReadBin<std::int32_t>(in);
  c.encoder_units = ReadBin<std::int32_t>(in);
  c.decoder_layers = ReadBin<std::int32_t>(in);
  c.decoder_units = ReadBin<std::int32_t>(in);
  c.embedding_dim = ReadBin<std::int32_t>(in);
  c.lang_embedding_dim = ReadBin<std::int32_t>(in);
  c.vocab_cap_per_language = ReadBin<std::int32_t>(in);
  c.margin = ReadBin<double>(in);
  int input_dim = ReadBin<std::int32_t>(in);
  int n_classes = ReadBin<std::int32_t>(in);
  int n_languages = ReadBin<std::int32_t>(in);
  std::vector<int> class_language = ReadIntVec(in);
  std::vector<int> class_within_language = ReadIntVec(in);
  std::vector<int> language_class_count = ReadIntVec(in);

  ModelParams model =
      ModelParams::Init(c, input_dim, n_classes, n_languages, 0, &language_class_count);
  model.class_language = std::move(class_language);
  model.class_within_language = std::move(class_within_language);
  model.language_class_count = std::move(language_class_count);

  ParamList list = model.Params();
  auto n_blocks = ReadBin<std::uint32_t>(in);
  if (n_blocks != list.refs().size())
    throw std::runtime_error("checkpoint block count mismatch");
  for (const ParamRef& r : list.refs()) {
    auto name_len = ReadBin<std::uint32_t>(in);
    std::string name(name_len, '\0');
    in.read(name.data(), name_len);
    auto count = ReadBin<std::uint64_t>(in);
    if (name != r.name || count != static_cast<std::uint64_t>(r.size))
      throw std::runtime_error("checkpoint block mismatch at " + name);
    in.read(reinterpret_cast<char*>(r.data),
            static_cast<std::streamsize>(sizeof(double) * count));
    if (!in) throw std::runtime_error("checkpoint truncated in block " + name);
  }
  return model;
}

}  // namespace awe
