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

#ifndef AWE_MODELS_HPP_
#define AWE_MODELS_HPP_

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "awe/corpus.hpp"
#include "awe/nn.hpp"

namespace awe {

enum class ModelKind {
  kAe,
  kCae,
  kCaeLc,
  kClassifier,
  kClassifierBranched,
  kSiamese,
};

std::string ModelKindName(ModelKind kind);
ModelKind ModelKindFromName(const std::string& name);

struct ModelConfig {
  ModelKind kind = ModelKind::kCae;
  int encoder_layers = 3;
  int encoder_units = 400;
  int decoder_layers = 3;
  int decoder_units = 400;
  int embedding_dim = 130;  // M
  double margin = 0.25;
  int lang_embedding_dim = 200;  // E
  int vocab_cap_per_language = 10000;

  bool UsesDecoder() const {
    return kind == ModelKind::kAe || kind == ModelKind::kCae || kind == ModelKind::kCaeLc;
  }
  void Validate() const;
};

struct TrainConfig {
  double learning_rate = 0.001;
  int batch_size = 64;       // segments (classifier/AE)
  int pair_batch_size = 32;  // pairs (CAE)
  int epochs = 25;
  int ae_pretrain_epochs = 0;  // CAE kinds only
  int siamese_p = 8;           // word types per siamese batch
  int siamese_k = 4;           // instances per type
  std::uint64_t seed = 0;

  void Validate() const;
};

// (language, word) -> dense class index, with a per-language type cap
// (most frequent types kept, ties by word string).
struct Vocabulary {
  std::map<std::string, int> class_of_key;  // WordKey -> class
  std::vector<std::string> languages;       // training language order
  std::vector<int> class_language;          // class -> language index
  std::vector<int> class_within_language;   // class -> index inside its language
  std::vector<int> language_class_count;

  int size() const { return static_cast<int>(class_language.size()); }

  static Vocabulary Build(const Corpus& corpus, const std::vector<std::string>& languages,
                          int cap_per_language);
};

struct ModelParams {
  ModelConfig config;
  int input_dim = 0;
  int n_classes = 0;
  int n_languages = 0;

  std::vector<GruLayerParams> encoder;
  LinearParams proj;  // top hidden -> M (pure linear transform)
  std::vector<GruLayerParams> decoder;
  LinearParams out;      // decoder hidden -> D
  LinearParams softmax;  // M -> K (shared classifier head)
  std::vector<LinearParams> branch_fc;       // per-language M -> M, tanh
  std::vector<LinearParams> branch_softmax;  // per-language M -> K_l
  Mat lang_embedding;                        // n_languages x E

  // Class routing for the branched classifier.
  std::vector<int> class_language;
  std::vector<int> class_within_language;
  std::vector<int> language_class_count;

  static ModelParams Init(const ModelConfig& config, int input_dim, int n_classes,
                          int n_languages, std::uint64_t seed,
                          const std::vector<int>* language_class_count = nullptr);

  ModelParams GradsLike() const;  // zero tensors, same shapes
  ParamList Params();             // fixed enumeration order
};

void SaveCheckpoint(const ModelParams& model, const std::string& path);
ModelParams LoadCheckpoint(const std::string& path);

struct Triplet {
  int anchor;
  int positive;
  int negative;
};

// --- losses -------------------------------------------------------------

// Mean multiclass log loss over the batch. `classes` are global class
// indices; the branched kind routes each example through its language's
// fully connected branch and softmax.
double ClassifierLoss(ModelParams& model, const std::vector<const Segment*>& batch,
                      const std::vector<int>& classes, ModelParams* grads = nullptr);

// Hinge on squared Euclidean distances. Gradients are added to the outputs.
double ContrastiveLoss(const Vec& za, const Vec& zp, const Vec& zn, double margin,
                       Vec* dza = nullptr, Vec* dzp = nullptr, Vec* dzn = nullptr);

// Semi-hard mining over a batch: for every ordered positive pair, the
// closest negative farther than the positive, else the farthest negative.
// Ties break toward the lowest batch index.
std::vector<Triplet> MineSemiHard(const Mat& embeddings, const std::vector<int>& labels);

// Reconstruction losses: sum of squared frame errors for one example.
double AeLoss(ModelParams& model, const Segment& x, ModelParams* grads = nullptr);
double CaeLoss(ModelParams& model, const Mat& input, const Mat& target, int language,
               ModelParams* grads = nullptr);  // language < 0 disables conditioning

// Mean contrastive loss over mined triplets of one P*K batch.
double SiameseBatchLoss(ModelParams& model, const std::vector<const Segment*>& batch,
                        const std::vector<int>& labels, ModelParams* grads = nullptr);

// --- training -----------------------------------------------------------

struct TrainItem {
  Segment segment;
  int class_index = -1;
  int language_index = -1;
};

struct TrainPair {
  Segment a, b;
  int language_index = -1;
};

struct TrainingSet {
  std::vector<TrainItem> items;
  std::vector<TrainPair> pairs;
  int input_dim = 0;
  int n_classes = 0;
  int n_languages = 0;
  std::vector<int> class_language;
  std::vector<int> class_within_language;
  std::vector<int> language_class_count;
};

// Labelled multilingual data pooled over the given training languages.
TrainingSet BuildSupervisedSet(const Corpus& corpus, const std::vector<std::string>& languages,
                               const Vocabulary& vocab, ModelKind kind, int n_pairs,
                               std::uint64_t seed);

// Pseudo-labelled data from the UTD simulator; spans are sliced out of
// their source segments. n_pairs > 0 subsamples pairs with replacement.
TrainingSet BuildUtdSet(const Corpus& corpus, const DiscoveredClusters& clusters,
                        ModelKind kind, int n_pairs, std::uint64_t seed);

struct TrainLogEntry {
  int epoch = 0;
  double loss = 0.0;
  long wall_ms = 0;
};

struct TrainResult {
  ModelParams params;
  std::vector<TrainLogEntry> log;
};

TrainResult Train(const ModelConfig& config, const TrainConfig& train, const TrainingSet& data);

Vec Embed(const ModelParams& model, const Segment& segment);

// One embedding per corpus segment (rows in id order). n_threads <= 1 runs
// sequentially; results are identical either way.
Mat EmbedCorpus(const ModelParams& model, const Corpus& corpus, int n_threads = 1);

void WriteTrainLog(const std::vector<TrainLogEntry>& log, const std::string& path,
                   bool zero_wall_ms = false);

}  // namespace awe

#endif  // AWE_MODELS_HPP_
