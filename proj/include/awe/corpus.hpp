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

#ifndef AWE_CORPUS_HPP_
#define AWE_CORPUS_HPP_

#include <Eigen/Dense>
#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace awe {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

// Frame rate used to convert frame counts to milliseconds (10 ms hop).
inline constexpr double kFrameMs = 10.0;

struct SegmentMeta {
  std::string word;
  std::string speaker;
  std::string language;
  std::vector<std::string> phones;
  double duration_ms = 0.0;
};

// A variable-length sequence of feature frames (rows) plus metadata.
struct Segment {
  Mat frames;  // T x D
  SegmentMeta meta;

  int NumFrames() const { return static_cast<int>(frames.rows()); }
  int Dim() const { return static_cast<int>(frames.cols()); }
};

struct PairList {
  std::vector<std::pair<int, int>> pairs;  // segment ids, i != j
};

class Corpus {
 public:
  Corpus() = default;
  explicit Corpus(std::vector<Segment> segments);

  const std::vector<Segment>& segments() const { return segments_; }
  const Segment& segment(int id) const { return segments_[static_cast<std::size_t>(id)]; }
  int size() const { return static_cast<int>(segments_.size()); }
  int dim() const { return segments_.empty() ? 0 : segments_[0].Dim(); }

  const std::map<std::string, std::vector<int>>& by_word() const { return by_word_; }
  const std::map<std::string, std::vector<int>>& by_speaker() const { return by_speaker_; }
  const std::map<std::string, std::vector<int>>& by_language() const { return by_language_; }

  std::vector<std::string> Languages() const;
  std::vector<std::string> Speakers() const;

  // New corpus containing only the given segment ids (in the given order).
  Corpus Subset(const std::vector<int>& ids) const;
  Corpus FilterLanguage(const std::string& language) const;

 private:
  std::vector<Segment> segments_;
  std::map<std::string, std::vector<int>> by_word_;      // key: language '\t' word
  std::map<std::string, std::vector<int>> by_speaker_;
  std::map<std::string, std::vector<int>> by_language_;
};

// Word types are keyed per language; identical spellings in two languages
// are distinct types.
inline std::string WordKey(const std::string& language, const std::string& word) {
  return language + "\t" + word;
}

struct SyntheticSpec {
  int n_languages = 5;
  int shared_phone_pool = 16;
  int phones_per_language = 10;
  int vocab_size_per_language = 12;
  int word_length_min = 2;
  int word_length_max = 4;
  int speakers_per_language = 4;
  int instances_per_word = 5;
  int frames_per_phone_min = 4;
  int frames_per_phone_max = 8;
  int feature_dim = 13;
  double speaker_shift_scale = 0.5;
  double noise_scale = 0.1;
  double channel_scale = 0.0;
  std::uint64_t seed = 0;

  void Validate() const;  // throws std::invalid_argument
};

struct CorruptionConfig {
  double label_error_rate = 0.0;
  int boundary_jitter_frames = 0;
  int n_pairs = 0;  // 0 = keep all within-cluster pairs
  bool fix_boundaries = false;
  bool fix_labels = false;
  std::uint64_t seed = 0;
};

struct SegmentSpan {
  int segment_id = 0;
  int start = 0;  // inclusive frame index
  int end = 0;    // exclusive; end - start >= 2
};

struct DiscoveredClusters {
  std::vector<std::pair<std::string, std::vector<SegmentSpan>>> clusters;
};

enum class SplitBy { kSegment, kSpeaker };

// Deterministic synthetic multilingual corpus. Each language samples its
// phone inventory from a shared pool; each phone is a random target vector;
// word instances cross-fade between consecutive phone targets with
// per-instance duration jitter, a per-speaker affine distortion, an optional
// per-instance channel offset and additive noise.
Corpus GenerateCorpus(const SyntheticSpec& spec);

// UTD noise model over a single-language corpus: ground-truth word clusters
// with random label reassignment (rate label_error_rate) and uniform
// boundary jitter, each independently undoable via the fix_* flags.
DiscoveredClusters SimulateUtd(const Corpus& corpus, const CorruptionConfig& cfg);

// All unordered within-cluster pairs, ascending ids.
PairList PairsFromClusters(const DiscoveredClusters& clusters);

// n same-word (and same-language) pairs drawn uniformly with replacement
// from the pool of all same-type pairs.
PairList SampleWordPairs(const Corpus& corpus, int n, std::uint64_t seed);

std::vector<Corpus> SplitCorpus(const Corpus& corpus, const std::vector<double>& fractions,
                                SplitBy by, std::uint64_t seed);

// On-disk form: tab-separated metadata plus a little-endian binary feature
// file ("AWE1", u32 D, then per segment u32 T and T*D float32, in id order).
void SaveCorpus(const Corpus& corpus, const std::string& meta_path, const std::string& feat_path);
Corpus LoadCorpus(const std::string& meta_path, const std::string& feat_path);

void SaveClusters(const DiscoveredClusters& clusters, const std::string& path);
DiscoveredClusters LoadClusters(const std::string& path);

// Cuts the span's frame range out of the source segment, keeping metadata
// but replacing the word with the pseudo label.
Segment MaterializeSpan(const Corpus& corpus, const SegmentSpan& span,
                        const std::string& pseudo_label);

}  // namespace awe

#endif  // AWE_CORPUS_HPP_
