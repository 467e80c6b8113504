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

#ifndef AWE_EVAL_HPP_
#define AWE_EVAL_HPP_

#include <string>
#include <vector>

#include "awe/corpus.hpp"

namespace awe {

enum class SameDiffMode {
  kAll,           // positives: same word type
  kCrossSpeaker,  // positives: same word, different speaker; same-speaker
                  // repeats stay in the ranking as negatives
  kCrossSpeakerExcludeSameSpeaker,  // same-speaker repeats removed entirely
};

std::string SameDiffModeName(SameDiffMode mode);
SameDiffMode SameDiffModeFromName(const std::string& name);

struct SameDiffResult {
  double ap = 0.0;
  std::vector<std::pair<double, double>> pr_curve;  // (recall, precision)
  long n_positive_pairs = 0;
  long n_total_pairs = 0;
  SameDiffMode mode = SameDiffMode::kCrossSpeaker;
};

// 1 - cos(u, v); similarity of an all-zero vector is defined as 0.
double CosineDistance(const Vec& u, const Vec& v);

// Metadata per embedding row, for pair labelling.
struct PairMeta {
  std::string word;     // word key (language + word)
  std::string speaker;
};

// Ranks all unordered pairs by ascending cosine distance (ties by pair
// enumeration index) and reports rank-based average precision: the mean of
// precision-at-rank over the positives.
SameDiffResult SameDiffAp(const Mat& embeddings, const std::vector<PairMeta>& meta,
                          SameDiffMode mode);

// Convenience overload taking metadata from the corpus (rows in id order).
SameDiffResult SameDiffAp(const Mat& embeddings, const Corpus& corpus, SameDiffMode mode);

// Same ranking over precomputed distances (used by the DTW baseline).
// `distances` holds one value per unordered pair (i < j), enumerated as
// (0,1), (0,2), ..., (1,2), ...
SameDiffResult SameDiffApFromDistances(const std::vector<double>& distances,
                                       const std::vector<PairMeta>& meta, SameDiffMode mode);

// Pairwise DTW costs in the unordered-pair enumeration above; parallel over
// pairs when n_threads > 1 with a deterministic result either way.
std::vector<double> PairwiseDtwCosts(const Corpus& corpus, bool normalize, int n_threads = 1);

void WriteSameDiffResult(const SameDiffResult& result, const std::string& metrics_path,
                         const std::string& pr_curve_path = "");

}  // namespace awe

#endif  // AWE_EVAL_HPP_
