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

#ifndef AWE_PROBE_HPP_
#define AWE_PROBE_HPP_

#include <string>
#include <vector>

#include "awe/corpus.hpp"

namespace awe {

// Levenshtein distance over phone symbols.
int PhoneEditDistance(const std::vector<std::string>& a, const std::vector<std::string>& b);

struct EditDistanceBin {
  int edit_distance = 0;  // last bin aggregates >= max_bin
  double mean_cosine = 0.0;
  long pair_count = 0;
};

// All unordered pairs bucketed by phone edit distance; per-bucket mean of
// embedding cosine distances. Empty buckets are omitted.
std::vector<EditDistanceBin> CosineByEditDistance(const Corpus& corpus, const Mat& embeddings,
                                                  int max_bin);

// OLS with intercept (ridge 1e-8) on an 80/20 split; returns held-out R^2.
// Constant targets define R^2 = 0.
double FitDurationRegression(const Mat& embeddings, const std::vector<double>& durations_ms,
                             std::uint64_t split_seed);

struct ClassifierProbeResult {
  double accuracy = 0.0;
  std::vector<std::string> classes;
  std::vector<double> per_class_f1;
};

// Multinomial logistic regression on frozen embeddings: full-batch gradient
// descent, 500 iterations at rate 0.1 on the mean loss, no regularization,
// 80/20 split. Re-splits (next seed) up to 10 times if a class is missing
// from the train side.
ClassifierProbeResult FitLinearClassifier(const Mat& embeddings,
                                          const std::vector<std::string>& labels,
                                          std::uint64_t split_seed);

// Top-2 principal components of the mean-centered embeddings; sign fixed so
// each component's largest-magnitude loading is positive.
Mat Pca2d(const Mat& embeddings);

// Slices every consecutive phone trigram out of every segment (frame
// boundaries approximated by dividing the segment evenly across its phones)
// and keeps the trigrams attested in at least min_languages of the given
// languages. The slice's word is the trigram; slices shorter than 2 frames
// are dropped.
std::vector<Segment> SharedTriphoneSegments(const Corpus& corpus,
                                            const std::vector<std::string>& languages,
                                            int min_languages);

void WriteEditDistanceBins(const std::vector<EditDistanceBin>& bins, const std::string& path);
void WritePca2d(const Mat& coords, const std::string& path);
void WriteClassifierProbe(const ClassifierProbeResult& result, const std::string& path);

}  // namespace awe

#endif  // AWE_PROBE_HPP_
