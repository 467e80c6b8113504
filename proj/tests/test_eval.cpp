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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <algorithm>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <vector>

#include "awe/eval.hpp"
#include "awe/rng.hpp"
#include "doctest.h"

using namespace awe;

namespace {

Mat RandomMat(int rows, int cols, Rng& rng) {
  Mat m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) m(i, j) = rng.Normal();
  return m;
}

// Definitional oracle: enumerate pairs, label, rank, average precision at
// the positives. Independent of the implementation under test.
double OracleAp(const Mat& z, const std::vector<PairMeta>& meta, SameDiffMode mode) {
  struct Entry {
    double d;
    std::size_t index;
    bool positive;
  };
  std::vector<Entry> entries;
  std::size_t index = 0;
  for (std::size_t i = 0; i < meta.size(); ++i) {
    for (std::size_t j = i + 1; j < meta.size(); ++j, ++index) {
      bool sw = meta[i].word == meta[j].word;
      bool ss = meta[i].speaker == meta[j].speaker;
      if (mode == SameDiffMode::kCrossSpeakerExcludeSameSpeaker && sw && ss) continue;
      bool pos = mode == SameDiffMode::kAll ? sw : (sw && !ss);
      entries.push_back(Entry{CosineDistance(z.row(static_cast<Eigen::Index>(i)).transpose(),
                                             z.row(static_cast<Eigen::Index>(j)).transpose()),
                              index, pos});
    }
  }
  std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
    if (a.d != b.d) return a.d < b.d;
    return a.index < b.index;
  });
  double sum = 0.0;
  long npos = 0, seen = 0;
  for (std::size_t r = 0; r < entries.size(); ++r) {
    if (!entries[r].positive) continue;
    ++seen;
    sum += static_cast<double>(seen) / static_cast<double>(r + 1);
  }
  for (const Entry& e : entries) npos += e.positive ? 1 : 0;
  return sum / static_cast<double>(npos);
}

std::vector<PairMeta> RandomMeta(int n, Rng& rng, int n_words, int n_speakers) {
  std::vector<PairMeta> meta;
  for (int i = 0; i < n; ++i)
    meta.push_back(PairMeta{"w" + std::to_string(rng.Index(static_cast<std::size_t>(n_words))),
                            "s" + std::to_string(rng.Index(static_cast<std::size_t>(n_speakers)))});
  return meta;
}

bool HasPositive(const std::vector<PairMeta>& meta, SameDiffMode mode) {
  for (std::size_t i = 0; i < meta.size(); ++i)
    for (std::size_t j = i + 1; j < meta.size(); ++j) {
      bool sw = meta[i].word == meta[j].word;
      bool ss = meta[i].speaker == meta[j].speaker;
      if (mode == SameDiffMode::kAll ? sw : (sw && !ss)) return true;
    }
  return false;
}

}  // namespace

TEST_CASE("cosine distance basics") {
  Vec u(2), v(2), z(2);
  u << 1.0, 0.0;
  v << 0.0, 2.0;
  z << 0.0, 0.0;
  CHECK(CosineDistance(u, u) == doctest::Approx(0.0));
  CHECK(CosineDistance(u, v) == doctest::Approx(1.0));
  CHECK(CosineDistance(u, z) == 1.0);
}

TEST_CASE("hand-worked three-item ranking") {
  // Items: (w0,s0), (w0,s1), (w1,s0). Pairs in order: (0,1) pos, (0,2) neg,
  // (1,2) neg. Both negatives rank below the positive: AP = 1/3.
  Mat z(3, 2);
  z << 1.0, 0.0,
       0.0, 1.0,
       1.0, 0.1;
  std::vector<PairMeta> meta{{"w0", "s0"}, {"w0", "s1"}, {"w1", "s0"}};
  SameDiffResult r = SameDiffAp(z, meta, SameDiffMode::kCrossSpeaker);
  CHECK(r.n_total_pairs == 3);
  CHECK(r.n_positive_pairs == 1);
  CHECK(r.ap == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("perfect embeddings reach AP 1") {
  Mat z(4, 2);
  z << 1.0, 0.0,
       1.0, 0.0,
       0.0, 1.0,
       0.0, 1.0;
  std::vector<PairMeta> meta{{"w0", "s0"}, {"w0", "s1"}, {"w1", "s0"}, {"w1", "s1"}};
  SameDiffResult r = SameDiffAp(z, meta, SameDiffMode::kCrossSpeaker);
  CHECK(r.ap == doctest::Approx(1.0));
}

TEST_CASE("average precision equals the definitional oracle exactly") {
  Rng rng(20260401);
  int done = 0;
  while (done < 20) {
    std::vector<PairMeta> meta = RandomMeta(20, rng, 5, 3);
    Mat z = RandomMat(20, 4, rng);
    for (SameDiffMode mode : {SameDiffMode::kAll, SameDiffMode::kCrossSpeaker,
                              SameDiffMode::kCrossSpeakerExcludeSameSpeaker}) {
      if (!HasPositive(meta, mode)) continue;
      CHECK(SameDiffAp(z, meta, mode).ap == OracleAp(z, meta, mode));
    }
    ++done;
  }
}

TEST_CASE("same-speaker repeats count as negatives in cross-speaker mode") {
  // Two same-word same-speaker items close together plus a cross-speaker
  // repeat farther away.
  Mat z(3, 2);
  z << 1.0, 0.0,
       1.0, 0.01,
       0.0, 1.0;
  std::vector<PairMeta> meta{{"w0", "s0"}, {"w0", "s0"}, {"w0", "s1"}};
  SameDiffResult cross = SameDiffAp(z, meta, SameDiffMode::kCrossSpeaker);
  CHECK(cross.n_total_pairs == 3);
  CHECK(cross.n_positive_pairs == 2);
  CHECK(cross.ap < 1.0);  // the same-speaker pair outranks the positives

  SameDiffResult excl = SameDiffAp(z, meta, SameDiffMode::kCrossSpeakerExcludeSameSpeaker);
  CHECK(excl.n_total_pairs == 2);
  CHECK(excl.ap == doctest::Approx(1.0));
}

TEST_CASE("no positive pair is an error") {
  Mat z = Mat::Identity(2, 2);
  std::vector<PairMeta> meta{{"w0", "s0"}, {"w1", "s0"}};
  CHECK_THROWS_AS(SameDiffAp(z, meta, SameDiffMode::kAll), std::runtime_error);
}

TEST_CASE("pairwise dtw costs are identical single- and multi-threaded") {
  SyntheticSpec spec;
  spec.n_languages = 1;
  spec.vocab_size_per_language = 4;
  spec.speakers_per_language = 2;
  spec.instances_per_word = 2;
  spec.feature_dim = 4;
  spec.seed = 99;
  Corpus corpus = GenerateCorpus(spec);
  std::vector<double> one = PairwiseDtwCosts(corpus, true, 1);
  std::vector<double> four = PairwiseDtwCosts(corpus, true, 4);
  CHECK(one == four);
  CHECK(one.size() == static_cast<std::size_t>(corpus.size()) *
                          static_cast<std::size_t>(corpus.size() - 1) / 2);
}

TEST_CASE("dtw ranks a clean synthetic corpus well") {
  SyntheticSpec spec;
  spec.n_languages = 1;
  spec.vocab_size_per_language = 5;
  spec.speakers_per_language = 2;
  spec.instances_per_word = 2;
  spec.feature_dim = 6;
  spec.noise_scale = 0.05;
  spec.seed = 17;
  Corpus corpus = GenerateCorpus(spec);
  std::vector<PairMeta> meta;
  for (int id = 0; id < corpus.size(); ++id) {
    const SegmentMeta& m = corpus.segment(id).meta;
    meta.push_back(PairMeta{WordKey(m.language, m.word), m.speaker});
  }
  std::vector<double> costs = PairwiseDtwCosts(corpus, true, 1);
  SameDiffResult r = SameDiffApFromDistances(costs, meta, SameDiffMode::kAll);
  // Chance level here is the positive-pair fraction, about 0.16.
  CHECK(r.ap > 0.6);
}

TEST_CASE("metric files are written with the pr curve") {
  Mat z(4, 2);
  z << 1.0, 0.0, 1.0, 0.0, 0.0, 1.0, 0.0, 1.0;
  std::vector<PairMeta> meta{{"w0", "s0"}, {"w0", "s1"}, {"w1", "s0"}, {"w1", "s1"}};
  SameDiffResult r = SameDiffAp(z, meta, SameDiffMode::kCrossSpeaker);
  WriteSameDiffResult(r, "eval_test_metrics.tsv", "eval_test_pr.tsv");
  std::ifstream metrics("eval_test_metrics.tsv");
  std::string line;
  std::getline(metrics, line);
  CHECK(line == "metric\tvalue");
  std::getline(metrics, line);
  CHECK(line.substr(0, 3) == "ap\t");
  std::ifstream pr("eval_test_pr.tsv");
  std::getline(pr, line);
  CHECK(line == "recall\tprecision");
  std::remove("eval_test_metrics.tsv");
  std::remove("eval_test_pr.tsv");
}
