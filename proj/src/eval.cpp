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

#include "awe/eval.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <stdexcept>
#include <thread>

#include "awe/dtw.hpp"

namespace awe {

std::string SameDiffModeName(SameDiffMode mode) {
  switch (mode) {
    case SameDiffMode::kAll: return "all";
    case SameDiffMode::kCrossSpeaker: return "cross_speaker";
    case SameDiffMode::kCrossSpeakerExcludeSameSpeaker: return "cross_speaker_excl";
  }
  throw std::invalid_argument("unknown samediff mode");
}

SameDiffMode SameDiffModeFromName(const std::string& name) {
  if (name == "all") return SameDiffMode::kAll;
  if (name == "cross_speaker") return SameDiffMode::kCrossSpeaker;
  if (name == "cross_speaker_excl") return SameDiffMode::kCrossSpeakerExcludeSameSpeaker;
  throw std::invalid_argument("unknown samediff mode: " + name);
}

double CosineDistance(const Vec& u, const Vec& v) {
  if (u.size() != v.size()) throw std::invalid_argument("cosine_distance: dimension mismatch");
  double nu = u.norm();
  double nv = v.norm();
  if (nu == 0.0 || nv == 0.0) return 1.0;
  return 1.0 - u.dot(v) / (nu * nv);
}

namespace {

SameDiffResult RankAndScore(const std::vector<double>& distances,
                            const std::vector<PairMeta>& meta, SameDiffMode mode) {
  const std::size_t n = meta.size();
  if (n < 2) throw std::invalid_argument("samediff_ap: need at least 2 segments");

  // Pair labelling in enumeration order (i < j).
  std::vector<std::size_t> kept;   // indices into `distances`
  std::vector<char> positive;
  std::size_t pair_index = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j, ++pair_index) {
      bool same_word = meta[i].word == meta[j].word;
      bool same_speaker = meta[i].speaker == meta[j].speaker;
      bool is_positive;
      switch (mode) {
        case SameDiffMode::kAll:
          is_positive = same_word;
          break;
        case SameDiffMode::kCrossSpeaker:
          is_positive = same_word && !same_speaker;
          break;
        case SameDiffMode::kCrossSpeakerExcludeSameSpeaker:
          if (same_word && same_speaker) continue;  // dropped from the ranking
          is_positive = same_word && !same_speaker;
          break;
      }
      kept.push_back(pair_index);
      positive.push_back(is_positive ? 1 : 0);
    }
  }
  if (pair_index != distances.size())
    throw std::invalid_argument("samediff_ap: distance count mismatch");

  long n_pos = std::count(positive.begin(), positive.end(), char{1});
  if (n_pos == 0) throw std::runtime_error("samediff_ap: no positive pair under this mode");

  // Ascending distance, ties by ascending pair enumeration index.
  std::vector<std::size_t> order(kept.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    double da = distances[kept[a]], db = distances[kept[b]];
    if (da != db) return da < db;
    return kept[a] < kept[b];
  });

  SameDiffResult result;
  result.mode = mode;
  result.n_total_pairs = static_cast<long>(kept.size());
  result.n_positive_pairs = n_pos;
  long seen_pos = 0;
  double ap_sum = 0.0;
  for (std::size_t rank = 0; rank < order.size(); ++rank) {
    if (!positive[order[rank]]) continue;
    ++seen_pos;
    double precision = static_cast<double>(seen_pos) / static_cast<double>(rank + 1);
    ap_sum += precision;
    result.pr_curve.emplace_back(static_cast<double>(seen_pos) / static_cast<double>(n_pos),
                                 precision);
  }
  result.ap = ap_sum / static_cast<double>(n_pos);
  return result;
}

}  // namespace

SameDiffResult SameDiffAp(const Mat& embeddings, const std::vector<PairMeta>& meta,
                          SameDiffMode mode) {
  const std::size_t n = meta.size();
  if (static_cast<std::size_t>(embeddings.rows()) != n)
    throw std::invalid_argument("samediff_ap: embedding/metadata count mismatch");
  std::vector<double> distances;
  distances.reserve(n * (n - 1) / 2);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      distances.push_back(CosineDistance(embeddings.row(static_cast<Eigen::Index>(i)).transpose(),
                                         embeddings.row(static_cast<Eigen::Index>(j)).transpose()));
  return RankAndScore(distances, meta, mode);
}

SameDiffResult SameDiffAp(const Mat& embeddings, const Corpus& corpus, SameDiffMode mode) {
  std::vector<PairMeta> meta;
  meta.reserve(static_cast<std::size_t>(corpus.size()));
  for (int id = 0; id < corpus.size(); ++id) {
    const SegmentMeta& m = corpus.segment(id).meta;
    meta.push_back(PairMeta{WordKey(m.language, m.word), m.speaker});
  }
  return SameDiffAp(embeddings, meta, mode);
}

SameDiffResult SameDiffApFromDistances(const std::vector<double>& distances,
                                       const std::vector<PairMeta>& meta, SameDiffMode mode) {
  return RankAndScore(distances, meta, mode);
}

std::vector<double> PairwiseDtwCosts(const Corpus& corpus, bool normalize, int n_threads) {
  const std::size_t n = static_cast<std::size_t>(corpus.size());
  const std::size_t n_pairs = n * (n - 1) / 2;
  std::vector<double> costs(n_pairs);

  // Flat pair index -> (i, j).
  std::vector<std::pair<int, int>> pairs;
  pairs.reserve(n_pairs);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      pairs.emplace_back(static_cast<int>(i), static_cast<int>(j));

  auto work = [&](std::size_t begin, std::size_t end) {
    for (std::size_t k = begin; k < end; ++k)
      costs[k] = DtwCost(corpus.segment(pairs[k].first), corpus.segment(pairs[k].second), normalize);
  };
  if (n_threads <= 1 || n_pairs < 64) {
    work(0, n_pairs);
  } else {
    std::vector<std::thread> pool;
    std::size_t chunk = (n_pairs + static_cast<std::size_t>(n_threads) - 1) /
                        static_cast<std::size_t>(n_threads);
    for (int t = 0; t < n_threads; ++t) {
      std::size_t begin = static_cast<std::size_t>(t) * chunk;
      std::size_t end = std::min(n_pairs, begin + chunk);
      if (begin < end) pool.emplace_back(work, begin, end);
    }
    for (auto& th : pool) th.join();
  }
  return costs;
}

void WriteSameDiffResult(const SameDiffResult& result, const std::string& metrics_path,
                         const std::string& pr_curve_path) {
  std::ofstream out(metrics_path);
  if (!out) throw std::runtime_error("cannot open " + metrics_path);
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", result.ap);
  out << "metric\tvalue\n";
  out << "ap\t" << buf << '\n';
  out << "n_positive_pairs\t" << result.n_positive_pairs << '\n';
  out << "n_total_pairs\t" << result.n_total_pairs << '\n';
  out << "mode\t" << SameDiffModeName(result.mode) << '\n';

  if (!pr_curve_path.empty()) {
    std::ofstream pr(pr_curve_path);
    if (!pr) throw std::runtime_error("cannot open " + pr_curve_path);
    pr << "recall\tprecision\n";
    for (const auto& [recall, precision] : result.pr_curve) {
      std::snprintf(buf, sizeof(buf), "%.17g", recall);
      pr << buf << '\t';
      std::snprintf(buf, sizeof(buf), "%.17g", precision);
      pr << buf << '\n';
    }
  }
}

}  // namespace awe
