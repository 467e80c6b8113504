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

#include "awe/probe.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <numeric>
#include <set>
#include <stdexcept>

#include "awe/eval.hpp"
#include "awe/rng.hpp"

namespace awe {

namespace {

std::pair<std::vector<std::size_t>, std::vector<std::size_t>> SplitIndices(std::size_t n,
                                                                           std::uint64_t seed) {
  Rng rng(DeriveSeed(seed, "probe-split"));
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  for (std::size_t i = n; i > 1; --i) std::swap(idx[i - 1], idx[rng.Index(i)]);
  std::size_t n_test = std::max<std::size_t>(1, n / 5);
  std::vector<std::size_t> test(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n_test));
  std::vector<std::size_t> train(idx.begin() + static_cast<std::ptrdiff_t>(n_test), idx.end());
  return {train, test};
}

}  // namespace

int PhoneEditDistance(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  const std::size_t n = a.size(), m = b.size();
  std::vector<int> prev(m + 1), cur(m + 1);
  std::iota(prev.begin(), prev.end(), 0);
  for (std::size_t i = 1; i <= n; ++i) {
    cur[0] = static_cast<int>(i);
    for (std::size_t j = 1; j <= m; ++j) {
      int sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
    }
    std::swap(prev, cur);
  }
  return prev[m];
}

std::vector<EditDistanceBin> CosineByEditDistance(const Corpus& corpus, const Mat& embeddings,
                                                  int max_bin) {
  if (embeddings.rows() != corpus.size())
    throw std::invalid_argument("cosine_by_edit_distance: embedding count mismatch");
  if (max_bin < 1) throw std::invalid_argument("max_bin must be >= 1");
  for (int id = 0; id < corpus.size(); ++id)
    if (corpus.segment(id).meta.phones.empty())
      throw std::invalid_argument("cosine_by_edit_distance: phones not populated");

  std::vector<double> sums(static_cast<std::size_t>(max_bin) + 1, 0.0);
  std::vector<long> counts(static_cast<std::size_t>(max_bin) + 1, 0);
  for (int i = 0; i < corpus.size(); ++i) {
    for (int j = i + 1; j < corpus.size(); ++j) {
      int d = PhoneEditDistance(corpus.segment(i).meta.phones, corpus.segment(j).meta.phones);
      int bin = std::min(d, max_bin);
      double c = CosineDistance(embeddings.row(i).transpose(), embeddings.row(j).transpose());
      sums[static_cast<std::size_t>(bin)] += c;
      counts[static_cast<std::size_t>(bin)]++;
    }
  }
  std::vector<EditDistanceBin> bins;
  for (int b = 0; b <= max_bin; ++b) {
    if (counts[static_cast<std::size_t>(b)] == 0) continue;
    bins.push_back(EditDistanceBin{b,
                                   sums[static_cast<std::size_t>(b)] /
                                       static_cast<double>(counts[static_cast<std::size_t>(b)]),
                                   counts[static_cast<std::size_t>(b)]});
  }
  return bins;
}

double FitDurationRegression(const Mat& embeddings, const std::vector<double>& durations_ms,
                             std::uint64_t split_seed) {
  const std::size_t n = durations_ms.size();
  if (static_cast<std::size_t>(embeddings.rows()) != n)
    throw std::invalid_argument("duration regression: size mismatch");
  if (n < 10) throw std::invalid_argument("duration regression: need >= 10 samples");

  auto [train, test] = SplitIndices(n, split_seed);
  const Eigen::Index d = embeddings.cols() + 1;

  Mat x_train(static_cast<Eigen::Index>(train.size()), d);
  Vec y_train(static_cast<Eigen::Index>(train.size()));
  for (std::size_t k = 0; k < train.size(); ++k) {
    x_train(static_cast<Eigen::Index>(k), 0) = 1.0;
    x_train.row(static_cast<Eigen::Index>(k)).tail(d - 1) =
        embeddings.row(static_cast<Eigen::Index>(train[k]));
    y_train[static_cast<Eigen::Index>(k)] = durations_ms[train[k]];
  }

  Mat gram = x_train.transpose() * x_train;
  gram.diagonal().array() += 1e-8;  // rank safety
  Vec w = gram.ldlt().solve(x_train.transpose() * y_train);

  double test_mean = 0.0;
  for (std::size_t k : test) test_mean += durations_ms[k];
  test_mean /= static_cast<double>(test.size());

  double ss_res = 0.0, ss_tot = 0.0;
  for (std::size_t k : test) {
    Vec x(d);
    x[0] = 1.0;
    x.tail(d - 1) = embeddings.row(static_cast<Eigen::Index>(k)).transpose();
    double pred = w.dot(x);
    ss_res += (durations_ms[k] - pred) * (durations_ms[k] - pred);
    ss_tot += (durations_ms[k] - test_mean) * (durations_ms[k] - test_mean);
  }
  if (ss_tot < 1e-12) return 0.0;  // degenerate: constant durations
  return 1.0 - ss_res / ss_tot;
}

ClassifierProbeResult FitLinearClassifier(const Mat& embeddings,
                                          const std::vector<std::string>& labels,
                                          std::uint64_t split_seed) {
  const std::size_t n = labels.size();
  if (static_cast<std::size_t>(embeddings.rows()) != n)
    throw std::invalid_argument("linear classifier probe: size mismatch");

  std::set<std::string> uniq(labels.begin(), labels.end());
  std::vector<std::string> classes(uniq.begin(), uniq.end());
  std::map<std::string, int> class_index;
  for (std::size_t c = 0; c < classes.size(); ++c) class_index[classes[c]] = static_cast<int>(c);
  for (const std::string& cls : classes) {
    if (std::count(labels.begin(), labels.end(), cls) < 2)
      throw std::invalid_argument("linear classifier probe: class with < 2 samples: " + cls);
  }
  const int k = static_cast<int>(classes.size());
  const Eigen::Index m = embeddings.cols();

  // Re-split with the next seed if a class is absent from the train side.
  std::vector<std::size_t> train, test;
  bool ok = false;
  for (int attempt = 0; attempt < 10 && !ok; ++attempt) {
    std::tie(train, test) = SplitIndices(n, split_seed + static_cast<std::uint64_t>(attempt));
    std::set<int> seen;
    for (std::size_t i : train) seen.insert(class_index[labels[i]]);
    ok = static_cast<int>(seen.size()) == k;
  }
  if (!ok) throw std::runtime_error("linear classifier probe: class missing from every split");

  Mat w = Mat::Zero(k, m);
  Vec b = Vec::Zero(k);
  const double lr = 0.1;
  const int iters = 500;
  const double inv_train = 1.0 / static_cast<double>(train.size());

  for (int it = 0; it < iters; ++it) {
    Mat gw = Mat::Zero(k, m);
    Vec gb = Vec::Zero(k);
    for (std::size_t i : train) {
      Vec x = embeddings.row(static_cast<Eigen::Index>(i)).transpose();
      Vec logits = w * x + b;
      Vec ex = (logits.array() - logits.maxCoeff()).exp();
      Vec prob = ex / ex.sum();
      prob[class_index[labels[i]]] -= 1.0;
      gw += prob * x.transpose();
      gb += prob;
    }
    w -= lr * inv_train * gw;
    b -= lr * inv_train * gb;
  }

  std::vector<long> tp(static_cast<std::size_t>(k), 0), fp(static_cast<std::size_t>(k), 0),
      fn(static_cast<std::size_t>(k), 0);
  long correct = 0;
  for (std::size_t i : test) {
    Vec logits = w * embeddings.row(static_cast<Eigen::Index>(i)).transpose() + b;
    Eigen::Index pred;
    logits.maxCoeff(&pred);
    int truth = class_index[labels[i]];
    if (static_cast<int>(pred) == truth) {
      ++correct;
      tp[static_cast<std::size_t>(truth)]++;
    } else {
      fp[static_cast<std::size_t>(pred)]++;
      fn[static_cast<std::size_t>(truth)]++;
    }
  }

  ClassifierProbeResult result;
  result.accuracy = static_cast<double>(correct) / static_cast<double>(test.size());
  result.classes = classes;
  for (int c = 0; c < k; ++c) {
    auto cu = static_cast<std::size_t>(c);
    double denom = 2.0 * tp[cu] + fp[cu] + fn[cu];
    result.per_class_f1.push_back(denom > 0 ? 2.0 * tp[cu] / denom : 0.0);
  }
  return result;
}

Mat Pca2d(const Mat& embeddings) {
  const Eigen::Index n = embeddings.rows();
  if (n < 3) throw std::invalid_argument("pca_2d: need >= 3 points");
  Mat centered = embeddings.rowwise() - embeddings.colwise().mean();
  Mat cov = centered.transpose() * centered / static_cast<double>(n - 1);
  Eigen::SelfAdjointEigenSolver<Mat> solver(cov);
  if (solver.info() != Eigen::Success) throw std::runtime_error("pca_2d: eigendecomposition failed");

  // Eigenvalues ascend; take the top two components.
  Mat components(embeddings.cols(), 2);
  for (int c = 0; c < 2; ++c) {
    Vec v = solver.eigenvectors().col(embeddings.cols() - 1 - c);
    Eigen::Index arg = 0;
    v.cwiseAbs().maxCoeff(&arg);
    if (v[arg] < 0) v = -v;
    components.col(c) = v;
  }
  return centered * components;
}

std::vector<Segment> SharedTriphoneSegments(const Corpus& corpus,
                                            const std::vector<std::string>& languages,
                                            int min_languages) {
  std::set<std::string> wanted(languages.begin(), languages.end());

  struct Slice {
    int segment_id;
    int start, end;
    std::string trigram;
    std::vector<std::string> phones;
  };
  std::vector<Slice> slices;
  std::map<std::string, std::set<std::string>> trigram_languages;

  for (int id = 0; id < corpus.size(); ++id) {
    const Segment& seg = corpus.segment(id);
    if (wanted.find(seg.meta.language) == wanted.end()) continue;
    const auto& phones = seg.meta.phones;
    const int n_phones = static_cast<int>(phones.size());
    if (n_phones < 3) continue;
    const int t = seg.NumFrames();
    auto boundary = [&](int k) {
      return static_cast<int>(static_cast<long>(k) * t / n_phones);
    };
    for (int i = 0; i + 3 <= n_phones; ++i) {
      int start = boundary(i), end = boundary(i + 3);
      if (end - start < 2) continue;
      std::string key = phones[static_cast<std::size_t>(i)] + " " +
                        phones[static_cast<std::size_t>(i) + 1] + " " +
                        phones[static_cast<std::size_t>(i) + 2];
      trigram_languages[key].insert(seg.meta.language);
      slices.push_back(Slice{id, start, end, key,
                             {phones[static_cast<std::size_t>(i)],
                              phones[static_cast<std::size_t>(i) + 1],
                              phones[static_cast<std::size_t>(i) + 2]}});
    }
  }

  std::vector<Segment> out;
  for (const Slice& s : slices) {
    if (static_cast<int>(trigram_languages[s.trigram].size()) < min_languages) continue;
    const Segment& src = corpus.segment(s.segment_id);
    Segment cut;
    cut.frames = src.frames.middleRows(s.start, s.end - s.start);
    cut.meta = src.meta;
    cut.meta.word = s.trigram;
    cut.meta.phones = s.phones;
    cut.meta.duration_ms = (s.end - s.start) * kFrameMs;
    out.push_back(std::move(cut));
  }
  return out;
}

void WriteEditDistanceBins(const std::vector<EditDistanceBin>& bins, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  out << "edit_distance\tmean_cosine\tpair_count\n";
  char buf[64];
  for (const EditDistanceBin& bin : bins) {
    std::snprintf(buf, sizeof(buf), "%.17g", bin.mean_cosine);
    out << bin.edit_distance << '\t' << buf << '\t' << bin.pair_count << '\n';
  }
}

void WritePca2d(const Mat& coords, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  out << "id\tx\ty\n";
  char bx[64], by[64];
  for (Eigen::Index i = 0; i < coords.rows(); ++i) {
    std::snprintf(bx, sizeof(bx), "%.17g", coords(i, 0));
    std::snprintf(by, sizeof(by), "%.17g", coords(i, 1));
    out << i << '\t' << bx << '\t' << by << '\n';
  }
}

void WriteClassifierProbe(const ClassifierProbeResult& result, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", result.accuracy);
  out << "accuracy\t" << buf << '\n';
  for (std::size_t c = 0; c < result.classes.size(); ++c) {
    std::snprintf(buf, sizeof(buf), "%.17g", result.per_class_f1[c]);
    out << "f1_" << result.classes[c] << '\t' << buf << '\n';
  }
}

}  // namespace awe
