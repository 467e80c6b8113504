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

#include "awe/corpus.hpp"

#include <algorithm>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>

#include "awe/rng.hpp"

namespace awe {

namespace {

std::string ZeroPad(const char* prefix, int value, int width) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%s%0*d", prefix, width, value);
  return buf;
}

template <typename T>
void WriteLe(std::ofstream& out, T value) {
  // Little-endian host assumed (x86/aarch64); asserted at load time via magic.
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T ReadLe(std::ifstream& in) {
  T value{};
  in.read(reinterpret_cast<char*>(&value), sizeof(T));
  if (!in) throw std::runtime_error("corpus feature file truncated");
  return value;
}

}  // namespace

Corpus::Corpus(std::vector<Segment> segments) : segments_(std::move(segments)) {
  for (int id = 0; id < static_cast<int>(segments_.size()); ++id) {
    const SegmentMeta& m = segments_[static_cast<std::size_t>(id)].meta;
    by_word_[WordKey(m.language, m.word)].push_back(id);
    by_speaker_[m.speaker].push_back(id);
    by_language_[m.language].push_back(id);
  }
}

std::vector<std::string> Corpus::Languages() const {
  std::vector<std::string> out;
  out.reserve(by_language_.size());
  for (const auto& [lang, ids] : by_language_) out.push_back(lang);
  return out;
}

std::vector<std::string> Corpus::Speakers() const {
  std::vector<std::string> out;
  out.reserve(by_speaker_.size());
  for (const auto& [spk, ids] : by_speaker_) out.push_back(spk);
  return out;
}

Corpus Corpus::Subset(const std::vector<int>& ids) const {
  std::vector<Segment> segs;
  segs.reserve(ids.size());
  for (int id : ids) {
    if (id < 0 || id >= size()) throw std::out_of_range("segment id out of range");
    segs.push_back(segments_[static_cast<std::size_t>(id)]);
  }
  return Corpus(std::move(segs));
}

Corpus Corpus::FilterLanguage(const std::string& language) const {
  auto it = by_language_.find(language);
  if (it == by_language_.end()) throw std::invalid_argument("unknown language: " + language);
  return Subset(it->second);
}

void SyntheticSpec::Validate() const {
  auto require = [](bool ok, const char* msg) {
    if (!ok) throw std::invalid_argument(std::string("invalid synthetic spec: ") + msg);
  };
  require(n_languages >= 1, "n_languages >= 1");
  require(shared_phone_pool >= 1, "shared_phone_pool >= 1");
  require(phones_per_language >= 1 && phones_per_language <= shared_phone_pool,
          "phones_per_language in [1, shared_phone_pool]");
  require(vocab_size_per_language >= 1, "vocab_size_per_language >= 1");
  require(word_length_min >= 1 && word_length_min <= word_length_max, "word length range");
  require(speakers_per_language >= 1, "speakers_per_language >= 1");
  require(instances_per_word >= 1, "instances_per_word >= 1");
  require(frames_per_phone_min >= 1 && frames_per_phone_min <= frames_per_phone_max,
          "frames_per_phone range");
  require(feature_dim >= 1, "feature_dim >= 1");
  require(speaker_shift_scale >= 0 && noise_scale >= 0 && channel_scale >= 0,
          "scales non-negative");
}

Corpus GenerateCorpus(const SyntheticSpec& spec) {
  spec.Validate();
  const int D = spec.feature_dim;

  // Shared phone prototypes.
  Rng phone_rng(DeriveSeed(spec.seed, "phones"));
  std::vector<Vec> targets(static_cast<std::size_t>(spec.shared_phone_pool));
  for (auto& t : targets) {
    t = Vec(D);
    for (int d = 0; d < D; ++d) t[d] = phone_rng.Normal();
  }

  // Per-language phone inventories (subsets of the shared pool).
  Rng inv_rng(DeriveSeed(spec.seed, "inventory"));
  std::vector<std::vector<int>> inventories;
  for (int l = 0; l < spec.n_languages; ++l) {
    std::vector<int> pool(static_cast<std::size_t>(spec.shared_phone_pool));
    std::iota(pool.begin(), pool.end(), 0);
    for (int k = 0; k < spec.phones_per_language; ++k) {
      std::size_t j = static_cast<std::size_t>(k) +
                      inv_rng.Index(pool.size() - static_cast<std::size_t>(k));
      std::swap(pool[static_cast<std::size_t>(k)], pool[j]);
    }
    pool.resize(static_cast<std::size_t>(spec.phones_per_language));
    std::sort(pool.begin(), pool.end());
    inventories.push_back(std::move(pool));
  }

  // Per-language lexicons: phone sequences, homophone-free within a language.
  Rng vocab_rng(DeriveSeed(spec.seed, "vocab"));
  std::vector<std::vector<std::vector<int>>> lexicons;  // [lang][word] -> phone ids
  for (int l = 0; l < spec.n_languages; ++l) {
    const std::vector<int>& inv = inventories[static_cast<std::size_t>(l)];
    std::set<std::vector<int>> seen;
    std::vector<std::vector<int>> lexicon;
    for (int w = 0; w < spec.vocab_size_per_language; ++w) {
      std::vector<int> seq;
      for (int attempt = 0; attempt < 64; ++attempt) {
        int len = static_cast<int>(
            vocab_rng.UniformInt(spec.word_length_min, spec.word_length_max));
        seq.clear();
        for (int p = 0; p < len; ++p) seq.push_back(inv[vocab_rng.Index(inv.size())]);
        if (seen.insert(seq).second) break;
      }
      lexicon.push_back(seq);
    }
    lexicons.push_back(std::move(lexicon));
  }

  // Per-speaker affine distortion (diagonal scale + offset).
  Rng spk_rng(DeriveSeed(spec.seed, "speakers"));
  std::vector<std::vector<std::pair<Vec, Vec>>> speaker_affine;  // [lang][spk] -> (scale, offset)
  for (int l = 0; l < spec.n_languages; ++l) {
    std::vector<std::pair<Vec, Vec>> per_lang;
    for (int s = 0; s < spec.speakers_per_language; ++s) {
      Vec scale(D), offset(D);
      for (int d = 0; d < D; ++d) scale[d] = 1.0 + 0.25 * spec.speaker_shift_scale * spk_rng.Normal();
      for (int d = 0; d < D; ++d) offset[d] = spec.speaker_shift_scale * spk_rng.Normal();
      per_lang.emplace_back(std::move(scale), std::move(offset));
    }
    speaker_affine.push_back(std::move(per_lang));
  }

  std::vector<Segment> segments;
  for (int l = 0; l < spec.n_languages; ++l) {
    const std::string lang = ZeroPad("lang", l, 1);
    for (int w = 0; w < spec.vocab_size_per_language; ++w) {
      const std::vector<int>& seq = lexicons[static_cast<std::size_t>(l)][static_cast<std::size_t>(w)];
      for (int s = 0; s < spec.speakers_per_language; ++s) {
        const auto& [scale, offset] = speaker_affine[static_cast<std::size_t>(l)][static_cast<std::size_t>(s)];
        for (int i = 0; i < spec.instances_per_word; ++i) {
          std::ostringstream label;
          label << "segment/" << l << "/" << w << "/" << s << "/" << i;
          Rng rng(DeriveSeed(spec.seed, label.str()));

          // Per-phone durations; total frames T.
          std::vector<int> durs;
          int total = 0;
          for (std::size_t p = 0; p < seq.size(); ++p) {
            int f = static_cast<int>(
                rng.UniformInt(spec.frames_per_phone_min, spec.frames_per_phone_max));
            durs.push_back(f);
            total += f;
          }
          if (total < 2) {  // single 1-frame phone at the range minimum
            durs.back() += 2 - total;
            total = 2;
          }

          // Control point at the centre of each phone's span; frames
          // cross-fade linearly between consecutive phone targets.
          std::vector<double> centers;
          int cursor = 0;
          for (std::size_t p = 0; p < seq.size(); ++p) {
            centers.push_back(cursor + (durs[p] - 1) * 0.5);
            cursor += durs[p];
          }

          Vec channel = Vec::Zero(D);
          if (spec.channel_scale > 0) {
            for (int d = 0; d < D; ++d) channel[d] = spec.channel_scale * rng.Normal();
          }

          Mat frames(total, D);
          for (int t = 0; t < total; ++t) {
            Vec x;
            if (static_cast<double>(t) <= centers.front()) {
              x = targets[static_cast<std::size_t>(seq.front())];
            } else if (static_cast<double>(t) >= centers.back()) {
              x = targets[static_cast<std::size_t>(seq.back())];
            } else {
              std::size_t p = 0;
              while (centers[p + 1] < static_cast<double>(t)) ++p;
              double alpha = (t - centers[p]) / (centers[p + 1] - centers[p]);
              x = (1.0 - alpha) * targets[static_cast<std::size_t>(seq[p])] +
                  alpha * targets[static_cast<std::size_t>(seq[p + 1])];
            }
            for (int d = 0; d < D; ++d) {
              double v = scale[d] * x[d] + offset[d] + channel[d];
              if (spec.noise_scale > 0) v += spec.noise_scale * rng.Normal();
              frames(t, d) = v;
            }
          }

          Segment seg;
          seg.frames = std::move(frames);
          seg.meta.word = ZeroPad("w", w, 2);
          seg.meta.speaker = lang + "_" + ZeroPad("s", s, 2);
          seg.meta.language = lang;
          for (int ph : seq) seg.meta.phones.push_back(ZeroPad("p", ph, 2));
          seg.meta.duration_ms = total * kFrameMs;
          segments.push_back(std::move(seg));
        }
      }
    }
  }
  return Corpus(std::move(segments));
}

DiscoveredClusters SimulateUtd(const Corpus& corpus, const CorruptionConfig& cfg) {
  if (cfg.label_error_rate < 0 || cfg.label_error_rate > 1)
    throw std::invalid_argument("label_error_rate must be in [0,1]");
  if (cfg.boundary_jitter_frames < 0)
    throw std::invalid_argument("boundary_jitter_frames must be >= 0");
  if (corpus.by_language().size() != 1)
    throw std::invalid_argument("simulate_utd requires a single-language corpus");

  // Ground-truth clusters in sorted word-key order.
  std::vector<std::string> keys;
  for (const auto& [key, ids] : corpus.by_word()) keys.push_back(key);
  const int n_clusters = static_cast<int>(keys.size());
  std::map<std::string, int> cluster_of_key;
  for (int c = 0; c < n_clusters; ++c) cluster_of_key[keys[static_cast<std::size_t>(c)]] = c;

  Rng rng(DeriveSeed(cfg.seed, "utd"));
  std::vector<std::vector<SegmentSpan>> spans(static_cast<std::size_t>(n_clusters));
  for (int id = 0; id < corpus.size(); ++id) {
    const Segment& seg = corpus.segment(id);
    int truth = cluster_of_key.at(WordKey(seg.meta.language, seg.meta.word));

    // Label reassignment draw happens unconditionally so the mislabelled set
    // is nested across rates under a fixed seed.
    double u = rng.Uniform();
    std::size_t alt = n_clusters > 1 ? rng.Index(static_cast<std::size_t>(n_clusters - 1)) : 0;
    int assigned = truth;
    if (!cfg.fix_labels && n_clusters > 1 && u < cfg.label_error_rate) {
      assigned = static_cast<int>(alt);
      if (assigned >= truth) ++assigned;  // uniform over the other clusters
    }

    const int T = seg.NumFrames();
    int start = 0, end = T;
    if (cfg.boundary_jitter_frames > 0) {
      int ds = static_cast<int>(rng.UniformInt(-cfg.boundary_jitter_frames, cfg.boundary_jitter_frames));
      int de = static_cast<int>(rng.UniformInt(-cfg.boundary_jitter_frames, cfg.boundary_jitter_frames));
      if (!cfg.fix_boundaries) {
        start = std::clamp(ds, 0, T - 2);
        end = std::clamp(T + de, start + 2, T);
      }
    }
    spans[static_cast<std::size_t>(assigned)].push_back(SegmentSpan{id, start, end});
  }

  DiscoveredClusters out;
  for (int c = 0; c < n_clusters; ++c) {
    if (spans[static_cast<std::size_t>(c)].empty()) continue;
    out.clusters.emplace_back(ZeroPad("c", c, 4), std::move(spans[static_cast<std::size_t>(c)]));
  }
  return out;
}

PairList PairsFromClusters(const DiscoveredClusters& clusters) {
  PairList out;
  for (const auto& [label, spans] : clusters.clusters) {
    for (std::size_t a = 0; a < spans.size(); ++a)
      for (std::size_t b = a + 1; b < spans.size(); ++b) {
        int i = spans[a].segment_id, j = spans[b].segment_id;
        out.pairs.emplace_back(std::min(i, j), std::max(i, j));
      }
  }
  std::sort(out.pairs.begin(), out.pairs.end());
  return out;
}

PairList SampleWordPairs(const Corpus& corpus, int n, std::uint64_t seed) {
  if (n < 0) throw std::invalid_argument("n must be >= 0");
  // Pool of all same-type pairs, enumerated type by type.
  struct TypePairs {
    const std::vector<int>* ids;
    std::size_t n_pairs;
  };
  std::vector<TypePairs> types;
  std::size_t total = 0;
  for (const auto& [key, ids] : corpus.by_word()) {
    if (ids.size() < 2) continue;
    std::size_t c2 = ids.size() * (ids.size() - 1) / 2;
    types.push_back(TypePairs{&ids, c2});
    total += c2;
  }
  if (total == 0) throw std::runtime_error("corpus has no same-word pair");

  PairList out;
  Rng rng(DeriveSeed(seed, "word-pairs"));
  for (int k = 0; k < n; ++k) {
    std::size_t pick = rng.Index(total);
    for (const TypePairs& tp : types) {
      if (pick >= tp.n_pairs) {
        pick -= tp.n_pairs;
        continue;
      }
      // Unrank pair index within this type.
      std::size_t a = 0;
      std::size_t remaining = tp.ids->size() - 1;
      while (pick >= remaining) {
        pick -= remaining;
        ++a;
        --remaining;
      }
      std::size_t b = a + 1 + pick;
      out.pairs.emplace_back((*tp.ids)[a], (*tp.ids)[b]);
      break;
    }
  }
  return out;
}

std::vector<Corpus> SplitCorpus(const Corpus& corpus, const std::vector<double>& fractions,
                                SplitBy by, std::uint64_t seed) {
  double sum = std::accumulate(fractions.begin(), fractions.end(), 0.0);
  if (std::abs(sum - 1.0) > 1e-9) throw std::invalid_argument("fractions must sum to 1");
  const std::size_t parts = fractions.size();
  if (parts == 0) throw std::invalid_argument("need at least one fraction");

  const int n = corpus.size();
  Rng rng(DeriveSeed(seed, "split"));
  std::vector<std::vector<int>> assigned(parts);

  if (by == SplitBy::kSegment) {
    std::vector<int> ids(static_cast<std::size_t>(n));
    std::iota(ids.begin(), ids.end(), 0);
    for (std::size_t i = ids.size(); i > 1; --i)
      std::swap(ids[i - 1], ids[rng.Index(i)]);
    // Largest-remainder apportionment of exact counts.
    std::vector<std::size_t> counts(parts);
    std::vector<std::pair<double, std::size_t>> rema;
    std::size_t used = 0;
    for (std::size_t p = 0; p < parts; ++p) {
      double exact = fractions[p] * n;
      counts[p] = static_cast<std::size_t>(exact);
      used += counts[p];
      rema.emplace_back(exact - static_cast<double>(counts[p]), p);
    }
    std::stable_sort(rema.begin(), rema.end(),
                     [](const auto& a, const auto& b) { return a.first > b.first; });
    for (std::size_t k = 0; used + k < static_cast<std::size_t>(n); ++k)
      counts[rema[k % parts].second]++;
    std::size_t pos = 0;
    for (std::size_t p = 0; p < parts; ++p) {
      for (std::size_t k = 0; k < counts[p]; ++k) assigned[p].push_back(ids[pos++]);
      std::sort(assigned[p].begin(), assigned[p].end());
    }
  } else {
    std::vector<std::string> speakers = corpus.Speakers();
    if (speakers.size() < parts)
      throw std::runtime_error("fewer speakers than split parts");
    for (std::size_t i = speakers.size(); i > 1; --i)
      std::swap(speakers[i - 1], speakers[rng.Index(i)]);
    std::vector<double> deficit(parts);
    for (std::size_t p = 0; p < parts; ++p) deficit[p] = fractions[p] * n;
    for (const std::string& spk : speakers) {
      std::size_t best = 0;
      for (std::size_t p = 1; p < parts; ++p)
        if (deficit[p] > deficit[best]) best = p;
      const std::vector<int>& ids = corpus.by_speaker().at(spk);
      for (int id : ids) assigned[best].push_back(id);
      deficit[best] -= static_cast<double>(ids.size());
    }
    for (auto& ids : assigned) std::sort(ids.begin(), ids.end());
  }

  std::vector<Corpus> out;
  out.reserve(parts);
  for (const auto& ids : assigned) out.push_back(corpus.Subset(ids));
  return out;
}

void SaveCorpus(const Corpus& corpus, const std::string& meta_path, const std::string& feat_path) {
  std::ofstream meta(meta_path);
  if (!meta) throw std::runtime_error("cannot open " + meta_path);
  meta << "id\tword\tspeaker\tlanguage\tphones\tduration_ms\tn_frames\n";
  for (int id = 0; id < corpus.size(); ++id) {
    const SegmentMeta& m = corpus.segment(id).meta;
    meta << id << '\t' << m.word << '\t' << m.speaker << '\t' << m.language << '\t';
    for (std::size_t p = 0; p < m.phones.size(); ++p) {
      if (p) meta << ' ';
      meta << m.phones[p];
    }
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", m.duration_ms);
    meta << '\t' << buf << '\t' << corpus.segment(id).NumFrames() << '\n';
  }

  std::ofstream feat(feat_path, std::ios::binary);
  if (!feat) throw std::runtime_error("cannot open " + feat_path);
  feat.write("AWE1", 4);
  WriteLe<std::uint32_t>(feat, static_cast<std::uint32_t>(corpus.dim()));
  for (int id = 0; id < corpus.size(); ++id) {
    const Mat& f = corpus.segment(id).frames;
    WriteLe<std::uint32_t>(feat, static_cast<std::uint32_t>(f.rows()));
    for (int t = 0; t < f.rows(); ++t)
      for (int d = 0; d < f.cols(); ++d) WriteLe<float>(feat, static_cast<float>(f(t, d)));
  }
}

Corpus LoadCorpus(const std::string& meta_path, const std::string& feat_path) {
  std::ifstream meta(meta_path);
  if (!meta) throw std::runtime_error("cannot open " + meta_path);
  std::string line;
  std::getline(meta, line);  // header
  std::vector<SegmentMeta> metas;
  std::vector<int> n_frames;
  while (std::getline(meta, line)) {
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string id, word, speaker, language, phones, duration, frames;
    std::getline(ss, id, '\t');
    std::getline(ss, word, '\t');
    std::getline(ss, speaker, '\t');
    std::getline(ss, language, '\t');
    std::getline(ss, phones, '\t');
    std::getline(ss, duration, '\t');
    std::getline(ss, frames, '\t');
    SegmentMeta m;
    m.word = word;
    m.speaker = speaker;
    m.language = language;
    std::istringstream ps(phones);
    std::string phone;
    while (ps >> phone) m.phones.push_back(phone);
    m.duration_ms = std::stod(duration);
    metas.push_back(std::move(m));
    n_frames.push_back(std::stoi(frames));
  }

  std::ifstream feat(feat_path, std::ios::binary);
  if (!feat) throw std::runtime_error("cannot open " + feat_path);
  char magic[4];
  feat.read(magic, 4);
  if (!feat || std::memcmp(magic, "AWE1", 4) != 0)
    throw std::runtime_error("bad feature file magic (expected AWE1)");
  const auto D = ReadLe<std::uint32_t>(feat);
  std::vector<Segment> segments;
  for (std::size_t i = 0; i < metas.size(); ++i) {
    const auto T = ReadLe<std::uint32_t>(feat);
    if (static_cast<int>(T) != n_frames[i])
      throw std::runtime_error("frame count mismatch between metadata and features");
    Mat f(static_cast<int>(T), static_cast<int>(D));
    for (std::uint32_t t = 0; t < T; ++t)
      for (std::uint32_t d = 0; d < D; ++d) f(t, d) = ReadLe<float>(feat);
    Segment seg;
    seg.frames = std::move(f);
    seg.meta = metas[i];
    segments.push_back(std::move(seg));
  }
  return Corpus(std::move(segments));
}

void SaveClusters(const DiscoveredClusters& clusters, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  out << "pseudo_label\tsegment_id\tstart\tend\n";
  for (const auto& [label, spans] : clusters.clusters)
    for (const SegmentSpan& s : spans)
      out << label << '\t' << s.segment_id << '\t' << s.start << '\t' << s.end << '\n';
}

DiscoveredClusters LoadClusters(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::string line;
  std::getline(in, line);  // header
  std::map<std::string, std::vector<SegmentSpan>> by_label;
  std::vector<std::string> order;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string label, id, start, end;
    std::getline(ss, label, '\t');
    std::getline(ss, id, '\t');
    std::getline(ss, start, '\t');
    std::getline(ss, end, '\t');
    if (by_label.find(label) == by_label.end()) order.push_back(label);
    by_label[label].push_back(SegmentSpan{std::stoi(id), std::stoi(start), std::stoi(end)});
  }
  DiscoveredClusters out;
  for (const std::string& label : order) out.clusters.emplace_back(label, by_label[label]);
  return out;
}

Segment MaterializeSpan(const Corpus& corpus, const SegmentSpan& span,
                        const std::string& pseudo_label) {
  const Segment& src = corpus.segment(span.segment_id);
  if (span.start < 0 || span.end > src.NumFrames() || span.end - span.start < 2)
    throw std::invalid_argument("invalid segment span");
  Segment out;
  out.frames = src.frames.middleRows(span.start, span.end - span.start);
  out.meta = src.meta;
  out.meta.word = pseudo_label;
  out.meta.duration_ms = (span.end - span.start) * kFrameMs;
  return out;
}

}  // namespace awe
