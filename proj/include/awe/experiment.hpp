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

#ifndef AWE_EXPERIMENT_HPP_
#define AWE_EXPERIMENT_HPP_

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "awe/corpus.hpp"
#include "awe/eval.hpp"
#include "awe/models.hpp"

namespace awe {

// Error carrying the pipeline stage that failed; partial outputs remain on
// disk.
class StageError : public std::runtime_error {
 public:
  StageError(std::string stage, const std::string& message)
      : std::runtime_error("[" + stage + "] " + message), stage_(std::move(stage)) {}
  const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
};

struct ExperimentModel {
  std::string name;
  ModelConfig config;
  bool utd = false;  // trained per zero-resource language on simulated UTD output
};

// Flat key = value config with [section] headers; lists comma-separated.
// Sections: [experiment], [corpus], [train], [utd], [model.NAME]...
struct ExperimentConfig {
  std::string output_dir = "out";
  std::uint64_t seed = 0;
  std::vector<std::string> training_languages;
  std::vector<std::string> zero_resource_languages;
  SameDiffMode eval_mode = SameDiffMode::kCrossSpeaker;
  std::vector<std::string> baselines;  // subset of {downsample, dtw}
  std::vector<std::string> probes;     // subset of {duration, speaker, language, edit_distance, pca}
  std::vector<int> language_ladder;    // optional counts of training languages
  bool noise_ladder = false;           // run UTD models under the four flag pairs
  int downsample_keep = 10;
  int cae_pairs = 0;  // supervised CAE pair sample size; 0 = all pairs once

  std::optional<SyntheticSpec> corpus_spec;
  std::string corpus_meta_path, corpus_feat_path;  // alternative to generation

  CorruptionConfig utd;
  TrainConfig train;
  std::vector<ExperimentModel> models;

  static ExperimentConfig ParseFile(const std::string& path);
  static ExperimentConfig ParseText(const std::string& text);
  void Validate() const;
};

struct ManifestEntry {
  std::string file;  // path relative to output_dir
  std::string hash;  // fnv1a-64, hex
};

// Full pipeline: corpus -> training -> embedding -> same-different AP ->
// probes -> manifest. Deterministic given the global seed (single-threaded).
// Returns the manifest, which is also written to <output_dir>/manifest.tsv.
std::vector<ManifestEntry> RunExperiment(const ExperimentConfig& config);

// FNV-1a 64-bit over a file's bytes, lowercase hex.
std::string HashFile(const std::string& path);

// Parallelism cap: AWE_THREADS env var, default 1.
int ThreadBudget();

}  // namespace awe

#endif  // AWE_EXPERIMENT_HPP_
