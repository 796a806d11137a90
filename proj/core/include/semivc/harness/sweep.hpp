// Copyright 2026 The semivc Authors. All Rights Reserved.
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

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "semivc/align.hpp"
#include "semivc/harness/config.hpp"
#include "semivc/harness/manifest.hpp"
#include "semivc/ssvc.hpp"

namespace semivc::harness {

// Architecture and optimizer settings shared by every trained cell.
struct RunSettings {
  ssvc::ModelConfig model;
  double learning_rate = 3e-3;
  int steps_per_epoch = 100;
  int max_epochs = 20;
  int patience = 5;
  int chunk_frames = 600;
  int jobs = 1;         // worker threads over independent cells
  bool timing = false;  // fill train_seconds (makes the CSV non-reproducible)

  // Smaller defaults than ModelConfig so a full sweep fits in minutes.
  RunSettings();
  static RunSettings from_config(const KeyValueConfig& cfg);
  void validate() const;
};

// Data of one training run. Paired targets are already warped onto their
// source timeline.
struct CellData {
  std::vector<std::pair<FeatureSequence, FeatureSequence>> paired;
  std::vector<FeatureSequence> source_only;
  std::vector<FeatureSequence> target_only;
};

// Aligns a raw pair by DTW over mcep and warps the target onto the source.
std::pair<FeatureSequence, FeatureSequence> align_pair(const FeatureSequence& x,
                                                       const FeatureSequence& y);

struct TrainedCell {
  ssvc::SsVcModel model;
  ssvc::TrainResult result;
};

// Fits speaker statistics on the cell's own utterances, normalizes, trains
// and returns the model with statistics attached. Deterministic in `seed`.
TrainedCell train_cell(const CellData& data, const std::vector<ssvc::ValidationPair>& validation,
                       ssvc::Method method, const RunSettings& settings, std::uint64_t seed);

// Features of a manifest, loaded once.
struct LoadedCorpus {
  std::vector<std::pair<FeatureSequence, FeatureSequence>> train_pairs;  // aligned
  std::vector<FeatureSequence> source_only;
  std::vector<FeatureSequence> target_only;
  std::vector<ssvc::ValidationPair> validation;
  std::vector<ssvc::ValidationPair> test;

  static LoadedCorpus load(const DatasetManifest& manifest);
};

struct SweepSpec {
  int total_budget = 100;
  std::vector<int> parallel_counts = {1, 10, 100};
  int repeats = 3;
  std::uint64_t seed = 1;

  void validate() const;
};

struct NonParallelSpec {
  int n_parallel = 1;
  std::vector<int> counts = {0, 10, 50, 100};
  int repeats = 3;
  std::uint64_t seed = 1;
  bool supervised_reference = true;  // add dblstm / dblstm_vae rows on the same pairs

  void validate() const;
};

struct ResultRow {
  std::string method;
  int n_parallel = 0;
  int n_nonparallel = 0;
  int repeat = 0;
  double test_mcd_db = 0.0;
  std::optional<double> train_seconds;
};

// For each parallel count n: the supervised baseline and the variational
// model on n pairs, and the semi-supervised model on the same n pairs plus
// budget - n unpaired utterances split evenly between the speakers.
std::vector<ResultRow> run_parallel_sweep(const LoadedCorpus& corpus, const SweepSpec& spec,
                                          const RunSettings& settings);

// One fixed pair set, growing unpaired sets (nested across counts).
std::vector<ResultRow> run_nonparallel_sweep(const LoadedCorpus& corpus,
                                             const NonParallelSpec& spec,
                                             const RunSettings& settings);

void write_results_csv(const std::filesystem::path& path, const std::vector<ResultRow>& rows);
std::string results_csv(const std::vector<ResultRow>& rows);
std::vector<ResultRow> read_results_csv(const std::filesystem::path& path);

}  // namespace semivc::harness
