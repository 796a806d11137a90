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

#include "semivc/harness/manifest.hpp"

namespace semivc::harness {

struct SynthSpec {
  int train_pairs = 100;
  int source_only = 60;
  int target_only = 60;
  int validation_pairs = 10;
  int test_pairs = 10;
  int min_frames = 60;
  int max_frames = 100;
  int latent_dim = 8;
  int hidden = 32;
  int mcep_dims = kNumMcep;
  double coef_scale = 0.16;   // typical per-coefficient spread of the maps
  double noise_std = 0.02;    // additive observation noise
  double offset_std = 1.5;    // per-utterance latent mean shift (prompt variety)
  double map_correlation = 0.95;  // weight correlation between the speaker maps
  std::uint64_t seed = 1;

  void validate() const;
};

struct SynthCorpus {
  std::filesystem::path manifest;
  std::filesystem::path truth;
  DatasetManifest entries;
};

// Writes source/<stem>.vcf, target/<stem>.vcf, manifest.txt and truth.txt
// under `out_dir`. Latents follow a stable order-2 autoregression; each
// speaker is a fixed random two-layer tanh map of the latent plus noise.
// Paired entries share one latent sequence; every other utterance gets its
// own. truth.txt records which files share a latent and is meant only for
// evaluation.
SynthCorpus generate_synthetic_corpus(const SynthSpec& spec, const std::filesystem::path& out_dir);

}  // namespace semivc::harness
