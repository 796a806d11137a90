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

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "semivc/features.hpp"

namespace semivc::harness {

struct UtterancePair {
  std::filesystem::path source;
  std::filesystem::path target;
};

struct SplitEntries {
  std::vector<UtterancePair> paired;
  std::vector<std::filesystem::path> source_only;
  std::vector<std::filesystem::path> target_only;

  std::size_t size() const { return paired.size() + source_only.size() + target_only.size(); }
};

// Line format:
//   split <name>          following entries belong to <name> (default: train)
//   paired <src> <tgt>
//   source <path>
//   target <path>
// Relative paths resolve against the manifest's directory.
struct DatasetManifest {
  std::map<std::string, SplitEntries> splits;

  // Empty entries when the split is absent.
  const SplitEntries& split(const std::string& name) const;

  // Rejects an utterance listed in more than one split and a prompt stem
  // shared by source-only and target-only entries.
  void validate() const;

  static DatasetManifest parse(const std::string& text, const std::filesystem::path& base_dir);
  static DatasetManifest load(const std::filesystem::path& path);
  // Paths are written relative to the manifest's directory when possible.
  void save(const std::filesystem::path& path) const;
};

// Prompt identifier of an utterance: its file name without extension.
std::string prompt_stem(const std::filesystem::path& path);

// Reads a feature container, or extracts features from a .wav file.
FeatureSequence load_utterance(const std::filesystem::path& path, const FrameConfig& cfg = {});

}  // namespace semivc::harness
