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

#include <Eigen/Core>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "semivc/features.hpp"

namespace semivc {

inline constexpr double kStdFloor = 1e-6;

struct SpeakerStats {
  Eigen::VectorXd mcep_mean;
  Eigen::VectorXd mcep_std;
  double logf0_mean = 0.0;
  double logf0_std = 1.0;

  // Keyed text form, exact for doubles.
  std::string to_text() const;
  static SpeakerStats from_text(const std::string& text);

  bool operator==(const SpeakerStats& other) const;
};

// MCEP moments over all frames, log-F0 moments over voiced frames only.
// Population (1/N) variances, floored at kStdFloor.
SpeakerStats fit_stats(std::span<const FeatureSequence> corpus);

// Per-coefficient z-score of the mcep block; other tracks are untouched.
FeatureSequence normalize(const FeatureSequence& fs, const SpeakerStats& s);
FeatureSequence denormalize(const FeatureSequence& fs, const SpeakerStats& s);

// Log-Gaussian F0 mapping; unvoiced frames stay 0.
std::vector<float> convert_f0(std::span<const float> f0, const SpeakerStats& src,
                              const SpeakerStats& tgt);

// Mean over frames of (10/ln10) * sqrt(2 * sum_d (a_d - b_d)^2), in dB.
double mcd(const FrameMatrix& a, const FrameMatrix& b);

struct McdPair {
  FrameMatrix converted;
  FrameMatrix reference;
};

// Frame-weighted mean of per-pair MCD.
double corpus_mcd(std::span<const McdPair> pairs);

// Pair for corpus_mcd. When `align` is set the reference is DTW-warped onto
// the converted timeline first; otherwise both must already have equal length.
McdPair make_mcd_pair(const FeatureSequence& converted, const FeatureSequence& reference,
                      bool align);

void write_stats(const std::filesystem::path& path, const SpeakerStats& s);
SpeakerStats read_stats(const std::filesystem::path& path);

}  // namespace semivc
