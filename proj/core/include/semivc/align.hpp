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
#include <optional>
#include <utility>
#include <vector>

#include "semivc/features.hpp"

namespace semivc {

// (source frame, target frame) visits, from (0,0) to (Tx-1, Ty-1).
struct WarpPath {
  std::vector<std::pair<int, int>> steps;

  // Throws InputError unless the path is a valid monotone unit-step path for
  // sequences of the given lengths.
  void validate(int source_frames, int target_frames) const;
};

enum class DistanceKind { kSquaredEuclidean, kEuclidean };

struct DtwOptions {
  DistanceKind metric = DistanceKind::kSquaredEuclidean;
  // Sakoe-Chiba band half-width in frames; empty means unconstrained.
  std::optional<int> band_radius;
};

struct DtwResult {
  WarpPath path;
  double cost = 0.0;  // accumulated local cost along `path`
};

// Minimum-cost alignment under the symmetric step set {(1,0),(0,1),(1,1)}.
// Backtrace ties prefer the diagonal, then (i-1,j), then (i,j-1).
DtwResult dtw(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y, const DtwOptions& opts = {});

double local_cost(const Eigen::MatrixXd& x, int i, const Eigen::MatrixXd& y, int j,
                  DistanceKind metric);

struct AlignedPair {
  FeatureSequence x;
  FeatureSequence y_warped;  // on the source timeline
  WarpPath path;
};

// For each source frame i, picks the target frame of the first path step
// that visits i. All tracks are warped consistently.
AlignedPair warp_target(const FeatureSequence& x, const FeatureSequence& y, const WarpPath& path);

// Selects target frames by index, applied to every track.
FeatureSequence gather_frames(const FeatureSequence& fs, const std::vector<int>& rows);

}  // namespace semivc
