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

#include <algorithm>
#include <cmath>
#include <limits>

#include "semivc/align.hpp"
#include "semivc/error.hpp"

namespace semivc {

void WarpPath::validate(int source_frames, int target_frames) const {
  if (steps.empty()) throw InputError("empty warp path");
  if (steps.front() != std::pair{0, 0}) throw InputError("warp path must start at (0,0)");
  if (steps.back() != std::pair{source_frames - 1, target_frames - 1}) {
    throw InputError("warp path must end at (Tx-1, Ty-1)");
  }
  for (std::size_t k = 1; k < steps.size(); ++k) {
    const int di = steps[k].first - steps[k - 1].first;
    const int dj = steps[k].second - steps[k - 1].second;
    if (di < 0 || dj < 0 || di > 1 || dj > 1 || (di == 0 && dj == 0)) {
      throw InputError("warp path step " + std::to_string(k) + " is not a unit monotone step");
    }
  }
}

double local_cost(const Eigen::MatrixXd& x, int i, const Eigen::MatrixXd& y, int j,
                  DistanceKind metric) {
  const double sq = (x.row(i) - y.row(j)).squaredNorm();
  return metric == DistanceKind::kSquaredEuclidean ? sq : std::sqrt(sq);
}

DtwResult dtw(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y, const DtwOptions& opts) {
  const int tx = static_cast<int>(x.rows());
  const int ty = static_cast<int>(y.rows());
  if (tx < 1 || ty < 1) throw InputError("dtw requires non-empty sequences");
  if (x.cols() != y.cols()) {
    throw InputError("dtw dimension mismatch: " + std::to_string(x.cols()) + " vs " +
                     std::to_string(y.cols()));
  }
  const auto in_band = [&](int i, int j) {
    if (!opts.band_radius) return true;
    // Band follows the straight line between the corners.
    const double center = tx > 1 ? static_cast<double>(i) * (ty - 1) / (tx - 1) : 0.0;
    return std::abs(j - center) <= *opts.band_radius + 0.5;
  };

  constexpr double kInf = std::numeric_limits<double>::infinity();
  Eigen::MatrixXd acc = Eigen::MatrixXd::Constant(tx, ty, kInf);
  for (int i = 0; i < tx; ++i) {
    for (int j = 0; j < ty; ++j) {
      if (!in_band(i, j)) continue;
      double prev;
      if (i == 0 && j == 0) {
        prev = 0.0;
      } else {
        prev = kInf;
        if (i > 0 && j > 0) prev = acc(i - 1, j - 1);
        if (i > 0) prev = std::min(prev, acc(i - 1, j));
        if (j > 0) prev = std::min(prev, acc(i, j - 1));
      }
      if (prev == kInf) continue;
      acc(i, j) = prev + local_cost(x, i, y, j, opts.metric);
    }
  }
  if (acc(tx - 1, ty - 1) == kInf) throw InputError("dtw band too narrow to connect endpoints");

  DtwResult result;
  result.cost = acc(tx - 1, ty - 1);
  int i = tx - 1, j = ty - 1;
  result.path.steps.emplace_back(i, j);
  while (i > 0 || j > 0) {
    const double diag = (i > 0 && j > 0) ? acc(i - 1, j - 1) : kInf;
    const double up = i > 0 ? acc(i - 1, j) : kInf;
    const double left = j > 0 ? acc(i, j - 1) : kInf;
    if (diag <= up && diag <= left) {
      --i;
      --j;
    } else if (up <= left) {
      --i;
    } else {
      --j;
    }
    result.path.steps.emplace_back(i, j);
  }
  std::reverse(result.path.steps.begin(), result.path.steps.end());
  return result;
}

FeatureSequence gather_frames(const FeatureSequence& fs, const std::vector<int>& rows) {
  FeatureSequence out;
  const auto t = static_cast<int>(rows.size());
  out.mcep.resize(t, fs.dims());
  out.c0.resize(t);
  out.f0.resize(t);
  out.ap.resize(t);
  for (int k = 0; k < t; ++k) {
    const int r = rows[k];
    out.mcep.row(k) = fs.mcep.row(r);
    out.c0[k] = fs.c0[r];
    out.f0[k] = fs.f0[r];
    out.ap[k] = fs.ap[r];
  }
  out.frame_hop = fs.frame_hop;
  out.flags = fs.flags;
  return out;
}

AlignedPair warp_target(const FeatureSequence& x, const FeatureSequence& y, const WarpPath& path) {
  path.validate(x.frames(), y.frames());
  std::vector<int> rows(x.frames(), -1);
  for (const auto& [i, j] : path.steps) {
    // Steps are monotone, so the first visit also carries the smallest j.
    if (rows[i] < 0) rows[i] = j;
  }
  return AlignedPair{x, gather_frames(y, rows), path};
}

}  // namespace semivc
