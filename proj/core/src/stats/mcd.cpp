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

#include "semivc/align.hpp"
#include "semivc/error.hpp"
#include "semivc/stats.hpp"

namespace semivc {

McdPair make_mcd_pair(const FeatureSequence& converted, const FeatureSequence& reference,
                      bool align) {
  if (converted.dims() != reference.dims()) throw InputError("mcd: dimension mismatch");
  if (!align) {
    if (converted.frames() != reference.frames()) {
      throw InputError("mcd without alignment requires equal frame counts");
    }
    return McdPair{converted.mcep, reference.mcep};
  }
  const Eigen::MatrixXd a = converted.mcep.cast<double>();
  const Eigen::MatrixXd b = reference.mcep.cast<double>();
  const DtwResult r = dtw(a, b);
  const AlignedPair warped = warp_target(converted, reference, r.path);
  return McdPair{converted.mcep, warped.y_warped.mcep};
}

}  // namespace semivc
