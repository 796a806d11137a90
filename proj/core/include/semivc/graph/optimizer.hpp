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
#include <vector>

#include "semivc/graph/params.hpp"

namespace semivc::graph {

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double clip_norm = 5.0;  // global L2 norm, applied before the moment update
};

struct AdamState {
  AdamConfig config;
  std::vector<Matrix> first;
  std::vector<Matrix> second;
  std::int64_t steps = 0;
  std::int64_t skipped = 0;  // steps rejected for non-finite gradients
};

// One adaptive-moment update over `params` in their stored order. Gradients
// are consumed (zeroed) whether or not the step was applied. Returns false
// when the step was skipped because a gradient was not finite.
bool sgd_step(ParamSet& params, AdamState& state, double lr);

double global_grad_norm(const ParamSet& params);

}  // namespace semivc::graph
