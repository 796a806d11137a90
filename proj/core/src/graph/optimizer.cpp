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

#include "semivc/graph/optimizer.hpp"

#include <cmath>

namespace semivc::graph {

double global_grad_norm(const ParamSet& params) {
  double sq = 0.0;
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (params[i].has_grad()) sq += params[i].grad.squaredNorm();
  }
  return std::sqrt(sq);
}

bool sgd_step(ParamSet& params, AdamState& state, double lr) {
  const AdamConfig& cfg = state.config;
  if (state.first.size() != params.size()) {
    state.first.clear();
    state.second.clear();
    for (std::size_t i = 0; i < params.size(); ++i) {
      state.first.push_back(Matrix::Zero(params[i].rows(), params[i].cols()));
      state.second.push_back(Matrix::Zero(params[i].rows(), params[i].cols()));
    }
  }

  const double norm = global_grad_norm(params);
  if (!std::isfinite(norm)) {
    ++state.skipped;
    params.zero_grad();
    return false;
  }
  const double clip = (cfg.clip_norm > 0.0 && norm > cfg.clip_norm) ? cfg.clip_norm / norm : 1.0;

  ++state.steps;
  const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.steps));
  const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.steps));
  for (std::size_t i = 0; i < params.size(); ++i) {
    Tensor& p = params[i];
    if (!p.has_grad()) continue;
    const Matrix g = p.grad * clip;
    state.first[i] = cfg.beta1 * state.first[i] + (1.0 - cfg.beta1) * g;
    state.second[i] = cfg.beta2 * state.second[i] + (1.0 - cfg.beta2) * g.cwiseProduct(g);
    p.value.array() -= lr * (state.first[i].array() / bc1) /
                       ((state.second[i].array() / bc2).sqrt() + cfg.epsilon);
  }
  params.zero_grad();
  return true;
}

}  // namespace semivc::graph
