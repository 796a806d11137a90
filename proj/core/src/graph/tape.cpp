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

#include "semivc/graph/tape.hpp"

#include <stdexcept>

#include "semivc/error.hpp"

namespace semivc::graph {

void Tensor::accumulate(const Matrix& delta) {
  if (!has_grad()) zero_grad();
  grad += delta;
}

Var Tape::constant(Matrix value) {
  nodes_.push_back(Node{std::move(value), {}, {}, nullptr, false});
  return Var{nodes_.size() - 1};
}

Var Tape::parameter(Tensor& param) {
  nodes_.push_back(Node{param.value, {}, {}, &param, true});
  return Var{nodes_.size() - 1};
}

std::vector<Var> Tape::bind(ParamSet& params) {
  std::vector<Var> vars;
  vars.reserve(params.size());
  for (std::size_t i = 0; i < params.size(); ++i) vars.push_back(parameter(params[i]));
  return vars;
}

Var Tape::record(Matrix value, std::initializer_list<Var> inputs, Backward backward) {
  bool needs = false;
  for (Var v : inputs) needs = needs || nodes_[v.id].requires_grad;
  nodes_.push_back(Node{std::move(value), {}, needs ? std::move(backward) : Backward{}, nullptr,
                        needs});
  return Var{nodes_.size() - 1};
}

double Tape::scalar(Var v) const {
  const Matrix& m = nodes_[v.id].value;
  if (m.rows() != 1 || m.cols() != 1) throw InputError("tape: value is not a scalar");
  return m(0, 0);
}

void Tape::accumulate(Var v, const Matrix& delta) {
  Node& n = nodes_[v.id];
  if (!n.requires_grad) return;
  if (n.grad.size() == 0) {
    n.grad = delta;
  } else {
    n.grad += delta;
  }
}

void Tape::backward(Var root) {
  if (value(root).size() != 1) throw InputError("backward: root must be a 1x1 value");
  if (!nodes_[root.id].requires_grad) return;
  nodes_[root.id].grad = Matrix::Ones(1, 1);
  for (std::size_t i = root.id + 1; i-- > 0;) {
    Node& n = nodes_[i];
    if (n.grad.size() == 0) continue;
    if (n.backward) {
      // The closure may append to other nodes' grads but never to nodes_.
      n.backward(*this, n.grad);
    }
    if (n.param) n.param->accumulate(n.grad);
  }
}

}  // namespace semivc::graph
