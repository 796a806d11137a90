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

#include <cstddef>
#include <functional>
#include <vector>

#include "semivc/graph/params.hpp"
#include "semivc/graph/tensor.hpp"

namespace semivc::graph {

class Tape;

// Handle to a value recorded on a Tape.
struct Var {
  std::size_t id = 0;
};

// Reverse-mode tape. Each recorded node holds its value and, when any input
// needs a gradient, a closure that pushes the node's gradient to its inputs.
class Tape {
 public:
  using Backward = std::function<void(Tape&, const Matrix& out_grad)>;

  Var constant(Matrix value);
  // Gradients reaching this node are added to `param.grad` by backward().
  Var parameter(Tensor& param);
  // One Var per parameter, in ParamSet order.
  std::vector<Var> bind(ParamSet& params);

  Var record(Matrix value, std::initializer_list<Var> inputs, Backward backward);

  const Matrix& value(Var v) const { return nodes_[v.id].value; }
  double scalar(Var v) const;
  bool requires_grad(Var v) const { return nodes_[v.id].requires_grad; }

  // Adds `delta` to the gradient of `v` if it participates in differentiation.
  void accumulate(Var v, const Matrix& delta);
  const Matrix& grad(Var v) const { return nodes_[v.id].grad; }

  // Seeds d(root)/d(root) = 1 for a 1x1 root and runs all closures in reverse.
  void backward(Var root);

  std::size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    Matrix value;
    Matrix grad;
    Backward backward;
    Tensor* param = nullptr;
    bool requires_grad = false;
  };
  std::vector<Node> nodes_;
};

}  // namespace semivc::graph
