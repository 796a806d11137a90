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

namespace semivc::graph {

using Matrix = Eigen::MatrixXd;

// A 2-D value with an optional same-shape gradient accumulator. Vectors are
// stored as 1 x N rows.
struct Tensor {
  Matrix value;
  Matrix grad;  // empty until first accumulation

  Eigen::Index rows() const { return value.rows(); }
  Eigen::Index cols() const { return value.cols(); }
  bool has_grad() const { return grad.size() != 0; }

  void zero_grad() { grad.setZero(value.rows(), value.cols()); }
  void accumulate(const Matrix& delta);
};

}  // namespace semivc::graph
