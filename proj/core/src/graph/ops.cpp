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

#include "semivc/graph/ops.hpp"

#include <cmath>

#include "semivc/error.hpp"

namespace semivc::graph {
namespace {

void require(bool ok, const char* what) {
  if (!ok) throw InputError(what);
}

}  // namespace

Var affine(Tape& tape, Var x, Var w, Var b) {
  const Matrix& X = tape.value(x);
  const Matrix& W = tape.value(w);
  const Matrix& B = tape.value(b);
  require(X.cols() == W.rows(), "affine: x columns must match W rows");
  require(B.rows() == 1 && B.cols() == W.cols(), "affine: bias must be 1 x O");
  Matrix y = X * W;
  y.rowwise() += B.row(0);
  return tape.record(std::move(y), {x, w, b}, [x, w, b](Tape& t, const Matrix& g) {
    if (t.requires_grad(x)) t.accumulate(x, g * t.value(w).transpose());
    if (t.requires_grad(w)) t.accumulate(w, t.value(x).transpose() * g);
    if (t.requires_grad(b)) t.accumulate(b, g.colwise().sum());
  });
}

Var add(Tape& tape, Var a, Var b) {
  require(tape.value(a).rows() == tape.value(b).rows() &&
              tape.value(a).cols() == tape.value(b).cols(),
          "add: shape mismatch");
  return tape.record(tape.value(a) + tape.value(b), {a, b}, [a, b](Tape& t, const Matrix& g) {
    t.accumulate(a, g);
    t.accumulate(b, g);
  });
}

Var scale(Tape& tape, Var a, double factor) {
  return tape.record(tape.value(a) * factor, {a},
                     [a, factor](Tape& t, const Matrix& g) { t.accumulate(a, g * factor); });
}

Var tanh(Tape& tape, Var a) {
  Matrix y = tape.value(a).array().tanh().matrix();
  Matrix deriv = (1.0 - y.array().square()).matrix();
  return tape.record(std::move(y), {a}, [a, d = std::move(deriv)](Tape& t, const Matrix& g) {
    t.accumulate(a, g.cwiseProduct(d));
  });
}

Var sigmoid(Tape& tape, Var a) {
  Matrix y = (1.0 / (1.0 + (-tape.value(a).array()).exp())).matrix();
  Matrix deriv = (y.array() * (1.0 - y.array())).matrix();
  return tape.record(std::move(y), {a}, [a, d = std::move(deriv)](Tape& t, const Matrix& g) {
    t.accumulate(a, g.cwiseProduct(d));
  });
}

Var clamp(Tape& tape, Var a, double lo, double hi) {
  const Matrix& x = tape.value(a);
  Matrix y = x.cwiseMax(lo).cwiseMin(hi);
  Matrix pass = ((x.array() >= lo) && (x.array() <= hi)).cast<double>().matrix();
  return tape.record(std::move(y), {a}, [a, p = std::move(pass)](Tape& t, const Matrix& g) {
    t.accumulate(a, g.cwiseProduct(p));
  });
}

Var concat_cols(Tape& tape, Var a, Var b) {
  const Matrix& A = tape.value(a);
  const Matrix& B = tape.value(b);
  require(A.rows() == B.rows(), "concat_cols: row mismatch");
  Matrix y(A.rows(), A.cols() + B.cols());
  y << A, B;
  const Eigen::Index split = A.cols();
  return tape.record(std::move(y), {a, b}, [a, b, split](Tape& t, const Matrix& g) {
    t.accumulate(a, g.leftCols(split));
    t.accumulate(b, g.rightCols(g.cols() - split));
  });
}

Var sum(Tape& tape, Var a) {
  const Eigen::Index r = tape.value(a).rows(), c = tape.value(a).cols();
  return tape.record(Matrix::Constant(1, 1, tape.value(a).sum()), {a},
                     [a, r, c](Tape& t, const Matrix& g) {
                       t.accumulate(a, Matrix::Constant(r, c, g(0, 0)));
                     });
}

Var squared_error(Tape& tape, Var prediction, const Matrix& target) {
  const Matrix& p = tape.value(prediction);
  require(p.rows() == target.rows() && p.cols() == target.cols(),
          "squared_error: shape mismatch");
  Matrix diff = p - target;
  const double value = diff.squaredNorm();
  return tape.record(Matrix::Constant(1, 1, value), {prediction},
                     [prediction, d = std::move(diff)](Tape& t, const Matrix& g) {
                       t.accumulate(prediction, d * (2.0 * g(0, 0)));
                     });
}

Var birnn(Tape& tape, Var x, const BiGruVars& cell) {
  const Var f = gru(tape, x, cell.fwd_wx, cell.fwd_wh, cell.fwd_b, false);
  const Var b = gru(tape, x, cell.bwd_wx, cell.bwd_wh, cell.bwd_b, true);
  return concat_cols(tape, f, b);
}

Var gaussian_sample(Tape& tape, Var mean, Var log_var, const Matrix& eps) {
  require(tape.value(mean).rows() == tape.value(log_var).rows() &&
              tape.value(mean).cols() == tape.value(log_var).cols(),
          "gaussian_sample: mean/log_var shape mismatch");
  // clamp appends to the tape, so take references only afterwards.
  const Var lv = clamp(tape, log_var, kLogVarMin, kLogVarMax);
  const Matrix& mu = tape.value(mean);
  require(eps.rows() == mu.rows() && eps.cols() == mu.cols(), "gaussian_sample: eps shape");
  Matrix sd = (0.5 * tape.value(lv).array()).exp().matrix();
  Matrix noise_term = sd.cwiseProduct(eps);
  Matrix z = mu + noise_term;
  return tape.record(std::move(z), {mean, lv},
                     [mean, lv, n = std::move(noise_term)](Tape& t, const Matrix& g) {
                       t.accumulate(mean, g);
                       // d/dlv [exp(lv/2) eps] = 0.5 exp(lv/2) eps
                       t.accumulate(lv, 0.5 * g.cwiseProduct(n));
                     });
}

Var gaussian_sample(Tape& tape, Var mean, Var log_var, RngState& rng) {
  const Matrix eps = rng.normal_matrix(tape.value(mean).rows(), tape.value(mean).cols());
  return gaussian_sample(tape, mean, log_var, eps);
}

Var kl_to_standard_normal(Tape& tape, Var mean, Var log_var) {
  require(tape.value(mean).rows() == tape.value(log_var).rows() &&
              tape.value(mean).cols() == tape.value(log_var).cols(),
          "kl_to_standard_normal: shape mismatch");
  const Var lv = clamp(tape, log_var, kLogVarMin, kLogVarMax);
  const Matrix& mu = tape.value(mean);
  const Matrix& l = tape.value(lv);
  const double value = 0.5 * (l.array().exp() + mu.array().square() - 1.0 - l.array()).sum();
  return tape.record(Matrix::Constant(1, 1, value), {mean, lv},
                     [mean, lv](Tape& t, const Matrix& g) {
                       const double s = g(0, 0);
                       t.accumulate(mean, t.value(mean) * s);
                       t.accumulate(lv, (0.5 * s) * (t.value(lv).array().exp() - 1.0).matrix());
                     });
}

}  // namespace semivc::graph
