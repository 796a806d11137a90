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

#include <cmath>

#include "semivc/error.hpp"
#include "semivc/graph/ops.hpp"

namespace semivc::graph {
namespace {

inline Eigen::RowVectorXd logistic(const Eigen::RowVectorXd& v) {
  return (1.0 / (1.0 + (-v.array()).exp())).matrix();
}

}  // namespace

Var gru(Tape& tape, Var x, Var wx, Var wh, Var b, bool reverse) {
  const Matrix& X = tape.value(x);
  const Matrix& Wx = tape.value(wx);
  const Matrix& Wh = tape.value(wh);
  const Matrix& B = tape.value(b);
  const Eigen::Index h_dim = Wh.rows();
  if (Wx.rows() != X.cols() || Wx.cols() != 3 * h_dim || Wh.cols() != 3 * h_dim ||
      B.rows() != 1 || B.cols() != 3 * h_dim) {
    throw InputError("gru: parameter shapes do not match input and hidden sizes");
  }
  const Eigen::Index steps = X.rows();

  Matrix pre = X * Wx;
  pre.rowwise() += B.row(0);

  Matrix z(steps, h_dim), r(steps, h_dim), n(steps, h_dim), h_prev(steps, h_dim);
  Matrix out(steps, h_dim);
  Eigen::RowVectorXd h = Eigen::RowVectorXd::Zero(h_dim);
  for (Eigen::Index s = 0; s < steps; ++s) {
    const Eigen::Index t = reverse ? steps - 1 - s : s;
    h_prev.row(t) = h;
    const Eigen::RowVectorXd hzr = h * Wh.leftCols(2 * h_dim);
    const Eigen::RowVectorXd zt = logistic(pre.row(t).head(h_dim) + hzr.head(h_dim));
    const Eigen::RowVectorXd rt = logistic(pre.row(t).segment(h_dim, h_dim) + hzr.tail(h_dim));
    const Eigen::RowVectorXd nt =
        (pre.row(t).tail(h_dim) + rt.cwiseProduct(h) * Wh.rightCols(h_dim)).array().tanh().matrix();
    h = (1.0 - zt.array()).matrix().cwiseProduct(nt) + zt.cwiseProduct(h);
    z.row(t) = zt;
    r.row(t) = rt;
    n.row(t) = nt;
    out.row(t) = h;
  }

  return tape.record(
      std::move(out), {x, wx, wh, b},
      [=, z = std::move(z), r = std::move(r), n = std::move(n),
       h_prev = std::move(h_prev)](Tape& t, const Matrix& g) {
        const Matrix& Wx_ = t.value(wx);
        const Matrix& Wh_ = t.value(wh);
        const auto uz = Wh_.leftCols(h_dim);
        const auto ur = Wh_.middleCols(h_dim, h_dim);
        const auto un = Wh_.rightCols(h_dim);
        Matrix d_pre(steps, 3 * h_dim);
        Eigen::RowVectorXd dh_next = Eigen::RowVectorXd::Zero(h_dim);
        for (Eigen::Index s = steps; s-- > 0;) {
          const Eigen::Index k = reverse ? steps - 1 - s : s;
          const auto zt = z.row(k).array();
          const auto rt = r.row(k).array();
          const auto nt = n.row(k).array();
          const auto hp = h_prev.row(k).array();
          const Eigen::RowVectorXd dh_row = g.row(k) + dh_next;
          const auto dh = dh_row.array();

          const Eigen::RowVectorXd d_pre_n = (dh * (1.0 - zt) * (1.0 - nt.square())).matrix();
          const Eigen::RowVectorXd d_hr = d_pre_n * un.transpose();
          const Eigen::RowVectorXd d_pre_z = (dh * (hp - nt) * zt * (1.0 - zt)).matrix();
          const Eigen::RowVectorXd d_pre_r = (d_hr.array() * hp * rt * (1.0 - rt)).matrix();

          dh_next = (dh * zt + d_hr.array() * rt).matrix() + d_pre_z * uz.transpose() +
                    d_pre_r * ur.transpose();
          d_pre.row(k) << d_pre_z, d_pre_r, d_pre_n;
        }
        if (t.requires_grad(wh)) {
          Matrix d_wh(h_dim, 3 * h_dim);
          d_wh.leftCols(h_dim).noalias() = h_prev.transpose() * d_pre.leftCols(h_dim);
          d_wh.middleCols(h_dim, h_dim).noalias() =
              h_prev.transpose() * d_pre.middleCols(h_dim, h_dim);
          d_wh.rightCols(h_dim).noalias() =
              r.cwiseProduct(h_prev).transpose() * d_pre.rightCols(h_dim);
          t.accumulate(wh, d_wh);
        }
        if (t.requires_grad(wx)) t.accumulate(wx, t.value(x).transpose() * d_pre);
        if (t.requires_grad(b)) t.accumulate(b, d_pre.colwise().sum());
        if (t.requires_grad(x)) t.accumulate(x, d_pre * Wx_.transpose());
      });
}

}  // namespace semivc::graph
