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

#include "semivc/graph/rng.hpp"
#include "semivc/graph/tape.hpp"

namespace semivc::graph {

inline constexpr double kLogVarMin = -20.0;
inline constexpr double kLogVarMax = 6.0;

// y = x W + b for x: T x I, W: I x O, b: 1 x O.
Var affine(Tape& tape, Var x, Var w, Var b);

Var add(Tape& tape, Var a, Var b);
Var scale(Tape& tape, Var a, double factor);
Var tanh(Tape& tape, Var a);
Var sigmoid(Tape& tape, Var a);
// Elementwise clamp; the gradient is zero where the input was clipped.
Var clamp(Tape& tape, Var a, double lo, double hi);
Var concat_cols(Tape& tape, Var a, Var b);
Var sum(Tape& tape, Var a);

// Sum of squared differences against a fixed target, as a 1x1 value.
Var squared_error(Tape& tape, Var prediction, const Matrix& target);

// Gated recurrent unit over the rows of x (gate blocks ordered z, r, n):
//   z = s(x Wz + h Uz + bz), r = s(x Wr + h Ur + br),
//   n = tanh(x Wn + (r * h) Un + bn), h' = (1 - z) n + z h.
// wx: I x 3H, wh: H x 3H, b: 1 x 3H. `reverse` runs from the last row to the
// first. Initial state is zero.
Var gru(Tape& tape, Var x, Var wx, Var wh, Var b, bool reverse);

struct BiGruVars {
  Var fwd_wx, fwd_wh, fwd_b;
  Var bwd_wx, bwd_wh, bwd_b;
};

// [forward GRU | backward GRU], T x 2H.
Var birnn(Tape& tape, Var x, const BiGruVars& cell);

// mean + exp(log_var / 2) * eps with log_var clamped to [kLogVarMin, kLogVarMax].
// eps is treated as a constant.
Var gaussian_sample(Tape& tape, Var mean, Var log_var, const Matrix& eps);
Var gaussian_sample(Tape& tape, Var mean, Var log_var, RngState& rng);

// KL(N(mean, exp(log_var)) || N(0, I)) summed over all elements, 1x1.
Var kl_to_standard_normal(Tape& tape, Var mean, Var log_var);

}  // namespace semivc::graph
