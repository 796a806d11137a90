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

#include "semivc/gmm.hpp"

#include <Eigen/Cholesky>
#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>
#include <numbers>
#include <numeric>

#include "semivc/error.hpp"
#include "semivc/graph/rng.hpp"

namespace semivc {
namespace {

const double kLog2Pi = std::log(2.0 * std::numbers::pi);

double log_sum_exp(const Eigen::VectorXd& v) {
  const double m = v.maxCoeff();
  if (!std::isfinite(m)) return m;
  return m + std::log((v.array() - m).exp().sum());
}

// Row-wise log(alpha_k N(x_n | mu_k, Sigma_k)), N x K.
Eigen::MatrixXd log_joint(const GmmVcModel& m, const Eigen::MatrixXd& x) {
  const int k_count = m.components();
  Eigen::MatrixXd out(x.rows(), k_count);
  for (int k = 0; k < k_count; ++k) {
    const Eigen::RowVectorXd inv_var = m.vars.row(k).cwiseInverse();
    const double log_norm =
        std::log(m.weights[k]) - 0.5 * (m.vars.row(k).array().log().sum() + kLog2Pi * m.dims());
    const Eigen::MatrixXd diff = x.rowwise() - m.means.row(k);
    out.col(k) = (log_norm - 0.5 * (diff.array().square().rowwise() * inv_var.array())
                                        .rowwise()
                                        .sum())
                     .matrix();
  }
  return out;
}

// k-means++ seeding of component means.
Eigen::MatrixXd kmeanspp(const Eigen::MatrixXd& x, int k_count, graph::RngState& rng) {
  const Eigen::Index n = x.rows();
  Eigen::MatrixXd centers(k_count, x.cols());
  centers.row(0) = x.row(static_cast<Eigen::Index>(rng.below(n)));
  Eigen::VectorXd d2 = (x.rowwise() - centers.row(0)).rowwise().squaredNorm();
  for (int k = 1; k < k_count; ++k) {
    const double total = d2.sum();
    Eigen::Index pick = 0;
    if (total > 0.0) {
      double target = rng.uniform() * total;
      for (pick = 0; pick < n - 1; ++pick) {
        target -= d2[pick];
        if (target < 0.0) break;
      }
    } else {
      pick = static_cast<Eigen::Index>(rng.below(n));
    }
    centers.row(k) = x.row(pick);
    d2 = d2.cwiseMin((x.rowwise() - centers.row(k)).rowwise().squaredNorm());
  }
  return centers;
}

}  // namespace

void GmmVcModel::validate() const {
  const auto k = weights.size();
  if (k < 1) throw InputError("gmm: no components");
  if (means.rows() != k || vars.rows() != k || vars.cols() != means.cols()) {
    throw InputError("gmm: inconsistent parameter shapes");
  }
  if ((weights.array() <= 0.0).any() || std::abs(weights.sum() - 1.0) > 1e-9) {
    throw InputError("gmm: weights must be positive and sum to 1");
  }
  if ((vars.array() < kVarianceFloor * (1.0 - 1e-12)).any()) {
    throw InputError("gmm: variance below floor");
  }
  if (conv_bias.rows() != k || static_cast<Eigen::Index>(conv_mats.size()) != k) {
    throw InputError("gmm: conversion parameter count mismatch");
  }
}

GmmVcModel fit_gmm(const Eigen::MatrixXd& frames, int components, std::uint64_t seed,
                   const GmmFitOptions& opts, GmmFitReport* report) {
  if (components < 1) throw InputError("fit_gmm: K must be >= 1");
  if (frames.rows() < components) {
    throw InputError("fit_gmm: need at least K frames (" + std::to_string(frames.rows()) +
                     " < " + std::to_string(components) + ")");
  }
  if (!frames.allFinite()) throw InputError("fit_gmm: non-finite frames");

  graph::RngState rng(seed);
  Eigen::MatrixXd x;
  if (frames.rows() > opts.max_frames) {
    // Partial Fisher-Yates for a deterministic subsample, kept in original order.
    std::vector<Eigen::Index> idx(frames.rows());
    std::iota(idx.begin(), idx.end(), 0);
    for (int i = 0; i < opts.max_frames; ++i) {
      const auto j = i + static_cast<Eigen::Index>(rng.below(idx.size() - i));
      std::swap(idx[i], idx[j]);
    }
    idx.resize(opts.max_frames);
    std::sort(idx.begin(), idx.end());
    x.resize(opts.max_frames, frames.cols());
    for (int i = 0; i < opts.max_frames; ++i) x.row(i) = frames.row(idx[i]);
  } else {
    x = frames;
  }
  const Eigen::Index n = x.rows();
  const int dims = static_cast<int>(x.cols());

  const Eigen::RowVectorXd global_mean = x.colwise().mean();
  const Eigen::RowVectorXd global_var =
      ((x.rowwise() - global_mean).array().square().colwise().mean()).max(kVarianceFloor);

  GmmVcModel m;
  m.weights = Eigen::VectorXd::Constant(components, 1.0 / components);
  m.means = kmeanspp(x, components, rng);
  m.vars = global_var.replicate(components, 1);
  m.conv_bias = Eigen::MatrixXd::Zero(components, dims);
  m.conv_mats.assign(components, Eigen::MatrixXd::Zero(dims, dims));

  GmmFitReport local;
  GmmFitReport& rep = report ? *report : local;
  rep = GmmFitReport{};
  std::vector<bool> reseeded(components, false);
  double prev_ll = -std::numeric_limits<double>::infinity();
  bool reseed_last_step = true;  // the initial guess is not an M-step output

  for (int iter = 0; iter < opts.max_iterations; ++iter) {
    // E-step.
    Eigen::MatrixXd lj = log_joint(m, x);
    Eigen::VectorXd row_ll(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      row_ll[i] = log_sum_exp(lj.row(i).transpose());
      lj.row(i) = (lj.row(i).array() - row_ll[i]).exp();
    }
    const double ll = row_ll.mean();
    rep.log_likelihood.push_back(ll);
    if (!std::isfinite(ll)) throw NumericalError("fit_gmm: non-finite log-likelihood");
    if (!reseed_last_step && ll < prev_ll - 1e-9 * std::max(1.0, std::abs(prev_ll))) {
      throw NumericalError("fit_gmm: EM log-likelihood decreased at iteration " +
                           std::to_string(iter));
    }
    if (!reseed_last_step && ll - prev_ll < opts.tolerance) {
      rep.converged = true;
      break;
    }
    prev_ll = ll;
    reseed_last_step = false;

    // M-step.
    const Eigen::MatrixXd& resp = lj;
    const Eigen::VectorXd mass = resp.colwise().sum().transpose();
    for (int k = 0; k < components; ++k) {
      if (mass[k] > 1e-10) continue;
      if (reseeded[k]) {
        throw NumericalError("fit_gmm: component " + std::to_string(k) +
                             " collapsed again after re-seeding");
      }
      reseeded[k] = true;
      ++rep.reseeds;
      reseed_last_step = true;
    }
    for (int k = 0; k < components; ++k) {
      if (mass[k] > 1e-10) {
        m.means.row(k) = (resp.col(k).transpose() * x) / mass[k];
        const Eigen::MatrixXd diff = x.rowwise() - m.means.row(k);
        m.vars.row(k) = ((diff.array().square().colwise() * resp.col(k).array()).colwise().sum() /
                         mass[k])
                            .max(kVarianceFloor);
        m.weights[k] = mass[k] / static_cast<double>(n);
      } else {
        // Re-seed on the frame the model explains worst.
        Eigen::Index worst;
        row_ll.minCoeff(&worst);
        m.means.row(k) = x.row(worst);
        m.vars.row(k) = global_var;
        m.weights[k] = 1.0 / static_cast<double>(n);
      }
    }
    m.weights /= m.weights.sum();
    rep.iterations = iter + 1;
  }
  return m;
}

Eigen::VectorXd component_log_densities(const GmmVcModel& model, const Eigen::VectorXd& x) {
  if (x.size() != model.dims()) throw InputError("posterior: dimension mismatch");
  return log_joint(model, x.transpose()).row(0).transpose();
}

Eigen::VectorXd posterior(const GmmVcModel& model, const Eigen::VectorXd& x) {
  const Eigen::VectorXd lj = component_log_densities(model, x);
  const double norm = log_sum_exp(lj);
  Eigen::VectorXd p = (lj.array() - norm).exp();
  return p / p.sum();
}

double average_log_likelihood(const GmmVcModel& model, const Eigen::MatrixXd& frames) {
  const Eigen::MatrixXd lj = log_joint(model, frames);
  double total = 0.0;
  for (Eigen::Index i = 0; i < lj.rows(); ++i) total += log_sum_exp(lj.row(i).transpose());
  return total / static_cast<double>(frames.rows());
}

namespace {

// Posterior matrix (T x K) for a block of frames.
Eigen::MatrixXd posteriors(const GmmVcModel& m, const Eigen::MatrixXd& x) {
  Eigen::MatrixXd lj = log_joint(m, x);
  for (Eigen::Index i = 0; i < lj.rows(); ++i) {
    const double norm = log_sum_exp(lj.row(i).transpose());
    lj.row(i) = (lj.row(i).array() - norm).exp();
    lj.row(i) /= lj.row(i).sum();
  }
  return lj;
}

// Regressors for which y_hat = phi * W is linear in the stacked [nu_i; Gamma_i^T].
Eigen::MatrixXd design_block(const GmmVcModel& m, const Eigen::MatrixXd& x) {
  const int k_count = m.components();
  const int d = m.dims();
  const Eigen::MatrixXd p = posteriors(m, x);
  Eigen::MatrixXd phi(x.rows(), k_count * (d + 1));
  for (int k = 0; k < k_count; ++k) {
    const Eigen::RowVectorXd inv_var = m.vars.row(k).cwiseInverse();
    const Eigen::MatrixXd u = ((x.rowwise() - m.means.row(k)).array().rowwise() *
                               inv_var.array())
                                  .matrix();
    const Eigen::Index off = static_cast<Eigen::Index>(k) * (d + 1);
    phi.col(off) = p.col(k);
    phi.middleCols(off + 1, d) = (u.array().colwise() * p.col(k).array()).matrix();
  }
  return phi;
}

}  // namespace

GmmVcModel fit_conversion(const GmmVcModel& model, const Eigen::MatrixXd& x,
                          const Eigen::MatrixXd& y, ConversionFitReport* report) {
  model.validate();
  if (x.rows() == 0) throw InputError("fit_conversion: no training frames");
  if (x.rows() != y.rows()) throw InputError("fit_conversion: x/y frame count mismatch");
  if (x.cols() != model.dims()) throw InputError("fit_conversion: source dimension mismatch");

  const int k_count = model.components();
  const int d = model.dims();
  const Eigen::Index p = static_cast<Eigen::Index>(k_count) * (d + 1);
  Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(p, p);
  Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(p, y.cols());
  constexpr Eigen::Index kBlock = 2048;
  for (Eigen::Index start = 0; start < x.rows(); start += kBlock) {
    const Eigen::Index len = std::min(kBlock, x.rows() - start);
    const Eigen::MatrixXd phi = design_block(model, x.middleRows(start, len));
    gram.selfadjointView<Eigen::Lower>().rankUpdate(phi.transpose());
    rhs.noalias() += phi.transpose() * y.middleRows(start, len);
  }
  gram.triangularView<Eigen::StrictlyUpper>() = gram.transpose();

  // Conditioning check on the unregularized system.
  Eigen::LDLT<Eigen::MatrixXd> plain(gram);
  const Eigen::VectorXd pivots = plain.vectorD().cwiseAbs();
  const bool deficient = plain.info() != Eigen::Success ||
                         pivots.minCoeff() <= 1e-12 * std::max(pivots.maxCoeff(), 1e-300);
  if (deficient) {
    std::cerr << "warning: fit_conversion normal equations are rank deficient; "
                 "relying on ridge regularization\n";
  }
  gram.diagonal().array() += kConversionRidge;
  const Eigen::MatrixXd w = gram.ldlt().solve(rhs);
  if (!w.allFinite()) throw NumericalError("fit_conversion: solve produced non-finite values");

  GmmVcModel out = model;
  for (int k = 0; k < k_count; ++k) {
    const Eigen::Index off = static_cast<Eigen::Index>(k) * (d + 1);
    out.conv_bias.row(k) = w.row(off);
    out.conv_mats[k] = w.middleRows(off + 1, d).transpose();
  }
  out.conversion_fitted = true;

  if (report) {
    report->rank_deficient = deficient;
    report->frames = static_cast<std::size_t>(x.rows());
    report->train_mse =
        (convert_frames(out, x) - y).rowwise().squaredNorm().mean();
  }
  return out;
}

GmmVcModel fit_conversion(const GmmVcModel& model, std::span<const AlignedPair> pairs,
                          ConversionFitReport* report) {
  Eigen::Index total = 0;
  for (const auto& p : pairs) total += p.x.frames();
  if (pairs.empty() || total == 0) throw InputError("fit_conversion: no training frames");
  Eigen::MatrixXd x(total, model.dims());
  Eigen::MatrixXd y(total, pairs.front().y_warped.dims());
  Eigen::Index row = 0;
  for (const auto& p : pairs) {
    if (p.x.frames() != p.y_warped.frames()) {
      throw InputError("fit_conversion: aligned pair has unequal lengths");
    }
    x.middleRows(row, p.x.frames()) = p.x.mcep.cast<double>();
    y.middleRows(row, p.x.frames()) = p.y_warped.mcep.cast<double>();
    row += p.x.frames();
  }
  return fit_conversion(model, x, y, report);
}

Eigen::MatrixXd convert_frames(const GmmVcModel& model, const Eigen::MatrixXd& x) {
  if (x.cols() != model.dims()) throw InputError("convert: dimension mismatch");
  const Eigen::MatrixXd p = posteriors(model, x);
  Eigen::MatrixXd y = Eigen::MatrixXd::Zero(x.rows(), model.conv_bias.cols());
  for (int k = 0; k < model.components(); ++k) {
    const Eigen::RowVectorXd inv_var = model.vars.row(k).cwiseInverse();
    const Eigen::MatrixXd u =
        ((x.rowwise() - model.means.row(k)).array().rowwise() * inv_var.array()).matrix();
    const Eigen::MatrixXd mapped =
        (u * model.conv_mats[k].transpose()).rowwise() + model.conv_bias.row(k);
    y += (mapped.array().colwise() * p.col(k).array()).matrix();
  }
  return y;
}

FeatureSequence convert_gmm(const GmmVcModel& model, const FeatureSequence& x) {
  if (!model.conversion_fitted) throw InputError("convert_gmm: conversion parameters not fitted");
  const bool have_stats = model.source_stats && model.target_stats;
  const FeatureSequence src = have_stats ? normalize(x, *model.source_stats) : x;
  FeatureSequence out = src;
  out.mcep = convert_frames(model, src.mcep.cast<double>()).cast<float>();
  if (have_stats) {
    out = denormalize(out, *model.target_stats);
    out.f0 = convert_f0(x.f0, *model.source_stats, *model.target_stats);
  }
  out.flags = x.flags;
  return out;
}

}  // namespace semivc
