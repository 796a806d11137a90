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
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "semivc/align.hpp"
#include "semivc/features.hpp"
#include "semivc/stats.hpp"

namespace semivc {

inline constexpr double kVarianceFloor = 1e-6;

// Diagonal-covariance GMM over source frames plus the per-component linear
// conversion y = sum_i P(i|x) [nu_i + Gamma_i Sigma_i^-1 (x - mu_i)].
struct GmmVcModel {
  Eigen::VectorXd weights;                 // K, on the simplex
  Eigen::MatrixXd means;                   // K x D
  Eigen::MatrixXd vars;                    // K x D, >= kVarianceFloor
  Eigen::MatrixXd conv_bias;               // K x D_out (nu)
  std::vector<Eigen::MatrixXd> conv_mats;  // K of D_out x D (Gamma)
  bool conversion_fitted = false;

  // Normalization statistics for the feature-level convert path.
  std::optional<SpeakerStats> source_stats;
  std::optional<SpeakerStats> target_stats;

  int components() const { return static_cast<int>(weights.size()); }
  int dims() const { return static_cast<int>(means.cols()); }
  void validate() const;
};

struct GmmFitOptions {
  int max_iterations = 200;
  double tolerance = 1e-6;  // per-frame log-likelihood gain
  int max_frames = 100000;
};

struct GmmFitReport {
  std::vector<double> log_likelihood;  // per-frame average, one per E-step
  int iterations = 0;
  int reseeds = 0;
  bool converged = false;
};

// EM from a k-means++ seeding. Conversion parameters start at zero.
GmmVcModel fit_gmm(const Eigen::MatrixXd& frames, int components, std::uint64_t seed,
                   const GmmFitOptions& opts = {}, GmmFitReport* report = nullptr);

// Per-component log(alpha_i N(x | mu_i, Sigma_i)).
Eigen::VectorXd component_log_densities(const GmmVcModel& model, const Eigen::VectorXd& x);

// P(z = i | x), computed in log space.
Eigen::VectorXd posterior(const GmmVcModel& model, const Eigen::VectorXd& x);

double average_log_likelihood(const GmmVcModel& model, const Eigen::MatrixXd& frames);

struct ConversionFitReport {
  bool rank_deficient = false;
  double train_mse = 0.0;  // mean over frames of ||y - y_hat||^2
  std::size_t frames = 0;
};

inline constexpr double kConversionRidge = 1e-6;

// Least-squares fit of nu_i, Gamma_i on paired frames (rows of x and y).
GmmVcModel fit_conversion(const GmmVcModel& model, const Eigen::MatrixXd& x,
                          const Eigen::MatrixXd& y, ConversionFitReport* report = nullptr);
GmmVcModel fit_conversion(const GmmVcModel& model, std::span<const AlignedPair> pairs,
                          ConversionFitReport* report = nullptr);

// Frame-wise mapping of a T x D matrix.
Eigen::MatrixXd convert_frames(const GmmVcModel& model, const Eigen::MatrixXd& x);

// Feature-level conversion. mcep is mapped in the normalized domain when the
// model carries statistics; c0 and ap are copied; f0 is log-Gaussian mapped.
FeatureSequence convert_gmm(const GmmVcModel& model, const FeatureSequence& x);

void save_gmm(const std::filesystem::path& path, const GmmVcModel& model);
GmmVcModel load_gmm(const std::filesystem::path& path);
bool is_gmm_model(const std::filesystem::path& path);

}  // namespace semivc
