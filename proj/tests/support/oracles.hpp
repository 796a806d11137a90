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

// Independent reference implementations used by the tests. None of these
// call into the library's numerical code.

#include <Eigen/Core>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <limits>
#include <numbers>
#include <random>
#include <string>
#include <utility>
#include <vector>

namespace semivc::testing {

// Unique scratch directory removed on destruction.
class TempDir {
 public:
  TempDir() {
    static int counter = 0;
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("semivc_test_" + std::to_string(rd()) + "_" + std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

// Exhaustive DTW: enumerates every monotone path under steps (1,0), (0,1),
// (1,1) and returns the minimum summed squared-Euclidean cost.
inline double brute_force_dtw(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y) {
  const int n = static_cast<int>(x.rows()), m = static_cast<int>(y.rows());
  double best = std::numeric_limits<double>::infinity();
  std::function<void(int, int, double)> walk = [&](int i, int j, double acc) {
    acc += (x.row(i) - y.row(j)).squaredNorm();
    if (i == n - 1 && j == m - 1) {
      best = std::min(best, acc);
      return;
    }
    if (i + 1 < n && j + 1 < m) walk(i + 1, j + 1, acc);
    if (i + 1 < n) walk(i + 1, j, acc);
    if (j + 1 < m) walk(i, j + 1, acc);
  };
  walk(0, 0, 0.0);
  return best;
}

// Posterior by plain density products (no log space).
inline Eigen::VectorXd naive_posterior(const Eigen::VectorXd& weights, const Eigen::MatrixXd& means,
                                       const Eigen::MatrixXd& vars, const Eigen::VectorXd& x) {
  const int k = static_cast<int>(weights.size());
  Eigen::VectorXd p(k);
  for (int i = 0; i < k; ++i) {
    double dens = weights(i);
    for (int d = 0; d < x.size(); ++d) {
      const double v = vars(i, d);
      const double diff = x(d) - means(i, d);
      dens *= std::exp(-diff * diff / (2.0 * v)) / std::sqrt(2.0 * std::numbers::pi * v);
    }
    p(i) = dens;
  }
  return p / p.sum();
}

// Monte-Carlo estimate of KL(N(mu, exp(log_var)) || N(0, 1)), summed over
// elements, from `samples` draws per element.
inline double monte_carlo_kl(const std::vector<double>& mu, const std::vector<double>& log_var,
                             int samples, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  double total = 0.0;
  for (std::size_t e = 0; e < mu.size(); ++e) {
    const double sd = std::exp(0.5 * log_var[e]);
    double acc = 0.0;
    for (int s = 0; s < samples; ++s) {
      const double eps = normal(gen);
      const double z = mu[e] + sd * eps;
      const double log_q = -0.5 * eps * eps - std::log(sd);
      const double log_p = -0.5 * z * z;
      acc += log_q - log_p;
    }
    total += acc / samples;
  }
  return total;
}

// Relative error used by the gradient checks. Pairs whose magnitudes are
// both below `floor` are compared on the absolute scale of `floor`.
inline double relative_error(double analytic, double numeric, double floor = 1e-8) {
  const double scale = std::max({std::abs(analytic), std::abs(numeric), floor});
  return std::abs(analytic - numeric) / scale;
}

// Central differences of f with respect to every element of `m`.
inline Eigen::MatrixXd numeric_gradient(Eigen::MatrixXd& m, const std::function<double()>& f,
                                        double h = 1e-4) {
  Eigen::MatrixXd g(m.rows(), m.cols());
  for (Eigen::Index i = 0; i < m.size(); ++i) {
    const double keep = m.data()[i];
    m.data()[i] = keep + h;
    const double up = f();
    m.data()[i] = keep - h;
    const double down = f();
    m.data()[i] = keep;
    g.data()[i] = (up - down) / (2.0 * h);
  }
  return g;
}

inline double max_relative_error(const Eigen::MatrixXd& analytic, const Eigen::MatrixXd& numeric) {
  double worst = 0.0;
  for (Eigen::Index i = 0; i < analytic.size(); ++i) {
    worst = std::max(worst, relative_error(analytic.data()[i], numeric.data()[i]));
  }
  return worst;
}

// MCD of one frame pair written out directly: (10 / ln 10) * sqrt(2 * sum d^2).
inline double reference_frame_mcd(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return 10.0 / std::log(10.0) * std::sqrt(2.0 * s);
}

// Little-endian PCM16 WAV bytes written by hand.
inline std::vector<char> pcm16_wav(const std::vector<std::int16_t>& interleaved, int channels,
                                   int rate) {
  std::vector<char> out;
  const auto put = [&](std::uint32_t v, int bytes) {
    for (int i = 0; i < bytes; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
  };
  const auto tag = [&](const char* s) { out.insert(out.end(), s, s + 4); };
  const std::uint32_t data_bytes = static_cast<std::uint32_t>(interleaved.size() * 2);
  tag("RIFF");
  put(36 + data_bytes, 4);
  tag("WAVE");
  tag("fmt ");
  put(16, 4);
  put(1, 2);
  put(channels, 2);
  put(rate, 4);
  put(rate * channels * 2, 4);
  put(channels * 2, 2);
  put(16, 2);
  tag("data");
  put(data_bytes, 4);
  for (std::int16_t s : interleaved) put(static_cast<std::uint16_t>(s), 2);
  return out;
}

}  // namespace semivc::testing
