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

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <memory>
#include <mutex>
#include <numbers>

#include "semivc/error.hpp"
#include "semivc/features.hpp"

namespace semivc {
namespace {

// fftw planning is not thread safe; execution on distinct plans is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

// Real-to-complex transform of a fixed size with owned buffers.
class RealFft {
 public:
  explicit RealFft(int n) : n_(n) {
    in_ = static_cast<double*>(fftw_malloc(sizeof(double) * n));
    out_ = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * (n / 2 + 1)));
    std::lock_guard lock(planner_mutex());
    plan_ = fftw_plan_dft_r2c_1d(n, in_, out_, FFTW_ESTIMATE);
  }
  ~RealFft() {
    {
      std::lock_guard lock(planner_mutex());
      fftw_destroy_plan(plan_);
    }
    fftw_free(in_);
    fftw_free(out_);
  }
  RealFft(const RealFft&) = delete;
  RealFft& operator=(const RealFft&) = delete;

  double* input() { return in_; }
  const fftw_complex* output() const { return out_; }
  int size() const { return n_; }
  void execute() { fftw_execute(plan_); }

 private:
  int n_;
  double* in_;
  fftw_complex* out_;
  fftw_plan plan_;
};

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

// Triangular filters evenly spaced on the mel scale, n_filters x (fft/2+1).
Eigen::MatrixXd mel_filterbank(int n_filters, int fft_size, int sample_rate) {
  const int bins = fft_size / 2 + 1;
  const double mel_hi = hz_to_mel(sample_rate / 2.0);
  std::vector<double> edges(n_filters + 2);
  for (int i = 0; i < n_filters + 2; ++i) {
    edges[i] = mel_to_hz(mel_hi * i / (n_filters + 1)) * fft_size / sample_rate;
  }
  Eigen::MatrixXd fb = Eigen::MatrixXd::Zero(n_filters, bins);
  for (int m = 0; m < n_filters; ++m) {
    const double lo = edges[m], mid = edges[m + 1], hi = edges[m + 2];
    for (int k = 0; k < bins; ++k) {
      double w = 0.0;
      if (k > lo && k <= mid) w = (k - lo) / (mid - lo);
      else if (k > mid && k < hi) w = (hi - k) / (hi - mid);
      fb(m, k) = w;
    }
    // Narrow low-frequency filters can fall between bins.
    if (fb.row(m).sum() == 0.0) {
      fb(m, std::clamp(static_cast<int>(std::lround(mid)), 0, bins - 1)) = 1.0;
    }
  }
  return fb;
}

void check_clip(const AudioClip& clip, const FrameConfig& cfg) {
  cfg.validate();
  if (clip.sample_rate != kSampleRate) {
    throw InputError("feature extraction requires " + std::to_string(kSampleRate) +
                     " Hz audio, got " + std::to_string(clip.sample_rate));
  }
  if (static_cast<int>(clip.samples.size()) < cfg.fft_size) {
    throw InputError("clip too short: " + std::to_string(clip.samples.size()) +
                     " samples < fft size " + std::to_string(cfg.fft_size));
  }
  for (float s : clip.samples) {
    if (!std::isfinite(s) || s < -1.0f || s > 1.0f) {
      throw InputError("audio samples must be finite and within [-1, 1]");
    }
  }
}

}  // namespace

int FrameConfig::hop_samples(int sample_rate) const {
  return static_cast<int>(std::lround(hop_seconds * sample_rate));
}

void FrameConfig::validate() const {
  if (fft_size < 2 || (fft_size & (fft_size - 1)) != 0) {
    throw InputError("fft_size must be a power of two");
  }
  if (!(hop_seconds > 0.0)) throw InputError("hop must be positive");
  if (n_cepstra < 2 || n_cepstra > n_mel_filters) {
    throw InputError("n_cepstra must be in [2, n_mel_filters]");
  }
  if (!(f0_min > 0.0 && f0_max > f0_min)) throw InputError("invalid f0 search band");
}

int frame_count(int num_samples, const FrameConfig& cfg, int sample_rate) {
  if (num_samples < cfg.fft_size) return 0;
  return (num_samples - cfg.fft_size) / cfg.hop_samples(sample_rate) + 1;
}

std::vector<float> estimate_f0(const AudioClip& clip, const FrameConfig& cfg) {
  check_clip(clip, cfg);
  const int n = cfg.fft_size;
  const int hop = cfg.hop_samples(clip.sample_rate);
  const int frames = frame_count(static_cast<int>(clip.samples.size()), cfg, clip.sample_rate);
  const int lag_min = std::max(2, static_cast<int>(std::floor(clip.sample_rate / cfg.f0_max)));
  const int lag_max = std::min(n - 2, static_cast<int>(std::ceil(clip.sample_rate / cfg.f0_min)));

  // Autocorrelation via a zero-padded power spectrum.
  RealFft fwd(2 * n);
  std::vector<double> acf(2 * n);
  fftw_complex* spec = fftw_alloc_complex(2 * n);
  double* back = fftw_alloc_real(2 * n);
  fftw_plan inv;
  {
    std::lock_guard lock(planner_mutex());
    inv = fftw_plan_dft_c2r_1d(2 * n, spec, back, FFTW_ESTIMATE);
  }

  std::vector<double> energy(n + 1);
  std::vector<double> r(lag_max + 2, 0.0);
  std::vector<float> f0(frames, 0.0f);
  for (int t = 0; t < frames; ++t) {
    const float* x = clip.samples.data() + static_cast<std::size_t>(t) * hop;
    energy[0] = 0.0;
    for (int i = 0; i < n; ++i) energy[i + 1] = energy[i] + double(x[i]) * x[i];
    if (energy[n] < 1e-10 * n) continue;

    double* in = fwd.input();
    for (int i = 0; i < n; ++i) in[i] = x[i];
    std::fill(in + n, in + 2 * n, 0.0);
    fwd.execute();
    const fftw_complex* out = fwd.output();
    for (int k = 0; k <= n; ++k) {
      spec[k][0] = out[k][0] * out[k][0] + out[k][1] * out[k][1];
      spec[k][1] = 0.0;
    }
    fftw_execute(inv);
    for (int i = 0; i < 2 * n; ++i) acf[i] = back[i] / (2.0 * n);

    double best = -1.0;
    for (int lag = lag_min - 1; lag <= lag_max + 1; ++lag) {
      const double head = energy[n - lag];
      const double tail = energy[n] - energy[lag];
      const double denom = std::sqrt(head * tail);
      r[lag] = denom > 0.0 ? acf[lag] / denom : 0.0;
      if (lag >= lag_min && lag <= lag_max) best = std::max(best, r[lag]);
    }
    if (best < cfg.voicing_threshold) continue;

    // Shortest lag that is a local peak close to the best one, which avoids
    // picking subharmonic multiples of the true period.
    int chosen = -1;
    for (int lag = lag_min; lag <= lag_max; ++lag) {
      if (r[lag] >= r[lag - 1] && r[lag] >= r[lag + 1] && r[lag] >= 0.9 * best) {
        chosen = lag;
        break;
      }
    }
    if (chosen < 0) continue;
    const double a = r[chosen - 1], b = r[chosen], c = r[chosen + 1];
    const double curvature = a - 2.0 * b + c;
    const double delta = curvature < 0.0 ? 0.5 * (a - c) / curvature : 0.0;
    const double hz = clip.sample_rate / (chosen + std::clamp(delta, -0.5, 0.5));
    f0[t] = static_cast<float>(std::clamp(hz, cfg.f0_min, cfg.f0_max));
  }

  {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(inv);
  }
  fftw_free(spec);
  fftw_free(back);
  return f0;
}

FeatureSequence extract_features(const AudioClip& clip, const FrameConfig& cfg) {
  check_clip(clip, cfg);
  const int n = cfg.fft_size;
  const int hop = cfg.hop_samples(clip.sample_rate);
  const int frames = frame_count(static_cast<int>(clip.samples.size()), cfg, clip.sample_rate);
  const int bins = n / 2 + 1;
  const int n_mcep = cfg.n_cepstra - 1;

  std::vector<double> window(n);
  for (int i = 0; i < n; ++i) {
    window[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * i / n);
  }
  const Eigen::MatrixXd fb = mel_filterbank(cfg.n_mel_filters, n, clip.sample_rate);
  const int m_count = cfg.n_mel_filters;
  Eigen::MatrixXd dct(cfg.n_cepstra, m_count);
  for (int k = 0; k < cfg.n_cepstra; ++k) {
    for (int m = 0; m < m_count; ++m) {
      dct(k, m) = std::cos(std::numbers::pi * k * (m + 0.5) / m_count) / m_count;
    }
  }

  FeatureSequence fs;
  fs.frame_hop = static_cast<double>(hop) / clip.sample_rate;
  fs.mcep.resize(frames, n_mcep);
  fs.c0.resize(frames);

  RealFft fft(n);
  Eigen::VectorXd power(bins);
  for (int t = 0; t < frames; ++t) {
    const float* x = clip.samples.data() + static_cast<std::size_t>(t) * hop;
    double* in = fft.input();
    for (int i = 0; i < n; ++i) in[i] = window[i] * x[i];
    fft.execute();
    const fftw_complex* out = fft.output();
    for (int k = 0; k < bins; ++k) power[k] = out[k][0] * out[k][0] + out[k][1] * out[k][1];
    // Log amplitude of the mel-smoothed envelope.
    const Eigen::VectorXd log_mel = (fb * power).array().max(1e-10).log() * 0.5;
    const Eigen::VectorXd cep = dct * log_mel;
    fs.c0[t] = static_cast<float>(cep[0]);
    for (int d = 0; d < n_mcep; ++d) fs.mcep(t, d) = static_cast<float>(cep[d + 1]);
  }

  fs.f0 = estimate_f0(clip, cfg);
  fs.ap.resize(frames);
  for (int t = 0; t < frames; ++t) fs.ap[t] = fs.f0[t] > 0.0f ? 0.0f : 1.0f;
  return fs;
}

}  // namespace semivc
