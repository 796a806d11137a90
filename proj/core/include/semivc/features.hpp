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
#include <vector>

namespace semivc {

// Frame-major feature matrix, stored single precision so that the on-disk
// container round-trips exactly.
using FrameMatrix = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

inline constexpr int kNumMcep = 49;  // c1..c49; c0 lives in its own track
inline constexpr int kSampleRate = 16000;

struct AudioClip {
  std::vector<float> samples;  // [-1, 1]
  int sample_rate = kSampleRate;
};

struct FrameConfig {
  int fft_size = 1024;
  double hop_seconds = 0.005;
  int n_cepstra = 50;  // including c0
  int n_mel_filters = 80;
  double f0_min = 50.0;
  double f0_max = 500.0;
  double voicing_threshold = 0.3;

  int hop_samples(int sample_rate) const;
  void validate() const;
};

struct FeatureSequence {
  FrameMatrix mcep;  // T x 49
  std::vector<float> c0;
  std::vector<float> f0;  // Hz, 0 = unvoiced
  std::vector<float> ap;
  double frame_hop = 0.005;
  std::uint32_t flags = 0;

  static constexpr std::uint32_t kNormalizedFlag = 1u;

  int frames() const { return static_cast<int>(mcep.rows()); }
  int dims() const { return static_cast<int>(mcep.cols()); }

  // Throws InputError when track lengths disagree or values are invalid.
  void validate() const;

  // Frames [begin, begin + count) of every track.
  FeatureSequence slice(int begin, int count) const;

  // Exact equality of every track (sizes included).
  bool operator==(const FeatureSequence& other) const;
};

// WAV I/O. Reads PCM 16-bit or IEEE float; multichannel input keeps the
// first channel only.
AudioClip load_wav(const std::filesystem::path& path);
void write_wav(const std::filesystem::path& path, const AudioClip& clip);

// Number of analysis frames for a clip of `num_samples` samples.
int frame_count(int num_samples, const FrameConfig& cfg, int sample_rate = kSampleRate);

FeatureSequence extract_features(const AudioClip& clip, const FrameConfig& cfg = {});
std::vector<float> estimate_f0(const AudioClip& clip, const FrameConfig& cfg = {});

// "VCF1" container.
void write_features(const std::filesystem::path& path, const FeatureSequence& fs);
FeatureSequence read_features(const std::filesystem::path& path);

}  // namespace semivc
