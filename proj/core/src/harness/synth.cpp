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

#include "semivc/harness/synth.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "semivc/error.hpp"
#include "semivc/graph/rng.hpp"

namespace semivc::harness {
namespace fs = std::filesystem;
namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;
using graph::RngState;

constexpr double kAr1 = 1.6;
constexpr double kAr2 = -0.7;
constexpr int kBurnIn = 50;

struct SpeakerMap {
  MatrixXd w1;  // hidden x latent
  VectorXd b1;
  MatrixXd w2;  // dims x hidden
  VectorXd offset;
  VectorXd c0_weights;
  double c0_offset = 0.0;
  double log_f0 = 0.0;
};

// Weights are rho * shared + sqrt(1 - rho^2) * own, so the two speakers'
// maps are correlated but distinct; offsets are speaker specific.
SpeakerMap make_map(const SynthSpec& spec, RngState shared, RngState rng, double f0_hz) {
  const double rho = spec.map_correlation;
  const double own = std::sqrt(1.0 - rho * rho);
  const auto draw = [&](int rows, int cols) -> MatrixXd {
    return rho * shared.normal_matrix(rows, cols) + own * rng.normal_matrix(rows, cols);
  };
  SpeakerMap m;
  const double gain = 1.5 / std::sqrt(static_cast<double>(spec.latent_dim));
  m.w1 = draw(spec.hidden, spec.latent_dim) * gain;
  m.b1 = draw(spec.hidden, 1) * 0.5;
  m.w2 = draw(spec.mcep_dims, spec.hidden) / std::sqrt(static_cast<double>(spec.hidden));
  m.offset = rng.normal_matrix(spec.mcep_dims, 1);
  // Higher-order cepstra vary less, as in real spectral envelopes.
  for (int d = 0; d < spec.mcep_dims; ++d) {
    const double decay = spec.coef_scale / (1.0 + d / 16.0);
    m.w2.row(d) *= decay;
    m.offset(d) *= decay;
  }
  m.c0_weights = rng.normal_matrix(spec.hidden, 1) * 0.3;
  m.c0_offset = -2.0 + rng.normal() * 0.5;
  m.log_f0 = std::log(f0_hz);
  return m;
}

// Rows are frames.
MatrixXd latent_sequence(const SynthSpec& spec, RngState& rng, int frames) {
  // Innovation scale giving unit stationary variance for the AR(2) process.
  const double gamma0 = (1.0 - kAr2) / ((1.0 + kAr2) * ((1.0 - kAr2) * (1.0 - kAr2) - kAr1 * kAr1));
  const double sd = 1.0 / std::sqrt(gamma0);
  const VectorXd shift = rng.normal_matrix(spec.latent_dim, 1) * spec.offset_std;
  MatrixXd z(frames, spec.latent_dim);
  VectorXd prev1 = VectorXd::Zero(spec.latent_dim), prev2 = VectorXd::Zero(spec.latent_dim);
  for (int t = -kBurnIn; t < frames; ++t) {
    VectorXd cur(spec.latent_dim);
    for (int k = 0; k < spec.latent_dim; ++k) cur(k) = kAr1 * prev1(k) + kAr2 * prev2(k) + sd * rng.normal();
    prev2 = prev1;
    prev1 = cur;
    if (t >= 0) z.row(t) = (cur + shift).transpose();
  }
  return z;
}

FeatureSequence render(const SynthSpec& spec, const SpeakerMap& m, const MatrixXd& z, RngState rng) {
  const int frames = static_cast<int>(z.rows());
  FeatureSequence fs;
  fs.mcep.resize(frames, spec.mcep_dims);
  fs.c0.resize(frames);
  fs.f0.resize(frames);
  fs.ap.resize(frames);
  for (int t = 0; t < frames; ++t) {
    const VectorXd h = (m.w1 * z.row(t).transpose() + m.b1).array().tanh().matrix();
    const VectorXd y = m.w2 * h + m.offset;
    for (int d = 0; d < spec.mcep_dims; ++d) {
      fs.mcep(t, d) = static_cast<float>(y(d) + spec.noise_std * rng.normal());
    }
    fs.c0[t] = static_cast<float>(m.c0_offset + m.c0_weights.dot(h));
    const bool voiced = z(t, spec.latent_dim - 1) > -0.8;
    fs.f0[t] = voiced ? static_cast<float>(std::exp(m.log_f0 + 0.08 * z(t, 0))) : 0.0f;
    fs.ap[t] = voiced ? 0.0f : 1.0f;
  }
  return fs;
}

}  // namespace

void SynthSpec::validate() const {
  if (train_pairs < 1 || source_only < 1 || target_only < 1 || validation_pairs < 1 ||
      test_pairs < 1) {
    throw InputError("synthetic corpus sizes must be >= 1");
  }
  if (min_frames < 2 || max_frames < min_frames) throw InputError("bad synthetic frame range");
  if (latent_dim < 1 || hidden < 1 || mcep_dims < 1) throw InputError("bad synthetic dimensions");
  if (!(coef_scale > 0.0) || !(noise_std >= 0.0) || !(offset_std >= 0.0) ||
      !(map_correlation >= 0.0 && map_correlation <= 1.0)) throw InputError("bad synthetic scales");
}

SynthCorpus generate_synthetic_corpus(const SynthSpec& spec, const fs::path& out_dir) {
  spec.validate();
  fs::create_directories(out_dir / "source");
  fs::create_directories(out_dir / "target");

  const RngState root(spec.seed);
  const SpeakerMap map_a = make_map(spec, root.fork(3), root.fork(1), 110.0);
  const SpeakerMap map_b = make_map(spec, root.fork(3), root.fork(2), 210.0);

  SynthCorpus corpus;
  corpus.manifest = out_dir / "manifest.txt";
  corpus.truth = out_dir / "truth.txt";
  std::ofstream truth(corpus.truth);
  if (!truth) throw InputError("cannot write " + corpus.truth.string());
  truth << "# latent_id source target (shared latent id means same underlying content)\n";

  std::uint64_t utterance = 0;
  const auto next_latent = [&](RngState& rng) {
    const int frames =
        spec.min_frames + static_cast<int>(rng.below(spec.max_frames - spec.min_frames + 1));
    return latent_sequence(spec, rng, frames);
  };
  const auto emit = [&](const char* stem_prefix, int index, bool src, bool tgt) {
    RngState rng = root.fork(1000 + utterance);
    const MatrixXd z = next_latent(rng);
    char stem[32];
    std::snprintf(stem, sizeof stem, "%s%04d", stem_prefix, index);
    fs::path sp, tp;
    if (src) {
      sp = out_dir / "source" / (std::string(stem) + ".vcf");
      write_features(sp, render(spec, map_a, z, rng.fork(1)));
    }
    if (tgt) {
      tp = out_dir / "target" / (std::string(stem) + ".vcf");
      write_features(tp, render(spec, map_b, z, rng.fork(2)));
    }
    truth << utterance << ' ' << (src ? "source/" + std::string(stem) + ".vcf" : "-") << ' '
          << (tgt ? "target/" + std::string(stem) + ".vcf" : "-") << '\n';
    ++utterance;
    return std::pair{sp, tp};
  };

  auto& train = corpus.entries.splits["train"];
  for (int i = 0; i < spec.train_pairs; ++i) {
    auto [s, t] = emit("p", i, true, true);
    train.paired.push_back({s, t});
  }
  for (int i = 0; i < spec.source_only; ++i) train.source_only.push_back(emit("s", i, true, false).first);
  for (int i = 0; i < spec.target_only; ++i) train.target_only.push_back(emit("t", i, false, true).second);
  auto& val = corpus.entries.splits["validation"];
  for (int i = 0; i < spec.validation_pairs; ++i) {
    auto [s, t] = emit("v", i, true, true);
    val.paired.push_back({s, t});
  }
  auto& test = corpus.entries.splits["test"];
  for (int i = 0; i < spec.test_pairs; ++i) {
    auto [s, t] = emit("e", i, true, true);
    test.paired.push_back({s, t});
  }
  corpus.entries.validate();
  corpus.entries.save(corpus.manifest);
  return corpus;
}

}  // namespace semivc::harness
