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

#include <benchmark/benchmark.h>

#include <cmath>
#include <numbers>
#include <random>

#include "semivc/align.hpp"
#include "semivc/features.hpp"
#include "semivc/gmm.hpp"
#include "semivc/graph/ops.hpp"
#include "semivc/ssvc.hpp"

namespace semivc {
namespace {

using graph::Matrix;

Matrix random_matrix(std::mt19937& gen, Eigen::Index r, Eigen::Index c) {
  std::normal_distribution<double> n(0.0, 1.0);
  Matrix m(r, c);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = n(gen);
  return m;
}

void BM_Dtw(benchmark::State& state) {
  std::mt19937 gen(1);
  const auto t = state.range(0);
  const Eigen::MatrixXd x = random_matrix(gen, t, kNumMcep);
  const Eigen::MatrixXd y = random_matrix(gen, t + t / 5, kNumMcep);
  for (auto _ : state) benchmark::DoNotOptimize(dtw(x, y).cost);
  state.SetItemsProcessed(state.iterations() * t * (t + t / 5));
}
BENCHMARK(BM_Dtw)->Arg(100)->Arg(400)->Unit(benchmark::kMillisecond);

void BM_DtwBanded(benchmark::State& state) {
  std::mt19937 gen(2);
  const auto t = state.range(0);
  const Eigen::MatrixXd x = random_matrix(gen, t, kNumMcep);
  const Eigen::MatrixXd y = random_matrix(gen, t, kNumMcep);
  DtwOptions opts;
  opts.band_radius = 50;
  for (auto _ : state) benchmark::DoNotOptimize(dtw(x, y, opts).cost);
}
BENCHMARK(BM_DtwBanded)->Arg(400)->Unit(benchmark::kMillisecond);

ssvc::ModelConfig bench_config() {
  ssvc::ModelConfig c;
  c.encoder_widths = {16, 16};
  c.latent_dim = 8;
  c.decoder_widths = {16, 16};
  return c;
}

void BM_BirnnForward(benchmark::State& state) {
  std::mt19937 gen(3);
  const ssvc::SsVcModel model(bench_config(), 1);
  const Matrix x = random_matrix(gen, state.range(0), kNumMcep);
  for (auto _ : state) benchmark::DoNotOptimize(model.decode_y(model.encode(x).first));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_BirnnForward)->Arg(100)->Arg(600)->Unit(benchmark::kMillisecond);

void BM_PairedLossBackward(benchmark::State& state) {
  std::mt19937 gen(4);
  ssvc::SsVcModel model(bench_config(), 2);
  const Matrix x = random_matrix(gen, state.range(0), kNumMcep);
  const Matrix y = random_matrix(gen, state.range(0), kNumMcep);
  graph::RngState rng(5);
  for (auto _ : state) {
    model.params().zero_grad();
    graph::Tape tape;
    tape.backward(ssvc::loss_paired(tape, model.bind(tape), x, y, rng));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_PairedLossBackward)->Arg(100)->Arg(600)->Unit(benchmark::kMillisecond);

void BM_GmmPosterior(benchmark::State& state) {
  std::mt19937 gen(6);
  const Eigen::MatrixXd frames = random_matrix(gen, 2000, kNumMcep);
  const GmmVcModel model = fit_gmm(frames, static_cast<int>(state.range(0)), 1);
  const Eigen::VectorXd x = frames.row(0).transpose();
  for (auto _ : state) benchmark::DoNotOptimize(posterior(model, x));
}
BENCHMARK(BM_GmmPosterior)->Arg(8)->Arg(64);

void BM_ExtractFeatures(benchmark::State& state) {
  AudioClip clip;
  clip.samples.resize(kSampleRate);  // one second
  for (std::size_t n = 0; n < clip.samples.size(); ++n) {
    clip.samples[n] = 0.3f * static_cast<float>(
                                 std::sin(2.0 * std::numbers::pi * 150.0 * n / kSampleRate));
  }
  for (auto _ : state) benchmark::DoNotOptimize(extract_features(clip).frames());
}
BENCHMARK(BM_ExtractFeatures)->Unit(benchmark::kMillisecond);

}  // namespace
}  // namespace semivc

BENCHMARK_MAIN();
