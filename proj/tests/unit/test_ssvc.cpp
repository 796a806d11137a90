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

#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <random>

#include "gradcheck.hpp"
#include "linear_corpus.hpp"
#include "semivc/error.hpp"
#include "semivc/ssvc.hpp"

namespace semivc::ssvc {
namespace {

using graph::RngState;

ModelConfig tiny_config(int dims = 3) {
  ModelConfig c;
  c.input_dim = dims;
  c.encoder_widths = {2};
  c.latent_dim = 2;
  c.decoder_widths = {2};
  c.sigma2 = 0.5;
  return c;
}

Matrix random_matrix(std::mt19937& gen, int r, int c, double sd = 1.0) {
  std::normal_distribution<double> n(0.0, sd);
  Matrix m(r, c);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = n(gen);
  return m;
}

std::vector<std::size_t> all_indices(const SsVcModel& m) {
  std::vector<std::size_t> v(m.params().size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = i;
  return v;
}

// Runs backward on `loss` and returns the parameter gradients.
template <typename Fn>
std::vector<Matrix> gradients(SsVcModel& model, Fn&& loss) {
  model.params().zero_grad();
  Tape tape;
  const auto bound = model.bind(tape);
  tape.backward(loss(tape, bound));
  std::vector<Matrix> g;
  for (std::size_t i = 0; i < model.params().size(); ++i) g.push_back(model.params()[i].grad);
  return g;
}

std::string file_bytes(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

TEST(ModelConfig, TextRoundTrip) {
  ModelConfig c = tiny_config();
  c.sigma2 = 0.123456789012345;
  c.decoder_widths = {4, 5, 6};
  EXPECT_EQ(ModelConfig::from_text(c.to_text()), c);
  c.latent_dim = 0;
  EXPECT_THROW(c.validate(), InputError);
}

TEST(Encoder, DeterministicAndFinite) {
  std::mt19937 gen(1);
  const SsVcModel m(ModelConfig{}, 3);
  const Matrix x = random_matrix(gen, 20, kNumMcep);
  const auto [mu1, lv1] = m.encode(x);
  const auto [mu2, lv2] = m.encode(x);
  EXPECT_TRUE(mu1 == mu2);
  EXPECT_TRUE(lv1 == lv2);
  EXPECT_TRUE(mu1.allFinite());
  EXPECT_GE(lv1.minCoeff(), graph::kLogVarMin);
  EXPECT_LE(lv1.maxCoeff(), graph::kLogVarMax);
  EXPECT_EQ(mu1.rows(), 20);
  EXPECT_EQ(mu1.cols(), ModelConfig{}.latent_dim);
}

TEST(Encoder, IndependentOfDecoders) {
  std::mt19937 gen(2);
  SsVcModel m(tiny_config(), 4);
  const Matrix x = random_matrix(gen, 6, 3);
  const Matrix before = m.encode(x).first;
  for (Speaker s : {Speaker::kSource, Speaker::kTarget}) {
    for (std::size_t i : m.decoder_parameter_indices(s)) m.params()[i].value.array() += 0.5;
  }
  EXPECT_TRUE(m.encode(x).first == before);
}

TEST(Decoder, SpeakersDiffer) {
  std::mt19937 gen(3);
  const SsVcModel m(tiny_config(), 5);
  const Matrix z = random_matrix(gen, 5, 2);
  EXPECT_FALSE(m.decode_x(z) == m.decode_y(z));
}

TEST(Decoder, FirstFrameReachesLastFrame) {
  std::mt19937 gen(4);
  const SsVcModel m(tiny_config(), 6);
  Matrix z = random_matrix(gen, 8, 2);
  const Matrix before = m.decode_x(z);
  z(0, 0) += 1.0;
  EXPECT_GT((m.decode_x(z).row(7) - before.row(7)).cwiseAbs().maxCoeff(), 0.0);
}

TEST(Decoder, ZeroWeightsGiveBias) {
  SsVcModel m(tiny_config(), 7);
  for (std::size_t i : m.decoder_parameter_indices(Speaker::kSource)) m.params()[i].value.setZero();
  Matrix b(1, 3);
  b << 0.5, -1.0, 2.0;
  m.params().at("dec_x.out.b").value = b;
  const Matrix y = m.decode_x(Matrix::Ones(4, 2));
  for (int t = 0; t < 4; ++t) EXPECT_TRUE(y.row(t) == b);
}

TEST(Parameters, PartitionIsComplete) {
  const SsVcModel m(ModelConfig{}, 1);
  auto enc = m.encoder_parameter_indices();
  const auto dx = m.decoder_parameter_indices(Speaker::kSource);
  const auto dy = m.decoder_parameter_indices(Speaker::kTarget);
  EXPECT_EQ(enc.size() + dx.size() + dy.size(), m.params().size());
  EXPECT_EQ(dx.size(), dy.size());
  for (std::size_t i : dy) EXPECT_EQ(m.params().name(i).rfind("dec_y.", 0), 0u);
}

TEST(Losses, SigmaScalesReconstruction) {
  std::mt19937 gen(5);
  const Matrix x = random_matrix(gen, 4, 3), y = random_matrix(gen, 4, 3);
  ModelConfig c = tiny_config();
  SsVcModel a(c, 9);
  c.sigma2 *= 2.0;
  SsVcModel b(c, 9);
  PairedBreakdown pa, pb;
  RngState r1(1), r2(1);
  Tape t1, t2;
  loss_paired(t1, a.bind(t1), x, y, r1, Sampling::kPosteriorMean, &pa);
  loss_paired(t2, b.bind(t2), x, y, r2, Sampling::kPosteriorMean, &pb);
  EXPECT_DOUBLE_EQ(pb.from_x.recon_y, 0.5 * pa.from_x.recon_y);
  EXPECT_DOUBLE_EQ(pb.from_y.recon_x, 0.5 * pa.from_y.recon_x);
  EXPECT_DOUBLE_EQ(pb.from_x.kl, pa.from_x.kl);
}

TEST(Losses, PerfectModelHasZeroLoss) {
  SsVcModel m(tiny_config(), 10);
  for (std::size_t i = 0; i < m.params().size(); ++i) m.params()[i].value.setZero();
  Matrix bx(1, 3), by(1, 3);
  bx << 1.0, 2.0, 3.0;
  by << -1.0, 0.5, 0.0;
  m.params().at("dec_x.out.b").value = bx;
  m.params().at("dec_y.out.b").value = by;
  RngState rng(3);
  Tape tape;
  const Var l = loss_paired(tape, m.bind(tape), bx.replicate(5, 1), by.replicate(5, 1), rng);
  EXPECT_EQ(tape.scalar(l), 0.0);
}

// Single-frame GRU step from a zero state, written out by hand.
double gru_step(double x, const Matrix& wx, const Matrix& b) {
  const auto sig = [](double v) { return 1.0 / (1.0 + std::exp(-v)); };
  const double z = sig(x * wx(0, 0) + b(0, 0));
  const double n = std::tanh(x * wx(0, 2) + b(0, 2));
  return (1.0 - z) * n;
}

TEST(Losses, HandEvaluatedScalarBound) {
  ModelConfig c;
  c.input_dim = 1;
  c.encoder_widths = {1};
  c.latent_dim = 1;
  c.decoder_widths = {1};
  c.sigma2 = 1e-3;
  SsVcModel m(c, 21);
  std::mt19937 gen(6);
  for (std::size_t i = 0; i < m.params().size(); ++i) {
    m.params()[i].value = random_matrix(gen, m.params()[i].rows(), m.params()[i].cols(), 0.8);
  }
  const auto& P = m.params();
  const auto v = [&](const std::string& n) -> const Matrix& { return P.at(n).value; };
  const auto bi = [&](const std::string& pre, double in, double out[2]) {
    out[0] = gru_step(in, v(pre + ".fwd.wx"), v(pre + ".fwd.b"));
    out[1] = gru_step(in, v(pre + ".bwd.wx"), v(pre + ".bwd.b"));
  };
  const auto affine2 = [&](const std::string& pre, const double h[2]) {
    return h[0] * v(pre + ".w")(0, 0) + h[1] * v(pre + ".w")(1, 0) + v(pre + ".b")(0, 0);
  };
  const auto decode = [&](const std::string& pre, double z) {
    double h[2];
    bi(pre + ".l0", z, h);
    return affine2(pre + ".out", h);
  };
  const double x = 0.7, y = -0.4;
  RngState noise(77);
  RngState copy = noise;
  const double eps[2] = {copy.normal(), copy.normal()};

  double expected = 0.0;
  const double inputs[2] = {x, y};
  for (int h = 0; h < 2; ++h) {
    double e[2];
    bi("enc.l0", inputs[h], e);
    const double mu = affine2("head_mu", e);
    const double lv = std::clamp(affine2("head_logvar", e), -20.0, 6.0);
    const double z = mu + std::exp(0.5 * lv) * eps[h];
    const double rx = std::pow(x - decode("dec_x", z), 2) / (2 * c.sigma2);
    const double ry = std::pow(y - decode("dec_y", z), 2) / (2 * c.sigma2);
    const double kl = 0.5 * (mu * mu + std::exp(lv) - 1.0 - lv);
    expected += 0.5 * (rx + ry + kl);
  }
  Tape tape;
  const Var l = loss_paired(tape, m.bind(tape), Matrix::Constant(1, 1, x),
                            Matrix::Constant(1, 1, y), noise);
  EXPECT_NEAR(tape.scalar(l), expected, 1e-10 * std::max(1.0, std::abs(expected)));
}

TEST(Losses, UnpairedDropsOtherDecoder) {
  std::mt19937 gen(7);
  SsVcModel m(tiny_config(), 11);
  const Matrix x = random_matrix(gen, 5, 3);
  for (Speaker s : {Speaker::kSource, Speaker::kTarget}) {
    RngState rng(4);
    const auto g = gradients(m, [&](Tape& t, const SsVcModel::Bound& b) {
      return loss_unpaired(t, b, x, s, rng);
    });
    const Speaker other = s == Speaker::kSource ? Speaker::kTarget : Speaker::kSource;
    for (std::size_t i : m.decoder_parameter_indices(other)) EXPECT_TRUE(g[i].isZero(0.0));
    double own = 0.0;
    for (std::size_t i : m.decoder_parameter_indices(s)) own += g[i].squaredNorm();
    EXPECT_GT(own, 0.0);
  }
}

TEST(Losses, UnpairedIsPairedMinusCrossTerm) {
  std::mt19937 gen(8);
  const SsVcModel m(tiny_config(), 12);
  const Matrix x = random_matrix(gen, 6, 3), y = random_matrix(gen, 6, 3);
  RngState rng(5);
  PairedBreakdown pb;
  {
    RngState r = rng;
    Tape tape;
    loss_paired(tape, m.bind_frozen(tape), x, y, r, Sampling::kReparameterized, &pb);
  }
  RngState rx = rng;
  Tape tx;
  BoundTerms bx;
  const double ux = tx.scalar(loss_unpaired(tx, m.bind_frozen(tx), x, Speaker::kSource, rx,
                                            Sampling::kReparameterized, &bx));
  EXPECT_DOUBLE_EQ(ux, pb.from_x.total() - pb.from_x.recon_y);

  // The target sample in the paired loss is drawn after the source sample.
  RngState ry = rng;
  ry.normal_matrix(6, 2);
  Tape ty;
  const double uy = ty.scalar(loss_unpaired(ty, m.bind_frozen(ty), y, Speaker::kTarget, ry));
  EXPECT_DOUBLE_EQ(uy, pb.from_y.total() - pb.from_y.recon_x);
}

TEST(Losses, KlTermIsSharedSubroutine) {
  std::mt19937 gen(9);
  const SsVcModel m(tiny_config(), 13);
  const Matrix x = random_matrix(gen, 4, 3);
  RngState rng(6);
  BoundTerms terms;
  Tape tape;
  const auto bound = m.bind_frozen(tape);
  loss_unpaired(tape, bound, x, Speaker::kSource, rng, Sampling::kReparameterized, &terms);
  const auto [mu, lv] = m.encode(x);
  Tape ref;
  EXPECT_EQ(terms.kl, ref.scalar(graph::kl_to_standard_normal(ref, ref.constant(mu), ref.constant(lv))));
}

TEST(Losses, GradientsMatchFiniteDifferences) {
  std::mt19937 gen(10);
  SsVcModel m(tiny_config(), 14);
  const Matrix x = random_matrix(gen, 4, 3), y = random_matrix(gen, 4, 3);
  const RngState rng(8);
  const auto check = [&](auto&& loss) {
    return testing::gradient_check(m.params(), [&](Tape& tape, const std::vector<Var>& vars) {
      SsVcModel::Bound bound = m.bind(tape);
      (void)vars;
      RngState r = rng;
      return loss(tape, bound, r);
    });
  };
  EXPECT_LT(check([&](Tape& t, const SsVcModel::Bound& b, RngState& r) {
              return loss_paired(t, b, x, y, r);
            }),
            1e-4);
  EXPECT_LT(check([&](Tape& t, const SsVcModel::Bound& b, RngState& r) {
              return loss_unpaired(t, b, x, Speaker::kSource, r);
            }),
            1e-4);
  EXPECT_LT(check([&](Tape& t, const SsVcModel::Bound& b, RngState& r) {
              return loss_unpaired(t, b, y, Speaker::kTarget, r);
            }),
            1e-4);
  EXPECT_LT(check([&](Tape& t, const SsVcModel::Bound& b, RngState&) {
              return loss_supervised(t, b, x, y);
            }),
            1e-4);
}

TEST(Batches, ChunkingAndValidation) {
  std::mt19937 gen(11);
  FeatureSequence a;
  a.mcep = random_matrix(gen, 25, 3).cast<float>();
  a.c0.assign(25, 0.0f);
  a.f0.assign(25, 100.0f);
  a.ap.assign(25, 0.0f);
  const auto batches = make_batches({{a, a}}, {a}, {a, a}, 10);
  ASSERT_EQ(batches.size(), 3u + 3u + 6u);
  EXPECT_EQ(batches[2].x->rows(), 5);
  EXPECT_EQ(batches[3].kind, BatchKind::kSourceOnly);
  EXPECT_EQ(batches.back().kind, BatchKind::kTargetOnly);
  TrainingBatch bad{BatchKind::kSourceOnly, std::nullopt, Matrix::Zero(2, 3)};
  EXPECT_THROW(bad.validate(), InputError);
  EXPECT_EQ(parse_method("semi_supervised"), Method::kSemiSupervised);
  EXPECT_EQ(method_name(parse_method("dblstm_vae")), "dblstm_vae");
  EXPECT_THROW(parse_method("lstm"), InputError);
}

TEST(Batches, SupervisedMethodsRejectUnpaired) {
  SsVcModel m(tiny_config(), 1);
  RngState rng(1);
  Tape tape;
  const TrainingBatch b{BatchKind::kSourceOnly, Matrix::Zero(2, 3), std::nullopt};
  EXPECT_THROW(batch_loss(tape, m.bind(tape), b, Method::kVaeSupervised, rng), InputError);
}

struct ToyRun {
  SsVcModel model;
  TrainResult result;
  testing::LinearCorpus corpus;
};

ToyRun train_toy(Method method, int steps, std::uint64_t seed) {
  testing::LinearCorpus corpus = testing::linear_corpus(6, 2, 8, 3, 60, 17);
  ModelConfig c;
  c.input_dim = 6;
  c.encoder_widths = {8};
  c.latent_dim = 3;
  c.decoder_widths = {8};
  SsVcModel model(c, seed);
  std::vector<FeatureSequence> xs, ys;
  for (const auto& [x, y] : corpus.train) {
    xs.push_back(x);
    ys.push_back(y);
  }
  model.source_stats = fit_stats(xs);
  model.target_stats = fit_stats(ys);
  std::vector<std::pair<FeatureSequence, FeatureSequence>> pairs;
  for (const auto& [x, y] : corpus.train) {
    pairs.emplace_back(normalize(x, *model.source_stats), normalize(y, *model.target_stats));
  }
  TrainConfig tc;
  tc.method = method;
  tc.learning_rate = 5e-3;
  tc.steps_per_epoch = steps;
  tc.max_epochs = 1;
  RngState rng(seed);
  TrainResult r = train(model, make_batches(pairs, {}, {}), {}, tc, rng);
  return {std::move(model), std::move(r), std::move(corpus)};
}

TEST(Training, LossDecreases) {
  const ToyRun run = train_toy(Method::kSemiSupervised, 500, 3);
  const auto& log = run.result.log;
  double early = 0.0, late = 0.0;
  int ne = 0, nl = 0;
  for (const auto& row : log) {
    if (row.term_kind == "epoch") continue;
    if (row.step <= 10) early += row.loss, ++ne;
    if (row.step > 490) late += row.loss, ++nl;
  }
  EXPECT_LT(late / nl, 0.5 * early / ne);
  EXPECT_EQ(run.model.info.steps, 500);
  EXPECT_TRUE(run.model.info.cross_coupled());
}

TEST(Training, ConversionRecoversTarget) {
  const ToyRun run = train_toy(Method::kSemiSupervised, 800, 4);
  double converted = 0.0, baseline = 0.0;
  for (const auto& [x, y] : run.corpus.test) {
    const ConversionResult c1 = convert(run.model, x);
    const ConversionResult c2 = convert(run.model, x);
    EXPECT_TRUE(c1.mcep_hat == c2.mcep_hat);
    EXPECT_EQ(c1.mcep_hat.rows(), x.frames());
    converted += (c1.mcep_hat - y.mcep).squaredNorm();
    baseline += (x.mcep - y.mcep).squaredNorm();
  }
  EXPECT_LT(converted, 0.25 * baseline);
}

TEST(Training, SameSeedSameCheckpoint) {
  testing::TempDir dir;
  const ToyRun a = train_toy(Method::kSemiSupervised, 40, 5);
  const ToyRun b = train_toy(Method::kSemiSupervised, 40, 5);
  save_checkpoint(dir / "a.ckpt", a.model);
  save_checkpoint(dir / "b.ckpt", b.model);
  EXPECT_EQ(file_bytes(dir / "a.ckpt"), file_bytes(dir / "b.ckpt"));
}

TEST(Training, PairedOnlySemiEqualsVaeAblation) {
  testing::TempDir dir;
  const ToyRun a = train_toy(Method::kSemiSupervised, 40, 6);
  const ToyRun b = train_toy(Method::kVaeSupervised, 40, 6);
  save_checkpoint(dir / "a.ckpt", a.model);
  save_checkpoint(dir / "b.ckpt", b.model);
  EXPECT_EQ(file_bytes(dir / "a.ckpt"), file_bytes(dir / "b.ckpt"));
}

TEST(Training, NonFiniteLossRaisesDivergence) {
  SsVcModel m(tiny_config(), 2);
  std::vector<TrainingBatch> batches = {
      {BatchKind::kSourceOnly, Matrix::Constant(3, 3, 1e200), std::nullopt}};
  TrainConfig tc;
  tc.steps_per_epoch = 20;
  RngState rng(1);
  EXPECT_THROW(train(m, batches, {}, tc, rng), DivergenceError);
}

TEST(Checkpoint, RoundTrip) {
  testing::TempDir dir;
  SsVcModel m(tiny_config(), 15);
  m.info.paired = 3;
  m.info.steps = 17;
  save_checkpoint(dir / "m.ckpt", m);
  EXPECT_TRUE(is_checkpoint(dir / "m.ckpt"));
  const SsVcModel back = load_checkpoint(dir / "m.ckpt");
  EXPECT_EQ(back.config(), m.config());
  EXPECT_EQ(back.info.paired, 3);
  EXPECT_EQ(back.info.steps, 17);
  for (std::size_t i = 0; i < m.params().size(); ++i) {
    EXPECT_TRUE(back.params()[i].value == m.params()[i].value.cast<float>().cast<double>());
  }
  save_checkpoint(dir / "again.ckpt", back);
  EXPECT_EQ(file_bytes(dir / "m.ckpt"), file_bytes(dir / "again.ckpt"));
}

}  // namespace
}  // namespace semivc::ssvc
