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

// Acceptance runner: prints one PASS/FAIL line per criterion and exits
// non-zero when any criterion fails.

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"
#include "gradcheck.hpp"
#include "oracles.hpp"
#include "semivc/align.hpp"
#include "semivc/gmm.hpp"
#include "semivc/graph/ops.hpp"
#include "semivc/harness/sweep.hpp"
#include "semivc/harness/synth.hpp"
#include "semivc/ssvc.hpp"
#include "semivc/stats.hpp"

namespace semivc::acceptance {
namespace {

namespace fs = std::filesystem;
using graph::Matrix;
using graph::ParamSet;
using graph::RngState;
using graph::Tape;
using graph::Var;
using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

Matrix random_matrix(std::mt19937& gen, Eigen::Index r, Eigen::Index c, double sd = 1.0) {
  std::normal_distribution<double> n(0.0, sd);
  Matrix m(r, c);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = n(gen);
  return m;
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

// --- 1: gradients ------------------------------------------------------------

Outcome gradients() {
  const auto start = Clock::now();
  std::mt19937 gen(101);
  double worst = 0.0;
  const auto check = [&](ParamSet& p, const testing::Builder& b) {
    worst = std::max(worst, testing::gradient_check(p, b));
  };
  const auto reduce = [](Tape& t, Var v, const Matrix& target) {
    return graph::squared_error(t, v, target);
  };

  {
    ParamSet p;
    p.add("x", random_matrix(gen, 4, 3));
    p.add("w", random_matrix(gen, 3, 2));
    p.add("b", random_matrix(gen, 1, 2));
    const Matrix t = random_matrix(gen, 4, 2);
    check(p, [&](Tape& tape, const std::vector<Var>& v) {
      return reduce(tape, graph::affine(tape, v[0], v[1], v[2]), t);
    });
  }
  {
    ParamSet p;
    p.add("a", random_matrix(gen, 3, 4));
    p.add("b", random_matrix(gen, 3, 4));
    const Matrix t = random_matrix(gen, 3, 8);
    check(p, [&](Tape& tape, const std::vector<Var>& v) {
      const Var s = graph::add(tape, graph::tanh(tape, v[0]),
                               graph::scale(tape, graph::sigmoid(tape, v[1]), 1.7));
      const Var c = graph::concat_cols(tape, s, graph::tanh(tape, v[1]));
      return graph::add(tape, reduce(tape, c, t), graph::sum(tape, v[0]));
    });
  }
  {
    ParamSet p;
    Matrix a(1, 4);
    a << -3.0, -0.5, 0.4, 2.5;
    p.add("a", a);
    const Matrix t = Matrix::Constant(1, 4, 0.3);
    check(p, [&](Tape& tape, const std::vector<Var>& v) {
      return reduce(tape, graph::clamp(tape, v[0], -1.0, 1.0), t);
    });
  }
  for (bool reverse : {false, true}) {
    ParamSet p;
    p.add("x", random_matrix(gen, 4, 3));
    p.add("wx", random_matrix(gen, 3, 6, 0.7));
    p.add("wh", random_matrix(gen, 2, 6, 0.7));
    p.add("b", random_matrix(gen, 1, 6, 0.3));
    const Matrix t = random_matrix(gen, 4, 2);
    check(p, [&](Tape& tape, const std::vector<Var>& v) {
      return reduce(tape, graph::gru(tape, v[0], v[1], v[2], v[3], reverse), t);
    });
  }
  {
    ParamSet p;
    p.add("x", random_matrix(gen, 5, 3));
    for (const char* dir : {"f", "b"}) {
      p.add(std::string(dir) + "wx", random_matrix(gen, 3, 6, 0.6));
      p.add(std::string(dir) + "wh", random_matrix(gen, 2, 6, 0.6));
      p.add(std::string(dir) + "b", random_matrix(gen, 1, 6, 0.2));
    }
    const Matrix t = random_matrix(gen, 5, 4);
    check(p, [&](Tape& tape, const std::vector<Var>& v) {
      return reduce(tape, graph::birnn(tape, v[0], {v[1], v[2], v[3], v[4], v[5], v[6]}), t);
    });
  }
  {
    ParamSet p;
    p.add("mu", random_matrix(gen, 3, 2));
    p.add("lv", random_matrix(gen, 3, 2, 0.5));
    const Matrix eps = random_matrix(gen, 3, 2);
    const Matrix t = random_matrix(gen, 3, 2);
    check(p, [&](Tape& tape, const std::vector<Var>& v) {
      return graph::add(tape, reduce(tape, graph::gaussian_sample(tape, v[0], v[1], eps), t),
                        graph::kl_to_standard_normal(tape, v[0], v[1]));
    });
  }

  // Full objectives on a toy model.
  ssvc::ModelConfig c;
  c.input_dim = 3;
  c.encoder_widths = {2};
  c.latent_dim = 2;
  c.decoder_widths = {2};
  c.sigma2 = 0.5;
  ssvc::SsVcModel m(c, 14);
  const Matrix x = random_matrix(gen, 4, 3), y = random_matrix(gen, 4, 3);
  const RngState rng(8);
  using Loss = std::function<Var(Tape&, const ssvc::SsVcModel::Bound&, RngState&)>;
  const std::vector<Loss> losses = {
      [&](Tape& t, const auto& b, RngState& r) { return ssvc::loss_paired(t, b, x, y, r); },
      [&](Tape& t, const auto& b, RngState& r) {
        return ssvc::loss_unpaired(t, b, x, ssvc::Speaker::kSource, r);
      },
      [&](Tape& t, const auto& b, RngState& r) {
        return ssvc::loss_unpaired(t, b, y, ssvc::Speaker::kTarget, r);
      },
      [&](Tape& t, const auto& b, RngState&) { return ssvc::loss_supervised(t, b, x, y); },
  };
  for (const auto& loss : losses) {
    check(m.params(), [&](Tape& tape, const std::vector<Var>&) {
      const auto bound = m.bind(tape);
      RngState r = rng;
      return loss(tape, bound, r);
    });
  }
  const double secs = seconds_since(start);
  return {worst < 1e-4 && secs < 60.0,
          "max relative error " + fmt("%.3g", worst) + ", " + fmt("%.1f", secs) + " s"};
}

// --- 2: oracles --------------------------------------------------------------

Outcome oracles() {
  std::mt19937 gen(202);
  std::uniform_int_distribution<int> len(1, 8), dim(1, 3);
  int dtw_mismatch = 0;
  for (int i = 0; i < 200; ++i) {
    const int d = dim(gen);
    const Eigen::MatrixXd x = random_matrix(gen, len(gen), d);
    const Eigen::MatrixXd y = random_matrix(gen, len(gen), d);
    if (dtw(x, y).cost != testing::brute_force_dtw(x, y)) ++dtw_mismatch;
  }

  double post_err = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const int k = 1 + trial % 5, d = 1 + trial % 4;
    GmmVcModel g;
    g.weights = Eigen::VectorXd::Random(k).cwiseAbs().array() + 0.1;
    g.weights /= g.weights.sum();
    g.means = random_matrix(gen, k, d);
    g.vars = random_matrix(gen, k, d).cwiseAbs().array() + 0.2;
    const Eigen::VectorXd x = random_matrix(gen, d, 1);
    post_err = std::max(post_err, (posterior(g, x) -
                                   testing::naive_posterior(g.weights, g.means, g.vars, x))
                                      .cwiseAbs()
                                      .maxCoeff());
  }

  const std::vector<double> mu = {0.3, -1.2, 0.8}, lv = {-0.5, 0.4, 0.0};
  Tape tape;
  Matrix m(1, 3), l(1, 3);
  m << mu[0], mu[1], mu[2];
  l << lv[0], lv[1], lv[2];
  const double closed =
      tape.scalar(graph::kl_to_standard_normal(tape, tape.constant(m), tape.constant(l)));
  const double kl_err = std::abs(closed - testing::monte_carlo_kl(mu, lv, 1000000, 99));

  return {dtw_mismatch == 0 && post_err < 1e-10 && kl_err < 0.01,
          "dtw mismatches " + std::to_string(dtw_mismatch) + "/200, posterior error " +
              fmt("%.2g", post_err) + ", KL error " + fmt("%.4f", kl_err)};
}

// --- 3: term dropping --------------------------------------------------------

Outcome term_dropping() {
  std::mt19937 gen(303);
  std::uniform_int_distribution<int> small(1, 4), frames(1, 7);
  int violations = 0;
  for (int i = 0; i < 20; ++i) {
    ssvc::ModelConfig c;
    c.input_dim = small(gen) + 1;
    c.encoder_widths = {small(gen)};
    if (i % 2) c.encoder_widths.push_back(small(gen));
    c.latent_dim = small(gen);
    c.decoder_widths = {small(gen)};
    if (i % 3 == 0) c.decoder_widths.push_back(small(gen));
    ssvc::SsVcModel model(c, 1000 + i);
    const Matrix data = random_matrix(gen, frames(gen), c.input_dim);
    for (auto kind : {ssvc::BatchKind::kSourceOnly, ssvc::BatchKind::kTargetOnly}) {
      ssvc::TrainingBatch batch{kind, std::nullopt, std::nullopt};
      (kind == ssvc::BatchKind::kSourceOnly ? batch.x : batch.y) = data;
      model.params().zero_grad();
      Tape tape;
      RngState rng(i);
      tape.backward(ssvc::batch_loss(tape, model.bind(tape), batch,
                                     ssvc::Method::kSemiSupervised, rng));
      const auto other = kind == ssvc::BatchKind::kSourceOnly ? ssvc::Speaker::kTarget
                                                               : ssvc::Speaker::kSource;
      for (std::size_t p : model.decoder_parameter_indices(other)) {
        if (!(model.params()[p].grad.array() == 0.0).all()) ++violations;
      }
    }
  }
  return {violations == 0, "20 models, " + std::to_string(violations) +
                               " non-zero gradients on the absent decoder"};
}

// --- 4: degeneration ---------------------------------------------------------

std::string file_bytes(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

Outcome degeneration(const fs::path& work) {
  harness::SynthSpec spec;
  spec.train_pairs = 6;
  spec.source_only = 1;
  spec.target_only = 1;
  spec.validation_pairs = 2;
  spec.test_pairs = 1;
  spec.min_frames = 40;
  spec.max_frames = 60;
  spec.seed = 4;
  const auto corpus = harness::LoadedCorpus::load(
      harness::generate_synthetic_corpus(spec, work / "degeneration").entries);
  harness::RunSettings settings;
  settings.steps_per_epoch = 20;
  settings.max_epochs = 3;
  harness::CellData data{corpus.train_pairs, {}, {}};
  const auto semi =
      harness::train_cell(data, corpus.validation, ssvc::Method::kSemiSupervised, settings, 44);
  const auto vae =
      harness::train_cell(data, corpus.validation, ssvc::Method::kVaeSupervised, settings, 44);
  ssvc::save_checkpoint(work / "semi.ckpt", semi.model);
  ssvc::save_checkpoint(work / "vae.ckpt", vae.model);
  const bool same = file_bytes(work / "semi.ckpt") == file_bytes(work / "vae.ckpt");
  return {same, same ? "checkpoints byte-identical" : "checkpoints differ"};
}

// --- 5: GMM recovery ---------------------------------------------------------

Outcome gmm_recovery() {
  std::mt19937 gen(505);
  const Eigen::MatrixXd x = random_matrix(gen, 800, 6);
  const Eigen::MatrixXd a = random_matrix(gen, 6, 6);
  const Eigen::RowVectorXd b = random_matrix(gen, 1, 6);
  const Eigen::MatrixXd y = (x * a.transpose()).rowwise() + b;
  const GmmVcModel m = fit_conversion(fit_gmm(x, 1, 5), x, y);
  const double mse = (convert_frames(m, x) - y).rowwise().squaredNorm().mean();
  return {mse < 1e-6, "training MSE " + fmt("%.3g", mse)};
}

// --- 6 and 7: trends ---------------------------------------------------------

using Table = std::map<std::tuple<std::string, int, int, int>, double>;

Table index_rows(const std::vector<harness::ResultRow>& rows) {
  Table t;
  for (const auto& r : rows) t[{r.method, r.n_parallel, r.n_nonparallel, r.repeat}] = r.test_mcd_db;
  return t;
}

Outcome parallel_trend(const harness::LoadedCorpus& corpus, const harness::RunSettings& settings,
                       const fs::path& work, int repeats) {
  const auto start = Clock::now();
  harness::SweepSpec spec;
  spec.repeats = repeats;
  const auto rows = harness::run_parallel_sweep(corpus, spec, settings);
  const double secs = seconds_since(start);
  harness::write_results_csv(work / "parallel.csv", rows);
  const Table t = index_rows(rows);
  const int budget = spec.total_budget;
  std::ostringstream detail;
  bool pass = secs < 1800.0;
  for (int n : {1, 10}) {
    int wins = 0, wins_plain = 0;
    for (int r = 0; r < repeats; ++r) {
      const double semi = t.at({"semi_supervised", n, budget - n, r});
      wins += semi < t.at({"dblstm_vae", n, 0, r});
      wins_plain += semi < t.at({"dblstm", n, 0, r});
    }
    pass = pass && 3 * wins >= 2 * repeats;
    detail << "n=" << n << " semi better than dblstm_vae in " << wins << "/" << repeats
           << " (than dblstm in " << wins_plain << "/" << repeats << "); ";
  }
  double gap = 0.0;
  for (int r = 0; r < repeats; ++r) {
    gap = std::max(gap, std::abs(t.at({"semi_supervised", budget, 0, r}) -
                                 t.at({"dblstm_vae", budget, 0, r})));
  }
  pass = pass && gap <= 0.2;
  detail << "n=" << budget << " max gap " << fmt("%.3f", gap) << " dB; " << fmt("%.0f", secs)
         << " s";
  return {pass, detail.str()};
}

Outcome nonparallel_trend(const harness::LoadedCorpus& corpus,
                          const harness::RunSettings& settings, const fs::path& work,
                          int repeats) {
  harness::NonParallelSpec spec;
  spec.repeats = repeats;
  const auto rows = harness::run_nonparallel_sweep(corpus, spec, settings);
  harness::write_results_csv(work / "nonparallel.csv", rows);
  const Table t = index_rows(rows);
  const int n = spec.n_parallel;
  double first = 0.0, last = 0.0;
  int monotone = 0;
  for (int r = 0; r < repeats; ++r) {
    std::vector<double> curve;
    for (int c : spec.counts) curve.push_back(t.at({"semi_supervised", n, c, r}));
    first += curve.front() / repeats;
    last += curve.back() / repeats;
    monotone += std::is_sorted(curve.rbegin(), curve.rend());
  }
  return {last < first && 3 * monotone >= 2 * repeats,
          "mean MCD " + fmt("%.3f", first) + " dB at 0 unpaired, " + fmt("%.3f", last) +
              " dB at " + std::to_string(spec.counts.back()) + "; monotone in " +
              std::to_string(monotone) + "/" + std::to_string(repeats) + " repeats"};
}

// --- 8: MCD anchor -----------------------------------------------------------

Outcome mcd_anchor() {
  FrameMatrix a = FrameMatrix::Zero(1, kNumMcep), b = a;
  b(0, 0) = 1.0f;
  std::vector<double> ra(kNumMcep, 0.0), rb(kNumMcep, 0.0);
  rb[0] = 1.0;
  const double value = mcd(a, b);
  const double oracle = testing::reference_frame_mcd(ra, rb);
  std::mt19937 gen(808);
  const FrameMatrix r = random_matrix(gen, 30, kNumMcep).cast<float>();
  const double self = mcd(r, r);
  return {std::abs(value - 6.1421) < 1e-3 && std::abs(value - oracle) < 1e-12 && self == 0.0,
          "unit difference " + fmt("%.6f", value) + " dB (formula " + fmt("%.6f", oracle) +
              "), identical " + fmt("%g", self)};
}

// --- 9: CLI determinism ------------------------------------------------------

int cli(std::vector<std::string> args, std::string* err = nullptr) {
  args.insert(args.begin(), "semivc");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, e;
  const int code = cli::run_cli(static_cast<int>(argv.size()), argv.data(), out, e);
  if (err) *err = e.str();
  return code;
}

std::map<std::string, std::string> tree_bytes(const fs::path& root) {
  std::map<std::string, std::string> m;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (e.is_regular_file()) m[fs::relative(e.path(), root).string()] = file_bytes(e.path());
  }
  return m;
}

Outcome cli_determinism(const fs::path& work) {
  const auto run_all = [&](const fs::path& dir) {
    fs::create_directories(dir);
    std::ofstream(dir / "synth.cfg") << "train_pairs = 6\nsource_only = 4\ntarget_only = 4\n"
                                        "validation_pairs = 2\ntest_pairs = 2\n"
                                        "min_frames = 40\nmax_frames = 60\n";
    std::ofstream(dir / "run.cfg")
        << "manifest = corpus/manifest.txt\nencoder_widths = 6\nlatent_dim = 3\n"
           "decoder_widths = 6\nsteps_per_epoch = 10\nmax_epochs = 2\ncomponents = 2\n"
           "total_budget = 6\nparallel_counts = 1, 6\nrepeats = 2\nunpaired_counts = 0, 4\n";
    const auto d = [&](const char* p) { return (dir / p).string(); };
    const std::vector<std::vector<std::string>> commands = {
        {"gen-synth", "--config", d("synth.cfg"), "--seed", "9", "-o", d("corpus")},
        {"train-ssvc", "--config", d("run.cfg"), "--seed", "3", "-o", d("out/m.ckpt"), "--log",
         d("out/log.csv")},
        {"train-ssvc", "--config", d("run.cfg"), "--seed", "3", "--method", "dblstm", "-o",
         d("out/d.ckpt")},
        {"train-gmm", "--config", d("run.cfg"), "--seed", "3", "-o", d("out/g.vcgm")},
        {"stats", "--config", d("run.cfg"), "--speaker", "source", "-o", d("out/s.stats")},
        {"convert", "--model", d("out/m.ckpt"), d("corpus/source"), "-o", d("out/conv")},
        {"sweep-parallel", "--config", d("run.cfg"), "--seed", "3", "-o", d("out/par.csv")},
        {"sweep-nonparallel", "--config", d("run.cfg"), "--seed", "3", "-o", d("out/np.csv")},
    };
    for (const auto& c : commands) {
      std::string err;
      if (cli(c, &err) != 0) throw std::runtime_error(c[0] + " failed: " + err);
    }
    return tree_bytes(dir);
  };
  try {
    const auto a = run_all(work / "cli_a");
    const auto b = run_all(work / "cli_b");
    std::vector<std::string> differing;
    for (const auto& [name, bytes] : a) {
      auto it = b.find(name);
      if (it == b.end() || it->second != bytes) differing.push_back(name);
    }
    return {differing.empty() && a.size() == b.size(),
            std::to_string(a.size()) + " files compared, " + std::to_string(differing.size()) +
                " differ" + (differing.empty() ? "" : " (first: " + differing.front() + ")")};
  } catch (const std::exception& e) {
    return {false, e.what()};
  }
}

}  // namespace
}  // namespace semivc::acceptance

int main(int argc, char** argv) {
  using namespace semivc::acceptance;
  CLI::App app{"semivc acceptance criteria"};
  std::string work_dir;
  int jobs = 1, repeats = 3;
  std::vector<int> only;
  app.add_option("--work-dir", work_dir, "Scratch directory (kept); default is a temporary one");
  app.add_option("--jobs", jobs, "Worker threads for the sweeps")->check(CLI::PositiveNumber);
  app.add_option("--repeats", repeats, "Sweep repeats")->check(CLI::PositiveNumber);
  app.add_option("--only", only, "Run only these criteria")->delimiter(',');
  CLI11_PARSE(app, argc, argv);

  std::optional<semivc::testing::TempDir> temp;
  fs::path work;
  if (work_dir.empty()) {
    temp.emplace();
    work = temp->path();
  } else {
    work = work_dir;
    fs::create_directories(work);
  }

  std::optional<semivc::harness::LoadedCorpus> corpus;
  semivc::harness::RunSettings settings;
  settings.jobs = jobs;
  const auto synthetic = [&]() -> const semivc::harness::LoadedCorpus& {
    if (!corpus) {
      semivc::harness::SynthSpec spec;
      corpus = semivc::harness::LoadedCorpus::load(
          semivc::harness::generate_synthetic_corpus(spec, work / "synthetic").entries);
    }
    return *corpus;
  };

  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"gradient checks", gradients},
      {"oracle equivalence", oracles},
      {"unpaired terms drop the absent decoder", term_dropping},
      {"semi-supervised without unpaired data equals the paired ablation",
       [&] { return degeneration(work); }},
      {"single-component GMM recovers an affine map", gmm_recovery},
      {"parallel-count sweep trend",
       [&] { return parallel_trend(synthetic(), settings, work, repeats); }},
      {"unpaired-count sweep trend",
       [&] { return nonparallel_trend(synthetic(), settings, work, repeats); }},
      {"MCD unit anchor", mcd_anchor},
      {"CLI determinism", [&] { return cli_determinism(work); }},
  };

  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!only.empty() && std::find(only.begin(), only.end(), id) == only.end()) continue;
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failures += !o.pass;
    std::cout << (o.pass ? "PASS" : "FAIL") << " " << id << " " << criteria[i].first << ": "
              << o.detail << std::endl;
  }
  return failures == 0 ? 0 : 1;
}
