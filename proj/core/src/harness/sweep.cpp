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

#include "semivc/harness/sweep.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <exception>
#include <fstream>
#include <functional>
#include <mutex>
#include <numeric>
#include <sstream>
#include <thread>

#include "semivc/error.hpp"
#include "semivc/stats.hpp"

namespace semivc::harness {
namespace {

using graph::RngState;
using ssvc::Method;

std::vector<std::size_t> permutation(std::size_t n, RngState rng) {
  std::vector<std::size_t> p(n);
  std::iota(p.begin(), p.end(), 0);
  for (std::size_t i = n; i > 1; --i) std::swap(p[i - 1], p[rng.below(i)]);
  return p;
}

template <typename T>
std::vector<T> take(const std::vector<T>& from, const std::vector<std::size_t>& order, int n) {
  std::vector<T> out;
  out.reserve(n);
  for (int i = 0; i < n; ++i) out.push_back(from[order[i]]);
  return out;
}

// Subsets of one repeat: every cell of the repeat draws prefixes of the same
// permutations, so larger sets contain smaller ones.
struct RepeatDraw {
  std::vector<std::size_t> pairs, sources, targets;
  std::uint64_t model_seed = 0;
};

RepeatDraw draw_repeat(const LoadedCorpus& c, std::uint64_t seed, int repeat) {
  const RngState r = RngState(seed).fork(static_cast<std::uint64_t>(repeat));
  RepeatDraw d;
  d.pairs = permutation(c.train_pairs.size(), r.fork(1));
  d.sources = permutation(c.source_only.size(), r.fork(2));
  d.targets = permutation(c.target_only.size(), r.fork(3));
  d.model_seed = r.fork(4).next_u64();
  return d;
}

CellData make_cell(const LoadedCorpus& c, const RepeatDraw& d, int n_pairs, int n_unpaired) {
  CellData cell;
  cell.paired = take(c.train_pairs, d.pairs, n_pairs);
  cell.source_only = take(c.source_only, d.sources, (n_unpaired + 1) / 2);
  cell.target_only = take(c.target_only, d.targets, n_unpaired / 2);
  return cell;
}

void check_supply(const LoadedCorpus& c, int max_pairs, int max_unpaired) {
  std::vector<std::string> missing;
  const auto need = [&](const char* what, std::size_t have, int want) {
    if (static_cast<int>(have) < want) {
      missing.push_back(std::string(what) + ": need " + std::to_string(want) + ", have " +
                        std::to_string(have));
    }
  };
  need("train paired", c.train_pairs.size(), max_pairs);
  need("train source-only", c.source_only.size(), (max_unpaired + 1) / 2);
  need("train target-only", c.target_only.size(), max_unpaired / 2);
  need("test paired", c.test.size(), 1);
  if (!missing.empty()) {
    std::string msg = "insufficient data for sweep:";
    for (const auto& m : missing) msg += "\n  " + m;
    throw ConfigError(msg);
  }
}

struct CellTask {
  ResultRow row;
  Method method;
  CellData data;
  std::uint64_t seed;
};

std::vector<ResultRow> run_tasks(const LoadedCorpus& corpus, std::vector<CellTask>& tasks,
                                 const RunSettings& settings) {
  std::vector<ResultRow> rows(tasks.size());
  std::vector<std::exception_ptr> errors(tasks.size());
  const auto run_one = [&](std::size_t i) {
    try {
      CellTask& t = tasks[i];
      const auto start = std::chrono::steady_clock::now();
      TrainedCell cell = train_cell(t.data, corpus.validation, t.method, settings, t.seed);
      const auto stop = std::chrono::steady_clock::now();
      rows[i] = t.row;
      rows[i].test_mcd_db = ssvc::evaluate_mcd(cell.model, corpus.test, true);
      if (settings.timing) rows[i].train_seconds = std::chrono::duration<double>(stop - start).count();
    } catch (...) {
      errors[i] = std::current_exception();
    }
  };

  const int jobs = std::max(1, settings.jobs);
  if (jobs == 1) {
    for (std::size_t i = 0; i < tasks.size(); ++i) run_one(i);
  } else {
    std::mutex mu;
    std::size_t next = 0;
    std::vector<std::thread> pool;
    for (int w = 0; w < jobs; ++w) {
      pool.emplace_back([&] {
        for (;;) {
          std::size_t i;
          {
            std::lock_guard lock(mu);
            if (next == tasks.size()) return;
            i = next++;
          }
          run_one(i);
        }
      });
    }
    for (auto& th : pool) th.join();
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return rows;
}

}  // namespace

RunSettings::RunSettings() {
  model.encoder_widths = {16, 16};
  model.latent_dim = 8;
  model.decoder_widths = {16, 16};
}

RunSettings RunSettings::from_config(const KeyValueConfig& cfg) {
  RunSettings s;
  s.model.encoder_widths = cfg.get_int_list("encoder_widths", s.model.encoder_widths);
  s.model.latent_dim = static_cast<int>(cfg.get_int("latent_dim", s.model.latent_dim));
  s.model.decoder_widths = cfg.get_int_list("decoder_widths", s.model.decoder_widths);
  s.model.sigma2 = cfg.get_double("sigma2", s.model.sigma2);
  s.model.logvar_init_bias = cfg.get_double("logvar_init_bias", s.model.logvar_init_bias);
  s.learning_rate = cfg.get_double("learning_rate", s.learning_rate);
  s.steps_per_epoch = static_cast<int>(cfg.get_int("steps_per_epoch", s.steps_per_epoch));
  s.max_epochs = static_cast<int>(cfg.get_int("max_epochs", s.max_epochs));
  s.patience = static_cast<int>(cfg.get_int("patience", s.patience));
  s.chunk_frames = static_cast<int>(cfg.get_int("chunk_frames", s.chunk_frames));
  s.jobs = static_cast<int>(cfg.get_int("jobs", s.jobs));
  s.timing = cfg.get_bool("timing", s.timing);
  s.validate();
  return s;
}

void RunSettings::validate() const {
  model.validate();
  if (!(learning_rate > 0.0)) throw ConfigError("learning_rate must be positive");
  if (steps_per_epoch < 1 || max_epochs < 1 || patience < 1 || chunk_frames < 1 || jobs < 1) {
    throw ConfigError("steps_per_epoch, max_epochs, patience, chunk_frames and jobs must be >= 1");
  }
}

std::pair<FeatureSequence, FeatureSequence> align_pair(const FeatureSequence& x,
                                                       const FeatureSequence& y) {
  const DtwResult r = dtw(x.mcep.cast<double>(), y.mcep.cast<double>());
  AlignedPair a = warp_target(x, y, r.path);
  return {std::move(a.x), std::move(a.y_warped)};
}

TrainedCell train_cell(const CellData& data, const std::vector<ssvc::ValidationPair>& validation,
                       Method method, const RunSettings& settings, std::uint64_t seed) {
  settings.validate();
  if (data.paired.empty() && data.source_only.empty() && data.target_only.empty()) {
    throw InputError("train_cell: no training data");
  }
  const bool unpaired = method == Method::kSemiSupervised;
  std::vector<FeatureSequence> src, tgt;
  for (const auto& [x, y] : data.paired) {
    src.push_back(x);
    tgt.push_back(y);
  }
  if (unpaired) {
    src.insert(src.end(), data.source_only.begin(), data.source_only.end());
    tgt.insert(tgt.end(), data.target_only.begin(), data.target_only.end());
  }
  if (src.empty() || tgt.empty()) {
    throw InputError("train_cell: need utterances from both speakers to fit statistics");
  }

  TrainedCell out{ssvc::SsVcModel(settings.model, seed), {}};
  out.model.source_stats = fit_stats(src);
  out.model.target_stats = fit_stats(tgt);

  std::vector<std::pair<FeatureSequence, FeatureSequence>> paired;
  for (const auto& [x, y] : data.paired) {
    paired.emplace_back(normalize(x, *out.model.source_stats), normalize(y, *out.model.target_stats));
  }
  std::vector<FeatureSequence> so, to;
  if (unpaired) {
    for (const auto& x : data.source_only) so.push_back(normalize(x, *out.model.source_stats));
    for (const auto& y : data.target_only) to.push_back(normalize(y, *out.model.target_stats));
  }
  const auto batches = ssvc::make_batches(paired, so, to, settings.chunk_frames);

  ssvc::TrainConfig tc;
  tc.method = method;
  tc.learning_rate = settings.learning_rate;
  tc.steps_per_epoch = settings.steps_per_epoch;
  tc.max_epochs = settings.max_epochs;
  tc.patience = settings.patience;
  RngState rng = RngState(seed).fork(7);
  out.result = ssvc::train(out.model, batches, validation, tc, rng);
  return out;
}

LoadedCorpus LoadedCorpus::load(const DatasetManifest& manifest) {
  manifest.validate();
  LoadedCorpus c;
  const SplitEntries& train = manifest.split("train");
  for (const auto& p : train.paired) {
    c.train_pairs.push_back(align_pair(load_utterance(p.source), load_utterance(p.target)));
  }
  for (const auto& p : train.source_only) c.source_only.push_back(load_utterance(p));
  for (const auto& p : train.target_only) c.target_only.push_back(load_utterance(p));
  for (const auto& p : manifest.split("validation").paired) {
    c.validation.push_back({load_utterance(p.source), load_utterance(p.target)});
  }
  for (const auto& p : manifest.split("test").paired) {
    c.test.push_back({load_utterance(p.source), load_utterance(p.target)});
  }
  return c;
}

void SweepSpec::validate() const {
  if (total_budget < 1) throw ConfigError("total_budget must be >= 1");
  if (repeats < 1) throw ConfigError("repeats must be >= 1");
  if (parallel_counts.empty()) throw ConfigError("parallel_counts is empty");
  for (int n : parallel_counts) {
    if (n < 1 || n > total_budget) {
      throw ConfigError("parallel count " + std::to_string(n) + " outside [1, total_budget]");
    }
  }
}

void NonParallelSpec::validate() const {
  if (n_parallel < 1) throw ConfigError("n_parallel must be >= 1");
  if (repeats < 1) throw ConfigError("repeats must be >= 1");
  if (counts.empty()) throw ConfigError("counts is empty");
  for (std::size_t i = 0; i < counts.size(); ++i) {
    if (counts[i] < 0) throw ConfigError("unpaired counts must be >= 0");
    if (i > 0 && counts[i] <= counts[i - 1]) throw ConfigError("unpaired counts must ascend");
  }
}

std::vector<ResultRow> run_parallel_sweep(const LoadedCorpus& corpus, const SweepSpec& spec,
                                          const RunSettings& settings) {
  spec.validate();
  const int max_n = *std::max_element(spec.parallel_counts.begin(), spec.parallel_counts.end());
  const int min_n = *std::min_element(spec.parallel_counts.begin(), spec.parallel_counts.end());
  check_supply(corpus, max_n, spec.total_budget - min_n);

  std::vector<CellTask> tasks;
  for (int repeat = 0; repeat < spec.repeats; ++repeat) {
    const RepeatDraw d = draw_repeat(corpus, spec.seed, repeat);
    for (int n : spec.parallel_counts) {
      const int rest = spec.total_budget - n;
      for (Method m : {Method::kSupervised, Method::kVaeSupervised, Method::kSemiSupervised}) {
        const bool semi = m == Method::kSemiSupervised;
        ResultRow row{std::string(ssvc::method_name(m)), n, semi ? rest : 0, repeat, 0.0, {}};
        tasks.push_back({row, m, make_cell(corpus, d, n, semi ? rest : 0), d.model_seed});
      }
    }
  }
  return run_tasks(corpus, tasks, settings);
}

std::vector<ResultRow> run_nonparallel_sweep(const LoadedCorpus& corpus,
                                             const NonParallelSpec& spec,
                                             const RunSettings& settings) {
  spec.validate();
  check_supply(corpus, spec.n_parallel, spec.counts.back());

  std::vector<CellTask> tasks;
  for (int repeat = 0; repeat < spec.repeats; ++repeat) {
    const RepeatDraw d = draw_repeat(corpus, spec.seed, repeat);
    if (spec.supervised_reference) {
      for (Method m : {Method::kSupervised, Method::kVaeSupervised}) {
        ResultRow row{std::string(ssvc::method_name(m)), spec.n_parallel, 0, repeat, 0.0, {}};
        tasks.push_back({row, m, make_cell(corpus, d, spec.n_parallel, 0), d.model_seed});
      }
    }
    for (int count : spec.counts) {
      ResultRow row{std::string(ssvc::method_name(Method::kSemiSupervised)), spec.n_parallel, count,
                    repeat, 0.0, {}};
      tasks.push_back({row, Method::kSemiSupervised, make_cell(corpus, d, spec.n_parallel, count),
                       d.model_seed});
    }
  }
  return run_tasks(corpus, tasks, settings);
}

std::string results_csv(const std::vector<ResultRow>& rows) {
  std::ostringstream out;
  out << "method,n_parallel,n_nonparallel,repeat,test_mcd_db,train_seconds\n";
  char buf[64];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%.6f", r.test_mcd_db);
    out << r.method << ',' << r.n_parallel << ',' << r.n_nonparallel << ',' << r.repeat << ','
        << buf << ',';
    if (r.train_seconds) {
      std::snprintf(buf, sizeof buf, "%.3f", *r.train_seconds);
      out << buf;
    }
    out << '\n';
  }
  return out.str();
}

void write_results_csv(const std::filesystem::path& path, const std::vector<ResultRow>& rows) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write results: " + path.string());
  out << results_csv(rows);
}

std::vector<ResultRow> read_results_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot read results: " + path.string());
  std::string line;
  std::getline(in, line);
  if (line.rfind("method,n_parallel,n_nonparallel,repeat,test_mcd_db", 0) != 0) {
    throw FormatError(path.string() + ": unexpected results header", 0);
  }
  std::vector<ResultRow> rows;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ls(line);
    for (std::string cell; std::getline(ls, cell, ',');) f.push_back(cell);
    if (line.back() == ',') f.emplace_back();
    if (f.size() != 6) {
      throw FormatError(path.string() + ": line " + std::to_string(lineno) + " has " +
                        std::to_string(f.size()) + " fields", 0);
    }
    try {
      ResultRow r{f[0], std::stoi(f[1]), std::stoi(f[2]), std::stoi(f[3]), std::stod(f[4]), {}};
      if (!f[5].empty()) r.train_seconds = std::stod(f[5]);
      rows.push_back(r);
    } catch (const std::exception&) {
      throw FormatError(path.string() + ": bad number on line " + std::to_string(lineno), 0);
    }
  }
  return rows;
}

}  // namespace semivc::harness
