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

#include "cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "semivc/align.hpp"
#include "semivc/error.hpp"
#include "semivc/features.hpp"
#include "semivc/gmm.hpp"
#include "semivc/harness/config.hpp"
#include "semivc/harness/manifest.hpp"
#include "semivc/harness/sweep.hpp"
#include "semivc/harness/synth.hpp"
#include "semivc/ssvc.hpp"
#include "semivc/stats.hpp"

namespace semivc::cli {
namespace fs = std::filesystem;
namespace {

using harness::DatasetManifest;
using harness::KeyValueConfig;

constexpr std::uint64_t kDefaultSeed = 1;

// Files of a directory (sorted) or the single file itself.
std::vector<fs::path> list_inputs(const fs::path& p) {
  if (!fs::exists(p)) throw InputError("no such file or directory: " + p.string());
  if (!fs::is_directory(p)) return {p};
  std::vector<fs::path> out;
  for (const auto& e : fs::directory_iterator(p)) {
    const auto ext = e.path().extension();
    if (e.is_regular_file() && (ext == ".vcf" || ext == ".wav" || ext == ".WAV")) {
      out.push_back(e.path());
    }
  }
  std::sort(out.begin(), out.end());
  if (out.empty()) throw InputError("no .vcf or .wav files in " + p.string());
  return out;
}

KeyValueConfig load_config(const std::string& path) {
  return path.empty() ? KeyValueConfig{} : KeyValueConfig::load(path);
}

DatasetManifest load_manifest(const KeyValueConfig& cfg) {
  const fs::path path = cfg.get_path("manifest");
  if (!fs::exists(path)) {
    throw ConfigError("config key 'manifest': file not found: " + path.string());
  }
  return DatasetManifest::load(path);
}

std::uint64_t resolve_seed(const KeyValueConfig& cfg, const std::optional<std::uint64_t>& flag) {
  if (flag) return *flag;
  return static_cast<std::uint64_t>(cfg.get_int("seed", kDefaultSeed));
}

fs::path output_path(const fs::path& out_dir, const fs::path& input) {
  return out_dir / (input.stem().string() + ".vcf");
}

struct Context {
  std::ostream& out;
  std::ostream& err;
};

// Creates the parent directory of an output file and returns the path.
fs::path output_file(const fs::path& p) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  return p;
}

// --- extract ---------------------------------------------------------------

struct ExtractArgs {
  std::string input, output;
};

void cmd_extract(const ExtractArgs& a, Context& c) {
  const auto inputs = list_inputs(a.input);
  const bool to_dir = inputs.size() > 1 || fs::is_directory(a.input);
  if (to_dir) fs::create_directories(a.output);
  for (const auto& in : inputs) {
    const FeatureSequence fs = extract_features(load_wav(in));
    const fs::path dst = to_dir ? output_path(a.output, in) : fs::path(a.output);
    write_features(output_file(dst), fs);
    c.out << in.string() << " -> " << dst.string() << " (" << fs.frames() << " frames)\n";
  }
}

// --- align -----------------------------------------------------------------

struct AlignArgs {
  std::string source, target, config, split = "train", output;
  std::optional<int> band;
};

void write_aligned(const fs::path& out_dir, const std::string& stem, const FeatureSequence& x,
                   const FeatureSequence& y, double cost, Context& c) {
  fs::create_directories(out_dir / "source");
  fs::create_directories(out_dir / "target");
  write_features(out_dir / "source" / (stem + ".vcf"), x);
  write_features(out_dir / "target" / (stem + ".vcf"), y);
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", cost);
  c.out << stem << ": " << x.frames() << " frames, cost " << buf << "\n";
}

void cmd_align(const AlignArgs& a, Context& c) {
  DtwOptions opts;
  opts.band_radius = a.band;
  const auto run = [&](const fs::path& sp, const fs::path& tp) {
    const FeatureSequence x = harness::load_utterance(sp);
    const FeatureSequence y = harness::load_utterance(tp);
    const DtwResult r = dtw(x.mcep.cast<double>(), y.mcep.cast<double>(), opts);
    const AlignedPair p = warp_target(x, y, r.path);
    write_aligned(a.output, sp.stem().string(), p.x, p.y_warped, r.cost, c);
  };
  if (!a.config.empty()) {
    const DatasetManifest m = load_manifest(load_config(a.config));
    for (const auto& p : m.split(a.split).paired) run(p.source, p.target);
  } else {
    if (a.source.empty() || a.target.empty()) {
      throw InputError("align: give --source and --target, or --config with a manifest");
    }
    run(a.source, a.target);
  }
}

// --- stats -----------------------------------------------------------------

struct StatsArgs {
  std::vector<std::string> inputs;
  std::string config, speaker, split = "train", output;
};

void cmd_stats(const StatsArgs& a, Context& c) {
  std::vector<FeatureSequence> corpus;
  if (!a.config.empty()) {
    if (a.speaker != "source" && a.speaker != "target") {
      throw InputError("stats: --speaker must be 'source' or 'target' with --config");
    }
    const bool src = a.speaker == "source";
    const DatasetManifest manifest = load_manifest(load_config(a.config));
    const auto& e = manifest.split(a.split);
    for (const auto& p : e.paired) corpus.push_back(harness::load_utterance(src ? p.source : p.target));
    for (const auto& p : src ? e.source_only : e.target_only) corpus.push_back(harness::load_utterance(p));
  }
  for (const auto& in : a.inputs) {
    for (const auto& p : list_inputs(in)) corpus.push_back(harness::load_utterance(p));
  }
  if (corpus.empty()) throw InputError("stats: no input utterances");
  const SpeakerStats s = fit_stats(corpus);
  write_stats(output_file(a.output), s);
  c.out << "fitted statistics over " << corpus.size() << " utterances -> " << a.output << "\n";
}

// --- shared training data --------------------------------------------------

struct TrainingData {
  std::vector<std::pair<FeatureSequence, FeatureSequence>> paired;  // aligned, raw
  std::vector<FeatureSequence> source_only, target_only;
  std::vector<ssvc::ValidationPair> validation;
};

TrainingData load_training(const DatasetManifest& m, std::optional<int> max_pairs) {
  TrainingData d;
  const auto& train = m.split("train");
  const std::size_t n = max_pairs ? std::min<std::size_t>(*max_pairs, train.paired.size())
                                  : train.paired.size();
  for (std::size_t i = 0; i < n; ++i) {
    d.paired.push_back(harness::align_pair(harness::load_utterance(train.paired[i].source),
                                           harness::load_utterance(train.paired[i].target)));
  }
  for (const auto& p : train.source_only) d.source_only.push_back(harness::load_utterance(p));
  for (const auto& p : train.target_only) d.target_only.push_back(harness::load_utterance(p));
  for (const auto& p : m.split("validation").paired) {
    d.validation.push_back({harness::load_utterance(p.source), harness::load_utterance(p.target)});
  }
  return d;
}

// --- train-gmm -------------------------------------------------------------

struct TrainGmmArgs {
  std::string config, output;
  std::optional<std::uint64_t> seed;
};

void cmd_train_gmm(const TrainGmmArgs& a, Context& c) {
  const KeyValueConfig cfg = load_config(a.config);
  const TrainingData d = load_training(load_manifest(cfg), std::nullopt);
  if (d.paired.empty()) throw ConfigError("train-gmm: manifest has no paired train utterances");
  const int k = static_cast<int>(cfg.get_int("components", 8));

  std::vector<FeatureSequence> xs, ys;
  for (const auto& [x, y] : d.paired) {
    xs.push_back(x);
    ys.push_back(y);
  }
  const SpeakerStats ss = fit_stats(xs), ts = fit_stats(ys);
  std::vector<AlignedPair> pairs;
  Eigen::Index total = 0;
  for (const auto& [x, y] : d.paired) {
    AlignedPair p{normalize(x, ss), normalize(y, ts), {}};
    total += p.x.frames();
    pairs.push_back(std::move(p));
  }
  Eigen::MatrixXd frames(total, pairs.front().x.dims());
  Eigen::Index row = 0;
  for (const auto& p : pairs) {
    frames.middleRows(row, p.x.frames()) = p.x.mcep.cast<double>();
    row += p.x.frames();
  }
  GmmFitOptions opts;
  opts.max_iterations = static_cast<int>(cfg.get_int("max_iterations", opts.max_iterations));
  GmmFitReport fit_report;
  GmmVcModel model = fit_gmm(frames, k, resolve_seed(cfg, a.seed), opts, &fit_report);
  ConversionFitReport conv_report;
  model = fit_conversion(model, pairs, &conv_report);
  model.source_stats = ss;
  model.target_stats = ts;
  save_gmm(output_file(a.output), model);
  char buf[128];
  std::snprintf(buf, sizeof buf, "K=%d, %d EM iterations, training MSE %.6g", k,
                fit_report.iterations, conv_report.train_mse);
  c.out << buf << " -> " << a.output << "\n";
}

// --- train-ssvc ------------------------------------------------------------

struct TrainSsvcArgs {
  std::string config, output, log;
  std::optional<std::uint64_t> seed;
  std::optional<int> parallel;
  std::string method;
};

void cmd_train_ssvc(const TrainSsvcArgs& a, Context& c) {
  const KeyValueConfig cfg = load_config(a.config);
  const harness::RunSettings settings = harness::RunSettings::from_config(cfg);
  const ssvc::Method method =
      ssvc::parse_method(a.method.empty() ? cfg.get_string("method", "semi_supervised") : a.method);
  std::optional<int> parallel = a.parallel;
  if (!parallel && cfg.has("parallel")) parallel = static_cast<int>(cfg.get_int("parallel"));
  if (parallel && *parallel < 0) throw InputError("--parallel must be >= 0");

  const TrainingData d = load_training(load_manifest(cfg), parallel);
  harness::CellData cell{d.paired, d.source_only, d.target_only};
  if (method != ssvc::Method::kSemiSupervised && cell.paired.empty()) {
    throw ConfigError(std::string(ssvc::method_name(method)) + " needs at least one paired utterance");
  }
  harness::TrainedCell trained =
      harness::train_cell(cell, d.validation, method, settings, resolve_seed(cfg, a.seed));
  ssvc::save_checkpoint(output_file(a.output), trained.model);
  if (!a.log.empty()) ssvc::write_training_log(output_file(a.log), trained.result.log);

  const auto& r = trained.result;
  c.out << ssvc::method_name(method) << ": " << r.steps << " steps, " << r.epochs << " epochs";
  if (r.best_val_mcd) {
    char buf[64];
    std::snprintf(buf, sizeof buf, ", best validation MCD %.2f dB (epoch %d)", *r.best_val_mcd,
                  r.best_epoch);
    c.out << buf;
  }
  c.out << " -> " << a.output << "\n";
  if (!trained.model.info.cross_coupled()) {
    c.err << "warning: no paired utterances; the speaker decoders were never cross-coupled\n";
  }
}

// --- convert ---------------------------------------------------------------

struct ConvertArgs {
  std::string model, input, output;
};

void cmd_convert(const ConvertArgs& a, Context& c) {
  if (!fs::is_regular_file(a.model)) throw InputError("cannot read model: " + a.model);
  std::function<FeatureSequence(const FeatureSequence&)> fn;
  if (ssvc::is_checkpoint(a.model)) {
    auto model = std::make_shared<ssvc::SsVcModel>(ssvc::load_checkpoint(a.model));
    if (!model->info.cross_coupled()) {
      c.err << "warning: " << a.model
            << " was trained without paired data; its decoders were never cross-coupled and"
               " conversions are unlikely to be meaningful\n";
    }
    fn = [model](const FeatureSequence& x) { return ssvc::convert(*model, x).to_features(); };
  } else if (is_gmm_model(a.model)) {
    auto model = std::make_shared<GmmVcModel>(load_gmm(a.model));
    fn = [model](const FeatureSequence& x) { return convert_gmm(*model, x); };
  } else {
    throw FormatError(a.model + ": not a semivc model", 0);
  }

  const auto inputs = list_inputs(a.input);
  const bool to_dir = inputs.size() > 1 || fs::is_directory(a.input);
  if (to_dir) fs::create_directories(a.output);
  for (const auto& in : inputs) {
    const fs::path dst = to_dir ? output_path(a.output, in) : fs::path(a.output);
    write_features(output_file(dst), fn(harness::load_utterance(in)));
    c.out << in.string() << " -> " << dst.string() << "\n";
  }
}

// --- evaluate --------------------------------------------------------------

struct EvaluateArgs {
  std::string converted, reference;
  bool no_align = false;
};

void cmd_evaluate(const EvaluateArgs& a, Context& c) {
  const auto conv = list_inputs(a.converted);
  std::map<std::string, fs::path> refs;
  for (const auto& p : list_inputs(a.reference)) refs[p.stem().string()] = p;
  std::vector<McdPair> pairs;
  for (const auto& p : conv) {
    const auto it = refs.find(p.stem().string());
    if (it == refs.end()) {
      if (conv.size() == 1 && refs.size() == 1) {
        pairs.push_back(make_mcd_pair(harness::load_utterance(p),
                                      harness::load_utterance(refs.begin()->second), !a.no_align));
        continue;
      }
      throw InputError("evaluate: no reference for '" + p.stem().string() + "'");
    }
    pairs.push_back(
        make_mcd_pair(harness::load_utterance(p), harness::load_utterance(it->second), !a.no_align));
  }
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2f dB", corpus_mcd(pairs));
  c.out << "MCD over " << pairs.size() << " utterances: " << buf << "\n";
}

// --- gen-synth -------------------------------------------------------------

struct GenSynthArgs {
  std::string config, output;
  std::optional<std::uint64_t> seed;
};

void cmd_gen_synth(const GenSynthArgs& a, Context& c) {
  const KeyValueConfig cfg = load_config(a.config);
  harness::SynthSpec s;
  const auto geti = [&](const char* k, int& v) { v = static_cast<int>(cfg.get_int(k, v)); };
  geti("train_pairs", s.train_pairs);
  geti("source_only", s.source_only);
  geti("target_only", s.target_only);
  geti("validation_pairs", s.validation_pairs);
  geti("test_pairs", s.test_pairs);
  geti("min_frames", s.min_frames);
  geti("max_frames", s.max_frames);
  geti("latent_dim", s.latent_dim);
  geti("hidden", s.hidden);
  s.coef_scale = cfg.get_double("coef_scale", s.coef_scale);
  s.noise_std = cfg.get_double("noise_std", s.noise_std);
  s.offset_std = cfg.get_double("offset_std", s.offset_std);
  s.map_correlation = cfg.get_double("map_correlation", s.map_correlation);
  s.seed = resolve_seed(cfg, a.seed);
  const auto corpus = harness::generate_synthetic_corpus(s, a.output);
  c.out << "wrote " << corpus.entries.split("train").size() << " train, "
        << corpus.entries.split("validation").size() << " validation and "
        << corpus.entries.split("test").size() << " test entries; manifest "
        << corpus.manifest.string() << "\n";
}

// --- sweeps ----------------------------------------------------------------

struct SweepArgs {
  std::string config, output;
  std::optional<std::uint64_t> seed;
  std::optional<int> jobs;
  bool timing = false;
};

harness::RunSettings sweep_settings(const KeyValueConfig& cfg, const SweepArgs& a) {
  harness::RunSettings s = harness::RunSettings::from_config(cfg);
  if (a.jobs) s.jobs = *a.jobs;
  if (a.timing) s.timing = true;
  s.validate();
  return s;
}

void report_rows(const std::vector<harness::ResultRow>& rows, const std::string& path, Context& c) {
  harness::write_results_csv(output_file(path), rows);
  c.out << rows.size() << " rows -> " << path << "\n";
}

void cmd_sweep_parallel(const SweepArgs& a, Context& c) {
  const KeyValueConfig cfg = load_config(a.config);
  harness::SweepSpec spec;
  spec.total_budget = static_cast<int>(cfg.get_int("total_budget", spec.total_budget));
  spec.parallel_counts = cfg.get_int_list("parallel_counts", spec.parallel_counts);
  spec.repeats = static_cast<int>(cfg.get_int("repeats", spec.repeats));
  spec.seed = resolve_seed(cfg, a.seed);
  const auto settings = sweep_settings(cfg, a);
  const auto corpus = harness::LoadedCorpus::load(load_manifest(cfg));
  report_rows(harness::run_parallel_sweep(corpus, spec, settings), a.output, c);
}

void cmd_sweep_nonparallel(const SweepArgs& a, Context& c) {
  const KeyValueConfig cfg = load_config(a.config);
  harness::NonParallelSpec spec;
  spec.n_parallel = static_cast<int>(cfg.get_int("n_parallel", spec.n_parallel));
  spec.counts = cfg.get_int_list("unpaired_counts", spec.counts);
  spec.repeats = static_cast<int>(cfg.get_int("repeats", spec.repeats));
  spec.supervised_reference = cfg.get_bool("supervised_reference", spec.supervised_reference);
  spec.seed = resolve_seed(cfg, a.seed);
  const auto settings = sweep_settings(cfg, a);
  const auto corpus = harness::LoadedCorpus::load(load_manifest(cfg));
  report_rows(harness::run_nonparallel_sweep(corpus, spec, settings), a.output, c);
}

}  // namespace

int run_cli(int argc, const char* const* argv) { return run_cli(argc, argv, std::cout, std::cerr); }

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"semivc: voice conversion features, baselines and semi-supervised training"};
  app.require_subcommand(1);
  Context ctx{out, err};
  std::function<void()> action;

  ExtractArgs ex;
  auto* s_ex = app.add_subcommand("extract", "Extract features from a WAV file or directory");
  s_ex->add_option("input", ex.input, "WAV file or directory")->required();
  s_ex->add_option("-o,--output", ex.output, "Feature file or directory")->required();
  s_ex->callback([&] { action = [&] { cmd_extract(ex, ctx); }; });

  AlignArgs al;
  auto* s_al = app.add_subcommand("align", "DTW-align source/target pairs");
  s_al->add_option("--source", al.source, "Source utterance");
  s_al->add_option("--target", al.target, "Target utterance");
  s_al->add_option("--config", al.config, "Config naming a manifest (aligns its paired entries)");
  s_al->add_option("--split", al.split, "Manifest split")->capture_default_str();
  s_al->add_option("--band", al.band, "Sakoe-Chiba band radius in frames");
  s_al->add_option("-o,--output", al.output, "Output directory")->required();
  s_al->callback([&] { action = [&] { cmd_align(al, ctx); }; });

  StatsArgs st;
  auto* s_st = app.add_subcommand("stats", "Fit speaker normalization statistics");
  s_st->add_option("inputs", st.inputs, "Feature files or directories");
  s_st->add_option("--config", st.config, "Config naming a manifest");
  s_st->add_option("--speaker", st.speaker, "source or target (with --config)");
  s_st->add_option("--split", st.split, "Manifest split")->capture_default_str();
  s_st->add_option("-o,--output", st.output, "Statistics file")->required();
  s_st->callback([&] { action = [&] { cmd_stats(st, ctx); }; });

  TrainGmmArgs tg;
  auto* s_tg = app.add_subcommand("train-gmm", "Train the GMM conversion baseline");
  s_tg->add_option("--config", tg.config, "Config file (manifest, components)")->required();
  s_tg->add_option("--seed", tg.seed, "Seed (overrides config)");
  s_tg->add_option("-o,--output", tg.output, "Model file")->required();
  s_tg->callback([&] { action = [&] { cmd_train_gmm(tg, ctx); }; });

  TrainSsvcArgs ts;
  auto* s_ts = app.add_subcommand("train-ssvc", "Train a recurrent conversion model");
  s_ts->add_option("--config", ts.config, "Config file")->required();
  s_ts->add_option("--seed", ts.seed, "Seed (overrides config)");
  s_ts->add_option("--method", ts.method, "dblstm, dblstm_vae or semi_supervised");
  s_ts->add_option("--parallel", ts.parallel, "Use only the first N paired utterances");
  s_ts->add_option("--log", ts.log, "Training log CSV");
  s_ts->add_option("-o,--output", ts.output, "Checkpoint file")->required();
  s_ts->callback([&] { action = [&] { cmd_train_ssvc(ts, ctx); }; });

  ConvertArgs cv;
  auto* s_cv = app.add_subcommand("convert", "Convert source features with a trained model");
  s_cv->add_option("--model", cv.model, "GMM model or recurrent checkpoint")->required();
  s_cv->add_option("input", cv.input, "Feature/WAV file or directory")->required();
  s_cv->add_option("-o,--output", cv.output, "Output file or directory")->required();
  s_cv->callback([&] { action = [&] { cmd_convert(cv, ctx); }; });

  EvaluateArgs ev;
  auto* s_ev = app.add_subcommand("evaluate", "Mel-cepstral distortion between two sets");
  s_ev->add_option("converted", ev.converted, "Converted file or directory")->required();
  s_ev->add_option("reference", ev.reference, "Reference file or directory")->required();
  s_ev->add_flag("--no-align", ev.no_align, "Require equal lengths instead of DTW alignment");
  s_ev->callback([&] { action = [&] { cmd_evaluate(ev, ctx); }; });

  GenSynthArgs gs;
  auto* s_gs = app.add_subcommand("gen-synth", "Generate the synthetic two-speaker corpus");
  s_gs->add_option("--config", gs.config, "Optional config with corpus sizes");
  s_gs->add_option("--seed", gs.seed, "Seed (overrides config)");
  s_gs->add_option("-o,--output", gs.output, "Output directory")->required();
  s_gs->callback([&] { action = [&] { cmd_gen_synth(gs, ctx); }; });

  SweepArgs sp, sn;
  for (auto [name, args, help, fn] :
       {std::tuple{"sweep-parallel", &sp, "Vary the number of parallel utterances at fixed budget",
                   &cmd_sweep_parallel},
        std::tuple{"sweep-nonparallel", &sn, "Vary the unpaired count with one parallel pair",
                   &cmd_sweep_nonparallel}}) {
    auto* s = app.add_subcommand(name, help);
    s->add_option("--config", args->config, "Config file")->required();
    s->add_option("--seed", args->seed, "Seed (overrides config)");
    s->add_option("--jobs", args->jobs, "Worker threads");
    s->add_flag("--timing", args->timing, "Record train_seconds (breaks byte reproducibility)");
    s->add_option("-o,--output", args->output, "Results CSV")->required();
    s->callback([&, args = args, fn = fn] { action = [&, args, fn] { fn(*args, ctx); }; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return 1;
  }

  try {
    action();
    return 0;
  } catch (const InputError& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "failed: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace semivc::cli
