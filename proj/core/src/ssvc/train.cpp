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

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>

#include "semivc/error.hpp"
#include "semivc/graph/optimizer.hpp"
#include "semivc/ssvc.hpp"

namespace semivc::ssvc {
namespace {

void shuffle(std::vector<std::size_t>& v, graph::RngState& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    std::swap(v[i - 1], v[rng.below(i)]);
  }
}

std::vector<Matrix> snapshot(const graph::ParamSet& p) {
  std::vector<Matrix> out;
  out.reserve(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) out.push_back(p[i].value);
  return out;
}

}  // namespace

TrainResult train(SsVcModel& model, const std::vector<TrainingBatch>& batches,
                  const std::vector<ValidationPair>& validation, const TrainConfig& config,
                  graph::RngState& rng) {
  std::vector<std::size_t> usable;
  for (std::size_t i = 0; i < batches.size(); ++i) {
    batches[i].validate();
    if (config.method == Method::kSemiSupervised || batches[i].kind == BatchKind::kPaired) {
      usable.push_back(i);
    }
  }
  if (usable.empty()) {
    throw InputError("train: no batches usable by " + std::string(method_name(config.method)));
  }
  if (!validation.empty() && !(model.source_stats && model.target_stats)) {
    throw InputError("train: validation requires speaker statistics on the model");
  }
  if (config.max_epochs < 1) throw InputError("train: max_epochs must be >= 1");

  const std::int64_t steps_per_epoch =
      config.steps_per_epoch > 0 ? config.steps_per_epoch : static_cast<std::int64_t>(usable.size());

  graph::ParamSet& params = model.params();
  params.zero_grad();
  graph::AdamState opt;
  TrainResult result;
  std::vector<Matrix> best;
  int epochs_since_best = 0;
  int consecutive_bad = 0;

  std::vector<std::size_t> order = usable;
  std::size_t cursor = order.size();  // forces a shuffle on the first step

  for (int epoch = 1; epoch <= config.max_epochs; ++epoch) {
    double epoch_loss = 0.0;
    std::int64_t epoch_count = 0;
    for (std::int64_t s = 0; s < steps_per_epoch; ++s) {
      if (cursor == order.size()) {
        shuffle(order, rng);
        cursor = 0;
      }
      const TrainingBatch& batch = batches[order[cursor++]];

      Tape tape;
      const SsVcModel::Bound bound = model.bind(tape);
      const Var loss = batch_loss(tape, bound, batch, config.method, rng);
      const double value = tape.scalar(loss);
      ++result.steps;

      if (!std::isfinite(value)) {
        ++consecutive_bad;
        ++result.skipped_steps;
        params.zero_grad();
        if (consecutive_bad >= config.divergence_steps) {
          throw DivergenceError("training diverged: loss not finite for " +
                                std::to_string(consecutive_bad) + " consecutive steps (last at step " +
                                std::to_string(result.steps) + ", " +
                                std::string(batch_kind_name(batch.kind)) + " batch)");
        }
      } else {
        consecutive_bad = 0;
        tape.backward(loss);
        if (!graph::sgd_step(params, opt, config.learning_rate)) ++result.skipped_steps;
        epoch_loss += value;
        ++epoch_count;
      }
      const std::string kind = config.method == Method::kSupervised
                                   ? std::string("supervised")
                                   : std::string(batch_kind_name(batch.kind));
      result.log.push_back(TrainLogRow{result.steps, kind, value, std::nullopt});
    }

    result.epochs = epoch;
    TrainLogRow row{result.steps, "epoch",
                    epoch_count ? epoch_loss / static_cast<double>(epoch_count) : NAN,
                    std::nullopt};
    if (!validation.empty()) {
      const double val = evaluate_mcd(model, validation, config.align_validation);
      row.val_mcd = val;
      if (!result.best_val_mcd || val < *result.best_val_mcd) {
        result.best_val_mcd = val;
        result.best_epoch = epoch;
        best = snapshot(params);
        epochs_since_best = 0;
      } else {
        ++epochs_since_best;
      }
    } else {
      result.best_epoch = epoch;
    }
    result.log.push_back(row);
    if (!validation.empty() && epochs_since_best >= config.patience) break;
  }

  if (!best.empty()) {
    for (std::size_t i = 0; i < params.size(); ++i) params[i].value = best[i];
  }
  params.zero_grad();

  for (std::size_t i : usable) {
    switch (batches[i].kind) {
      case BatchKind::kPaired: ++model.info.paired; break;
      case BatchKind::kSourceOnly: ++model.info.source_only; break;
      case BatchKind::kTargetOnly: ++model.info.target_only; break;
    }
  }
  model.info.steps += result.steps;
  return result;
}

void write_training_log(const std::filesystem::path& path, const std::vector<TrainLogRow>& rows) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write training log: " + path.string());
  out << "step,term_kind,loss,val_mcd\n";
  char buf[64];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%.9g", r.loss);
    out << r.step << ',' << r.term_kind << ',' << buf << ',';
    if (r.val_mcd) {
      std::snprintf(buf, sizeof buf, "%.6f", *r.val_mcd);
      out << buf;
    }
    out << '\n';
  }
}

FeatureSequence ConversionResult::to_features() const {
  FeatureSequence fs;
  fs.mcep = mcep_hat;
  fs.c0 = c0;
  fs.f0 = f0_converted;
  fs.ap = ap;
  fs.frame_hop = frame_hop;
  return fs;
}

ConversionResult convert(const SsVcModel& model, const FeatureSequence& x,
                         const SpeakerStats& src_stats, const SpeakerStats& tgt_stats) {
  x.validate();
  const FeatureSequence xn = normalize(x, src_stats);
  const auto [mean, log_var] = model.encode(Matrix(xn.mcep.cast<double>()));
  FeatureSequence y = xn;
  y.mcep = model.decode_y(mean).cast<float>();
  y = denormalize(y, tgt_stats);

  ConversionResult out;
  out.mcep_hat = std::move(y.mcep);
  out.c0 = x.c0;
  out.f0_converted = convert_f0(x.f0, src_stats, tgt_stats);
  out.ap = x.ap;
  out.frame_hop = x.frame_hop;
  return out;
}

ConversionResult convert(const SsVcModel& model, const FeatureSequence& x) {
  if (!model.source_stats || !model.target_stats) {
    throw InputError("convert: model carries no speaker statistics");
  }
  return convert(model, x, *model.source_stats, *model.target_stats);
}

double evaluate_mcd(const SsVcModel& model, const std::vector<ValidationPair>& pairs, bool align) {
  std::vector<McdPair> mcd_pairs;
  mcd_pairs.reserve(pairs.size());
  for (const auto& p : pairs) {
    const FeatureSequence converted = convert(model, p.source).to_features();
    mcd_pairs.push_back(make_mcd_pair(converted, p.target, align));
  }
  return corpus_mcd(mcd_pairs);
}

}  // namespace semivc::ssvc
