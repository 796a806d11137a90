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

#include "semivc/error.hpp"
#include "semivc/ssvc.hpp"

namespace semivc::ssvc {
namespace {

struct LatentSample {
  Var z;
  Var kl;
};

LatentSample draw_latent(Tape& tape, const SsVcModel::Bound& bound, Var features,
                         graph::RngState& rng, Sampling sampling) {
  const SsVcModel::Posterior q = bound.model().encode(tape, bound, features);
  const Var z = sampling == Sampling::kPosteriorMean
                    ? q.mean
                    : graph::gaussian_sample(tape, q.mean, q.log_var, rng);
  return LatentSample{z, graph::kl_to_standard_normal(tape, q.mean, q.log_var)};
}

Var reconstruction(Tape& tape, const SsVcModel::Bound& bound, Var z, const Matrix& target,
                   Speaker speaker) {
  const double weight = 1.0 / (2.0 * bound.model().config().sigma2);
  const Var pred = bound.model().decode(tape, bound, z, speaker);
  return graph::scale(tape, graph::squared_error(tape, pred, target), weight);
}

void check_features(const SsVcModel& model, const Matrix& m, const char* what) {
  if (m.rows() < 1 || m.cols() != model.config().input_dim) {
    throw InputError(std::string(what) + ": expected T >= 1 rows of " +
                     std::to_string(model.config().input_dim) + " coefficients");
  }
}

}  // namespace

Var loss_paired(Tape& tape, const SsVcModel::Bound& bound, const Matrix& x, const Matrix& y,
                graph::RngState& rng, Sampling sampling, PairedBreakdown* breakdown) {
  check_features(bound.model(), x, "loss_paired");
  check_features(bound.model(), y, "loss_paired");
  if (x.rows() != y.rows()) {
    throw InputError("loss_paired: source has " + std::to_string(x.rows()) +
                     " frames but target has " + std::to_string(y.rows()));
  }
  const Var vx = tape.constant(x);
  const Var vy = tape.constant(y);

  const LatentSample from_x = draw_latent(tape, bound, vx, rng, sampling);
  const LatentSample from_y = draw_latent(tape, bound, vy, rng, sampling);

  Var halves[2];
  const LatentSample* samples[2] = {&from_x, &from_y};
  BoundTerms* terms[2] = {breakdown ? &breakdown->from_x : nullptr,
                          breakdown ? &breakdown->from_y : nullptr};
  for (int h = 0; h < 2; ++h) {
    const Var rx = reconstruction(tape, bound, samples[h]->z, x, Speaker::kSource);
    const Var ry = reconstruction(tape, bound, samples[h]->z, y, Speaker::kTarget);
    halves[h] = graph::add(tape, graph::add(tape, rx, ry), samples[h]->kl);
    if (terms[h]) {
      *terms[h] = BoundTerms{tape.scalar(rx), tape.scalar(ry), tape.scalar(samples[h]->kl)};
    }
  }
  return graph::scale(tape, graph::add(tape, halves[0], halves[1]), 0.5);
}

Var loss_unpaired(Tape& tape, const SsVcModel::Bound& bound, const Matrix& features,
                  Speaker speaker, graph::RngState& rng, Sampling sampling,
                  BoundTerms* breakdown) {
  check_features(bound.model(), features, "loss_unpaired");
  const Var v = tape.constant(features);
  const LatentSample s = draw_latent(tape, bound, v, rng, sampling);
  const Var r = reconstruction(tape, bound, s.z, features, speaker);
  if (breakdown) {
    *breakdown = BoundTerms{};
    (speaker == Speaker::kSource ? breakdown->recon_x : breakdown->recon_y) = tape.scalar(r);
    breakdown->kl = tape.scalar(s.kl);
  }
  return graph::add(tape, r, s.kl);
}

Var loss_supervised(Tape& tape, const SsVcModel::Bound& bound, const Matrix& x, const Matrix& y) {
  check_features(bound.model(), x, "loss_supervised");
  check_features(bound.model(), y, "loss_supervised");
  if (x.rows() != y.rows()) throw InputError("loss_supervised: length mismatch");
  const SsVcModel::Posterior q = bound.model().encode(tape, bound, tape.constant(x));
  return reconstruction(tape, bound, q.mean, y, Speaker::kTarget);
}

std::string_view batch_kind_name(BatchKind kind) {
  switch (kind) {
    case BatchKind::kPaired: return "paired";
    case BatchKind::kSourceOnly: return "source_only";
    case BatchKind::kTargetOnly: return "target_only";
  }
  return "unknown";
}

void TrainingBatch::validate() const {
  switch (kind) {
    case BatchKind::kPaired:
      if (!x || !y || x->rows() != y->rows()) {
        throw InputError("paired batch needs source and target of equal length");
      }
      break;
    case BatchKind::kSourceOnly:
      if (!x || y) throw InputError("source-only batch must carry only source features");
      break;
    case BatchKind::kTargetOnly:
      if (x || !y) throw InputError("target-only batch must carry only target features");
      break;
  }
}

std::string_view method_name(Method method) {
  switch (method) {
    case Method::kSupervised: return "dblstm";
    case Method::kVaeSupervised: return "dblstm_vae";
    case Method::kSemiSupervised: return "semi_supervised";
  }
  return "unknown";
}

Method parse_method(std::string_view name) {
  if (name == "dblstm" || name == "supervised") return Method::kSupervised;
  if (name == "dblstm_vae" || name == "vae") return Method::kVaeSupervised;
  if (name == "semi_supervised" || name == "semi") return Method::kSemiSupervised;
  throw InputError("unknown method '" + std::string(name) +
                   "' (expected dblstm, dblstm_vae or semi_supervised)");
}

Var batch_loss(Tape& tape, const SsVcModel::Bound& bound, const TrainingBatch& batch,
               Method method, graph::RngState& rng, Sampling sampling) {
  batch.validate();
  if (method != Method::kSemiSupervised && batch.kind != BatchKind::kPaired) {
    throw InputError(std::string(method_name(method)) + " trains on paired batches only");
  }
  switch (batch.kind) {
    case BatchKind::kPaired:
      return method == Method::kSupervised ? loss_supervised(tape, bound, *batch.x, *batch.y)
                                           : loss_paired(tape, bound, *batch.x, *batch.y, rng,
                                                         sampling);
    case BatchKind::kSourceOnly:
      return loss_unpaired(tape, bound, *batch.x, Speaker::kSource, rng, sampling);
    case BatchKind::kTargetOnly:
      return loss_unpaired(tape, bound, *batch.y, Speaker::kTarget, rng, sampling);
  }
  throw InputError("unknown batch kind");
}

double dataset_loss(const SsVcModel& model, const std::vector<TrainingBatch>& batches,
                    Method method, graph::RngState& rng, Sampling sampling) {
  double total = 0.0;
  for (const auto& b : batches) {
    Tape tape;
    const SsVcModel::Bound bound = model.bind_frozen(tape);
    total += tape.scalar(batch_loss(tape, bound, b, method, rng, sampling));
  }
  return total;
}

std::vector<TrainingBatch> make_batches(
    const std::vector<std::pair<FeatureSequence, FeatureSequence>>& paired,
    const std::vector<FeatureSequence>& source_only,
    const std::vector<FeatureSequence>& target_only, int chunk_frames) {
  if (chunk_frames < 1) throw InputError("chunk_frames must be positive");
  std::vector<TrainingBatch> out;
  const auto chunks = [&](int frames, auto&& emit) {
    for (int start = 0; start < frames; start += chunk_frames) {
      emit(start, std::min(chunk_frames, frames - start));
    }
  };
  for (const auto& [x, y] : paired) {
    if (x.frames() != y.frames()) throw InputError("paired sequences must be time aligned");
    chunks(x.frames(), [&](int s, int n) {
      out.push_back(TrainingBatch{BatchKind::kPaired,
                                  Matrix(x.mcep.middleRows(s, n).cast<double>()),
                                  Matrix(y.mcep.middleRows(s, n).cast<double>())});
    });
  }
  for (const auto& x : source_only) {
    chunks(x.frames(), [&](int s, int n) {
      out.push_back(TrainingBatch{BatchKind::kSourceOnly,
                                  Matrix(x.mcep.middleRows(s, n).cast<double>()), std::nullopt});
    });
  }
  for (const auto& y : target_only) {
    chunks(y.frames(), [&](int s, int n) {
      out.push_back(TrainingBatch{BatchKind::kTargetOnly, std::nullopt,
                                  Matrix(y.mcep.middleRows(s, n).cast<double>())});
    });
  }
  return out;
}

}  // namespace semivc::ssvc
