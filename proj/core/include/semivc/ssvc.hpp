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

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "semivc/features.hpp"
#include "semivc/graph/ops.hpp"
#include "semivc/graph/params.hpp"
#include "semivc/graph/rng.hpp"
#include "semivc/graph/tape.hpp"
#include "semivc/stats.hpp"

namespace semivc::ssvc {

using graph::Matrix;
using graph::Tape;
using graph::Var;

enum class Speaker { kSource, kTarget };

struct ModelConfig {
  int input_dim = kNumMcep;
  std::vector<int> encoder_widths = {32, 64};  // hidden units per direction
  int latent_dim = 16;
  std::vector<int> decoder_widths = {64, 32};
  double sigma2 = 1e-3;  // fixed decoder output variance
  double logvar_init_bias = 0.0;

  void validate() const;
  std::string to_text() const;
  static ModelConfig from_text(const std::string& text);
  bool operator==(const ModelConfig&) const = default;
};

// Data each model has been trained on; carried in the checkpoint.
struct TrainingInfo {
  std::int64_t paired = 0;
  std::int64_t source_only = 0;
  std::int64_t target_only = 0;
  std::int64_t steps = 0;

  bool cross_coupled() const { return paired > 0; }
};

// Shared bidirectional-recurrent encoder with mean / log-variance heads and
// two speaker decoders of identical architecture. All parameters live in one
// ParamSet with prefixes enc., head_mu., head_logvar., dec_x., dec_y.
class SsVcModel {
 public:
  SsVcModel(const ModelConfig& config, std::uint64_t seed);

  const ModelConfig& config() const { return config_; }
  graph::ParamSet& params() { return params_; }
  const graph::ParamSet& params() const { return params_; }

  std::optional<SpeakerStats> source_stats;
  std::optional<SpeakerStats> target_stats;
  TrainingInfo info;

  // Parameter handles on a tape. `trainable` binds parameters (gradients flow
  // back into the ParamSet); otherwise values are recorded as constants.
  class Bound {
   public:
    const SsVcModel& model() const { return *model_; }
    Var operator[](std::size_t index) const { return vars_[index]; }

   private:
    friend class SsVcModel;
    const SsVcModel* model_ = nullptr;
    std::vector<Var> vars_;
  };
  Bound bind(Tape& tape);
  Bound bind_frozen(Tape& tape) const;

  struct Posterior {
    Var mean;
    Var log_var;  // clamped to [kLogVarMin, kLogVarMax]
  };
  Posterior encode(Tape& tape, const Bound& bound, Var features) const;
  Var decode(Tape& tape, const Bound& bound, Var latent, Speaker speaker) const;

  // Tape-free helpers.
  std::pair<Matrix, Matrix> encode(const Matrix& features) const;
  Matrix decode_x(const Matrix& latent) const;
  Matrix decode_y(const Matrix& latent) const;

  // Names of the parameters belonging to one decoder.
  std::vector<std::size_t> decoder_parameter_indices(Speaker speaker) const;
  std::vector<std::size_t> encoder_parameter_indices() const;

 private:
  struct BiLayer {
    std::size_t fwd_wx, fwd_wh, fwd_b, bwd_wx, bwd_wh, bwd_b;
  };
  struct AffineLayer {
    std::size_t w, b;
  };
  struct Decoder {
    std::vector<BiLayer> layers;
    AffineLayer out;
  };

  BiLayer add_bilayer(const std::string& prefix, int input, int hidden, graph::RngState& rng);
  AffineLayer add_affine(const std::string& prefix, int input, int output, graph::RngState& rng,
                         double bias);
  Var run_bilayers(Tape& tape, const Bound& bound, Var x, const std::vector<BiLayer>& layers) const;

  ModelConfig config_;
  graph::ParamSet params_;
  std::vector<BiLayer> encoder_;
  AffineLayer head_mu_{}, head_logvar_{};
  Decoder decoders_[2];
};

// How the latent is drawn in the bound estimators.
enum class Sampling { kReparameterized, kPosteriorMean };

// One single-sample bound estimate. Reconstruction terms are already scaled
// by 1/(2 sigma^2); unused terms are zero.
struct BoundTerms {
  double recon_x = 0.0;
  double recon_y = 0.0;
  double kl = 0.0;

  double total() const { return recon_x + recon_y + kl; }
};

struct PairedBreakdown {
  BoundTerms from_x;  // Z ~ q(Z|X)
  BoundTerms from_y;  // Z ~ q(Z|Y)
};

// -L_{X,Y}: mean of the two single-sample estimates, with the noise for the
// q(Z|X) sample drawn before the q(Z|Y) sample.
Var loss_paired(Tape& tape, const SsVcModel::Bound& bound, const Matrix& x, const Matrix& y,
                graph::RngState& rng, Sampling sampling = Sampling::kReparameterized,
                PairedBreakdown* breakdown = nullptr);

// -L_{X,_} (speaker = source) or -L_{_,Y} (speaker = target). The other
// decoder does not appear in the graph.
Var loss_unpaired(Tape& tape, const SsVcModel::Bound& bound, const Matrix& features,
                  Speaker speaker, graph::RngState& rng,
                  Sampling sampling = Sampling::kReparameterized,
                  BoundTerms* breakdown = nullptr);

// Deterministic encoder-mean -> target-decoder regression, ||y - f(x)||^2 / (2 sigma^2):
// the plain supervised recurrent baseline.
Var loss_supervised(Tape& tape, const SsVcModel::Bound& bound, const Matrix& x, const Matrix& y);

enum class BatchKind { kPaired, kSourceOnly, kTargetOnly };
std::string_view batch_kind_name(BatchKind kind);

struct TrainingBatch {
  BatchKind kind = BatchKind::kPaired;
  std::optional<Matrix> x;  // normalized source mcep
  std::optional<Matrix> y;  // normalized target mcep, warped onto x when paired

  void validate() const;
};

enum class Method {
  kSupervised,      // recurrent regression baseline
  kVaeSupervised,   // variational model, paired term only
  kSemiSupervised,  // variational model, all three terms
};
std::string_view method_name(Method method);
Method parse_method(std::string_view name);

// Loss of one batch under `method`; kSupervised and kVaeSupervised reject
// unpaired batches.
Var batch_loss(Tape& tape, const SsVcModel::Bound& bound, const TrainingBatch& batch,
               Method method, graph::RngState& rng,
               Sampling sampling = Sampling::kReparameterized);

// Sum of per-batch losses in order, consuming `rng` sequentially.
double dataset_loss(const SsVcModel& model, const std::vector<TrainingBatch>& batches,
                    Method method, graph::RngState& rng,
                    Sampling sampling = Sampling::kReparameterized);

// Splits sequences longer than `chunk_frames` into consecutive chunks.
std::vector<TrainingBatch> make_batches(const std::vector<std::pair<FeatureSequence, FeatureSequence>>& paired,
                                        const std::vector<FeatureSequence>& source_only,
                                        const std::vector<FeatureSequence>& target_only,
                                        int chunk_frames = 600);

struct ValidationPair {
  FeatureSequence source;  // raw features
  FeatureSequence target;
};

struct TrainConfig {
  Method method = Method::kSemiSupervised;
  double learning_rate = 1e-3;
  int steps_per_epoch = 0;  // 0: one pass over the batches
  int max_epochs = 20;
  int patience = 5;         // epochs without validation improvement
  int divergence_steps = 10;
  bool align_validation = true;
};

struct TrainLogRow {
  std::int64_t step = 0;
  std::string term_kind;
  double loss = 0.0;
  std::optional<double> val_mcd;
};

struct TrainResult {
  std::vector<TrainLogRow> log;
  int epochs = 0;
  int best_epoch = 0;
  std::optional<double> best_val_mcd;
  std::int64_t steps = 0;
  std::int64_t skipped_steps = 0;
};

// Stochastic optimization of the summed bound (or the supervised loss) over
// shuffled batches. The model must carry speaker statistics when validation
// pairs are given. Parameters of the best validation epoch are restored.
TrainResult train(SsVcModel& model, const std::vector<TrainingBatch>& batches,
                  const std::vector<ValidationPair>& validation, const TrainConfig& config,
                  graph::RngState& rng);

void write_training_log(const std::filesystem::path& path, const std::vector<TrainLogRow>& rows);

struct ConversionResult {
  FrameMatrix mcep_hat;
  std::vector<float> c0;
  std::vector<float> f0_converted;
  std::vector<float> ap;
  double frame_hop = 0.005;

  FeatureSequence to_features() const;
};

// normalize -> encoder mean -> target decoder -> denormalize. Uses no
// randomness.
ConversionResult convert(const SsVcModel& model, const FeatureSequence& x,
                         const SpeakerStats& src_stats, const SpeakerStats& tgt_stats);
// Uses the statistics stored in the model.
ConversionResult convert(const SsVcModel& model, const FeatureSequence& x);

// Validation / test MCD over raw pairs.
double evaluate_mcd(const SsVcModel& model, const std::vector<ValidationPair>& pairs, bool align);

void save_checkpoint(const std::filesystem::path& path, const SsVcModel& model);
SsVcModel load_checkpoint(const std::filesystem::path& path);
// True when the file starts with the checkpoint magic.
bool is_checkpoint(const std::filesystem::path& path);

}  // namespace semivc::ssvc
