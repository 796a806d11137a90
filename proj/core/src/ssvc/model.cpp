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
#include <sstream>

#include "semivc/error.hpp"
#include "semivc/ssvc.hpp"

namespace semivc::ssvc {
namespace {

Matrix uniform_matrix(Eigen::Index rows, Eigen::Index cols, double limit, graph::RngState& rng) {
  Matrix m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = (2.0 * rng.uniform() - 1.0) * limit;
  }
  return m;
}

std::string join(const std::vector<int>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
  return s;
}

std::vector<int> split_ints(const std::string& s) {
  std::vector<int> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(std::stoi(item));
  return out;
}

constexpr std::uint64_t kStreamEncoder = 1;
constexpr std::uint64_t kStreamHeads = 2;
constexpr std::uint64_t kStreamDecoderX = 3;
constexpr std::uint64_t kStreamDecoderY = 4;

}  // namespace

void ModelConfig::validate() const {
  const auto positive = [](const std::vector<int>& v) {
    if (v.empty()) return false;
    for (int w : v) {
      if (w < 1) return false;
    }
    return true;
  };
  if (input_dim < 1 || latent_dim < 1 || !positive(encoder_widths) || !positive(decoder_widths)) {
    throw InputError("model config: dimensions and layer widths must be positive");
  }
  if (!(sigma2 > 0.0)) throw InputError("model config: sigma2 must be positive");
}

std::string ModelConfig::to_text() const {
  std::ostringstream out;
  out.precision(17);
  out << "input_dim = " << input_dim << "\n"
      << "encoder_widths = " << join(encoder_widths) << "\n"
      << "latent_dim = " << latent_dim << "\n"
      << "decoder_widths = " << join(decoder_widths) << "\n"
      << "sigma2 = " << sigma2 << "\n"
      << "logvar_init_bias = " << logvar_init_bias << "\n";
  return out.str();
}

ModelConfig ModelConfig::from_text(const std::string& text) {
  ModelConfig c;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    std::string key = line.substr(0, eq);
    std::string value = line.substr(eq + 1);
    key.erase(key.find_last_not_of(" \t") + 1);
    value.erase(0, value.find_first_not_of(" \t"));
    try {
      if (key == "input_dim") c.input_dim = std::stoi(value);
      else if (key == "encoder_widths") c.encoder_widths = split_ints(value);
      else if (key == "latent_dim") c.latent_dim = std::stoi(value);
      else if (key == "decoder_widths") c.decoder_widths = split_ints(value);
      else if (key == "sigma2") c.sigma2 = std::stod(value);
      else if (key == "logvar_init_bias") c.logvar_init_bias = std::stod(value);
    } catch (const std::exception&) {
      throw FormatError("model config: bad value for '" + key + "'", 0);
    }
  }
  c.validate();
  return c;
}

SsVcModel::BiLayer SsVcModel::add_bilayer(const std::string& prefix, int input, int hidden,
                                          graph::RngState& rng) {
  const double limit = 1.0 / std::sqrt(static_cast<double>(hidden));
  BiLayer l{};
  std::size_t* slots[2][3] = {{&l.fwd_wx, &l.fwd_wh, &l.fwd_b}, {&l.bwd_wx, &l.bwd_wh, &l.bwd_b}};
  const char* dirs[2] = {"fwd", "bwd"};
  for (int d = 0; d < 2; ++d) {
    const std::string p = prefix + "." + dirs[d] + ".";
    params_.add(p + "wx", uniform_matrix(input, 3 * hidden, limit, rng));
    *slots[d][0] = params_.size() - 1;
    params_.add(p + "wh", uniform_matrix(hidden, 3 * hidden, limit, rng));
    *slots[d][1] = params_.size() - 1;
    params_.add(p + "b", Matrix::Zero(1, 3 * hidden));
    *slots[d][2] = params_.size() - 1;
  }
  return l;
}

SsVcModel::AffineLayer SsVcModel::add_affine(const std::string& prefix, int input, int output,
                                             graph::RngState& rng, double bias) {
  const double limit = std::sqrt(6.0 / (input + output));
  AffineLayer a{};
  params_.add(prefix + ".w", uniform_matrix(input, output, limit, rng));
  a.w = params_.size() - 1;
  params_.add(prefix + ".b", Matrix::Constant(1, output, bias));
  a.b = params_.size() - 1;
  return a;
}

SsVcModel::SsVcModel(const ModelConfig& config, std::uint64_t seed) : config_(config) {
  config_.validate();
  const graph::RngState root(seed);

  graph::RngState enc_rng = root.fork(kStreamEncoder);
  int width = config_.input_dim;
  for (std::size_t i = 0; i < config_.encoder_widths.size(); ++i) {
    encoder_.push_back(
        add_bilayer("enc.l" + std::to_string(i), width, config_.encoder_widths[i], enc_rng));
    width = 2 * config_.encoder_widths[i];
  }
  graph::RngState head_rng = root.fork(kStreamHeads);
  head_mu_ = add_affine("head_mu", width, config_.latent_dim, head_rng, 0.0);
  head_logvar_ =
      add_affine("head_logvar", width, config_.latent_dim, head_rng, config_.logvar_init_bias);

  const std::uint64_t streams[2] = {kStreamDecoderX, kStreamDecoderY};
  const char* names[2] = {"dec_x", "dec_y"};
  for (int s = 0; s < 2; ++s) {
    graph::RngState rng = root.fork(streams[s]);
    int w = config_.latent_dim;
    for (std::size_t i = 0; i < config_.decoder_widths.size(); ++i) {
      decoders_[s].layers.push_back(add_bilayer(std::string(names[s]) + ".l" + std::to_string(i),
                                                w, config_.decoder_widths[i], rng));
      w = 2 * config_.decoder_widths[i];
    }
    decoders_[s].out = add_affine(std::string(names[s]) + ".out", w, config_.input_dim, rng, 0.0);
  }
}

SsVcModel::Bound SsVcModel::bind(Tape& tape) {
  Bound b;
  b.model_ = this;
  b.vars_ = tape.bind(params_);
  return b;
}

SsVcModel::Bound SsVcModel::bind_frozen(Tape& tape) const {
  Bound b;
  b.model_ = this;
  b.vars_.reserve(params_.size());
  for (std::size_t i = 0; i < params_.size(); ++i) b.vars_.push_back(tape.constant(params_[i].value));
  return b;
}

Var SsVcModel::run_bilayers(Tape& tape, const Bound& bound, Var x,
                            const std::vector<BiLayer>& layers) const {
  Var h = x;
  for (const BiLayer& l : layers) {
    h = graph::birnn(tape, h,
                     graph::BiGruVars{bound[l.fwd_wx], bound[l.fwd_wh], bound[l.fwd_b],
                                      bound[l.bwd_wx], bound[l.bwd_wh], bound[l.bwd_b]});
  }
  return h;
}

SsVcModel::Posterior SsVcModel::encode(Tape& tape, const Bound& bound, Var features) const {
  if (tape.value(features).cols() != config_.input_dim) {
    throw InputError("encode: expected " + std::to_string(config_.input_dim) + " columns");
  }
  const Var h = run_bilayers(tape, bound, features, encoder_);
  const Var mean = graph::affine(tape, h, bound[head_mu_.w], bound[head_mu_.b]);
  const Var raw = graph::affine(tape, h, bound[head_logvar_.w], bound[head_logvar_.b]);
  return Posterior{mean, graph::clamp(tape, raw, graph::kLogVarMin, graph::kLogVarMax)};
}

Var SsVcModel::decode(Tape& tape, const Bound& bound, Var latent, Speaker speaker) const {
  if (tape.value(latent).cols() != config_.latent_dim) {
    throw InputError("decode: expected " + std::to_string(config_.latent_dim) + " latent columns");
  }
  const Decoder& d = decoders_[speaker == Speaker::kSource ? 0 : 1];
  const Var h = run_bilayers(tape, bound, latent, d.layers);
  return graph::affine(tape, h, bound[d.out.w], bound[d.out.b]);
}

std::pair<Matrix, Matrix> SsVcModel::encode(const Matrix& features) const {
  Tape tape;
  const Bound b = bind_frozen(tape);
  const Posterior q = encode(tape, b, tape.constant(features));
  return {tape.value(q.mean), tape.value(q.log_var)};
}

Matrix SsVcModel::decode_x(const Matrix& latent) const {
  Tape tape;
  const Bound b = bind_frozen(tape);
  return tape.value(decode(tape, b, tape.constant(latent), Speaker::kSource));
}

Matrix SsVcModel::decode_y(const Matrix& latent) const {
  Tape tape;
  const Bound b = bind_frozen(tape);
  return tape.value(decode(tape, b, tape.constant(latent), Speaker::kTarget));
}

std::vector<std::size_t> SsVcModel::decoder_parameter_indices(Speaker speaker) const {
  const std::string prefix = speaker == Speaker::kSource ? "dec_x." : "dec_y.";
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < params_.size(); ++i) {
    if (params_.name(i).rfind(prefix, 0) == 0) out.push_back(i);
  }
  return out;
}

std::vector<std::size_t> SsVcModel::encoder_parameter_indices() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < params_.size(); ++i) {
    const std::string& n = params_.name(i);
    if (n.rfind("enc.", 0) == 0 || n.rfind("head_", 0) == 0) out.push_back(i);
  }
  return out;
}

}  // namespace semivc::ssvc
