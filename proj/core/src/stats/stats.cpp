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
#include <sstream>

#include "semivc/error.hpp"
#include "semivc/stats.hpp"

namespace semivc {
namespace {

void check_dims(const FeatureSequence& fs, const SpeakerStats& s) {
  if (fs.dims() != s.mcep_mean.size() || fs.dims() != s.mcep_std.size()) {
    throw InputError("stats dimension " + std::to_string(s.mcep_mean.size()) +
                     " does not match features " + std::to_string(fs.dims()));
  }
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

SpeakerStats fit_stats(std::span<const FeatureSequence> corpus) {
  if (corpus.empty()) throw InputError("fit_stats: empty corpus");
  const int dims = corpus.front().dims();
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(dims);
  Eigen::VectorXd sum_sq = Eigen::VectorXd::Zero(dims);
  double frames = 0.0;
  double f0_sum = 0.0, f0_sq = 0.0, voiced = 0.0;
  for (const auto& fs : corpus) {
    if (fs.dims() != dims) throw InputError("fit_stats: inconsistent mcep dimension");
    const Eigen::MatrixXd m = fs.mcep.cast<double>();
    sum += m.colwise().sum().transpose();
    sum_sq += m.array().square().colwise().sum().matrix().transpose();
    frames += static_cast<double>(m.rows());
    for (float f : fs.f0) {
      if (f > 0.0f) {
        const double l = std::log(static_cast<double>(f));
        f0_sum += l;
        f0_sq += l * l;
        voiced += 1.0;
      }
    }
  }
  if (voiced == 0.0) throw StatsError("fit_stats: corpus has no voiced frames");

  SpeakerStats s;
  s.mcep_mean = sum / frames;
  const Eigen::ArrayXd var = (sum_sq / frames).array() - s.mcep_mean.array().square();
  s.mcep_std = var.max(0.0).sqrt().max(kStdFloor).matrix();
  s.logf0_mean = f0_sum / voiced;
  s.logf0_std = std::max(std::sqrt(std::max(f0_sq / voiced - s.logf0_mean * s.logf0_mean, 0.0)),
                         kStdFloor);
  return s;
}

FeatureSequence normalize(const FeatureSequence& fs, const SpeakerStats& s) {
  check_dims(fs, s);
  FeatureSequence out = fs;
  const Eigen::RowVectorXd mean = s.mcep_mean.transpose();
  const Eigen::RowVectorXd inv = s.mcep_std.cwiseInverse().transpose();
  for (int t = 0; t < fs.frames(); ++t) {
    out.mcep.row(t) =
        ((fs.mcep.row(t).cast<double>() - mean).cwiseProduct(inv)).cast<float>();
  }
  out.flags |= FeatureSequence::kNormalizedFlag;
  return out;
}

FeatureSequence denormalize(const FeatureSequence& fs, const SpeakerStats& s) {
  check_dims(fs, s);
  FeatureSequence out = fs;
  const Eigen::RowVectorXd mean = s.mcep_mean.transpose();
  const Eigen::RowVectorXd scale = s.mcep_std.transpose();
  for (int t = 0; t < fs.frames(); ++t) {
    out.mcep.row(t) = (fs.mcep.row(t).cast<double>().cwiseProduct(scale) + mean).cast<float>();
  }
  out.flags &= ~FeatureSequence::kNormalizedFlag;
  return out;
}

std::vector<float> convert_f0(std::span<const float> f0, const SpeakerStats& src,
                              const SpeakerStats& tgt) {
  std::vector<float> out(f0.size(), 0.0f);
  const double ratio = tgt.logf0_std / src.logf0_std;
  for (std::size_t t = 0; t < f0.size(); ++t) {
    if (f0[t] <= 0.0f) continue;
    const double z = (std::log(static_cast<double>(f0[t])) - src.logf0_mean) * ratio;
    out[t] = static_cast<float>(std::exp(z + tgt.logf0_mean));
  }
  return out;
}

double mcd(const FrameMatrix& a, const FrameMatrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw InputError("mcd shape mismatch: " + std::to_string(a.rows()) + "x" +
                     std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) + "x" +
                     std::to_string(b.cols()));
  }
  if (a.rows() < 1) throw InputError("mcd requires at least one frame");
  const double k = 10.0 / std::log(10.0);
  double total = 0.0;
  for (Eigen::Index t = 0; t < a.rows(); ++t) {
    const double sq = (a.row(t).cast<double>() - b.row(t).cast<double>()).squaredNorm();
    total += k * std::sqrt(2.0 * sq);
  }
  return total / static_cast<double>(a.rows());
}

double corpus_mcd(std::span<const McdPair> pairs) {
  if (pairs.empty()) throw InputError("corpus_mcd: no pairs");
  double weighted = 0.0, frames = 0.0;
  for (const auto& p : pairs) {
    const auto t = static_cast<double>(p.converted.rows());
    weighted += mcd(p.converted, p.reference) * t;
    frames += t;
  }
  return weighted / frames;
}

void write_stats(const std::filesystem::path& path, const SpeakerStats& s) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write stats file: " + path.string());
  out << s.to_text();
}

SpeakerStats read_stats(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open stats file: " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return SpeakerStats::from_text(ss.str());
}

std::string SpeakerStats::to_text() const {
  std::string out = "semivc-stats 1\n";
  out += "dims " + std::to_string(mcep_mean.size()) + "\n";
  out += "mcep_mean";
  for (double v : mcep_mean) out += " " + format_double(v);
  out += "\nmcep_std";
  for (double v : mcep_std) out += " " + format_double(v);
  out += "\nlogf0_mean " + format_double(logf0_mean) + "\n";
  out += "logf0_std " + format_double(logf0_std) + "\n";
  return out;
}

SpeakerStats SpeakerStats::from_text(const std::string& text) {
  std::istringstream in(text);
  std::string line, key;
  if (!std::getline(in, line) || line != "semivc-stats 1") {
    throw FormatError("stats: missing 'semivc-stats 1' header", 0);
  }
  SpeakerStats s;
  long dims = -1;
  bool have_mean = false, have_std = false, have_lm = false, have_ls = false;
  const auto read_vec = [&](std::istringstream& ls, Eigen::VectorXd& v, const std::string& k) {
    if (dims < 0) throw FormatError("stats: '" + k + "' before 'dims'", 0);
    v.resize(dims);
    for (long d = 0; d < dims; ++d) {
      if (!(ls >> v[d])) throw FormatError("stats: short '" + k + "' vector", 0);
    }
  };
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    ls >> key;
    if (key == "dims") {
      ls >> dims;
      if (dims < 1) throw FormatError("stats: bad dims", 0);
    } else if (key == "mcep_mean") {
      read_vec(ls, s.mcep_mean, key);
      have_mean = true;
    } else if (key == "mcep_std") {
      read_vec(ls, s.mcep_std, key);
      have_std = true;
    } else if (key == "logf0_mean") {
      have_lm = static_cast<bool>(ls >> s.logf0_mean);
    } else if (key == "logf0_std") {
      have_ls = static_cast<bool>(ls >> s.logf0_std);
    } else {
      throw FormatError("stats: unknown key '" + key + "'", 0);
    }
  }
  if (!(have_mean && have_std && have_lm && have_ls)) {
    throw FormatError("stats: incomplete record", 0);
  }
  if ((s.mcep_std.array() <= 0.0).any() || !(s.logf0_std > 0.0)) {
    throw FormatError("stats: standard deviations must be positive", 0);
  }
  return s;
}

bool SpeakerStats::operator==(const SpeakerStats& o) const {
  return mcep_mean.size() == o.mcep_mean.size() && mcep_std.size() == o.mcep_std.size() &&
         mcep_mean == o.mcep_mean && mcep_std == o.mcep_std && logf0_mean == o.logf0_mean &&
         logf0_std == o.logf0_std;
}

}  // namespace semivc
