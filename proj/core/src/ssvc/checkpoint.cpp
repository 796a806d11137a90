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

#include <sstream>

#include "common/sections.hpp"
#include "semivc/error.hpp"
#include "semivc/ssvc.hpp"

namespace semivc::ssvc {
namespace {

constexpr std::array<char, 4> kMagic = {'V', 'C', 'S', 'S'};
constexpr std::uint32_t kVersion = 1;

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const SsVcModel& model) {
  detail::SectionWriter w(kMagic, kVersion);
  std::string hyper = model.config().to_text();
  hyper += "trained_paired = " + std::to_string(model.info.paired) + "\n";
  hyper += "trained_source_only = " + std::to_string(model.info.source_only) + "\n";
  hyper += "trained_target_only = " + std::to_string(model.info.target_only) + "\n";
  hyper += "trained_steps = " + std::to_string(model.info.steps) + "\n";
  w.add_text("hyper", hyper);
  if (model.source_stats) w.add_text("stats/source", model.source_stats->to_text());
  if (model.target_stats) w.add_text("stats/target", model.target_stats->to_text());
  const graph::ParamSet& p = model.params();
  for (std::size_t i = 0; i < p.size(); ++i) w.add_matrix("param/" + p.name(i), p[i].value, true);
  w.write(path);
}

SsVcModel load_checkpoint(const std::filesystem::path& path) {
  detail::SectionReader r(path, kMagic, kVersion);
  const std::string& hyper = r.text("hyper");
  SsVcModel model(ModelConfig::from_text(hyper), 0);

  std::istringstream in(hyper);
  std::string line;
  while (std::getline(in, line)) {
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    std::string key = line.substr(0, eq);
    key.erase(key.find_last_not_of(" \t") + 1);
    const auto value = [&] { return std::stoll(line.substr(eq + 1)); };
    if (key == "trained_paired") model.info.paired = value();
    else if (key == "trained_source_only") model.info.source_only = value();
    else if (key == "trained_target_only") model.info.target_only = value();
    else if (key == "trained_steps") model.info.steps = value();
  }
  if (r.has("stats/source")) model.source_stats = SpeakerStats::from_text(r.text("stats/source"));
  if (r.has("stats/target")) model.target_stats = SpeakerStats::from_text(r.text("stats/target"));

  graph::ParamSet& p = model.params();
  for (std::size_t i = 0; i < p.size(); ++i) {
    Matrix m = r.matrix("param/" + p.name(i));
    if (m.rows() != p[i].rows() || m.cols() != p[i].cols()) {
      throw FormatError(path.string() + ": shape mismatch for parameter '" + p.name(i) + "'", 0);
    }
    p[i].value = std::move(m);
  }
  return model;
}

bool is_checkpoint(const std::filesystem::path& path) {
  return detail::peek_magic(path) == std::string(kMagic.data(), kMagic.size());
}

}  // namespace semivc::ssvc
