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

#include "common/sections.hpp"
#include "semivc/error.hpp"
#include "semivc/gmm.hpp"

namespace semivc {
namespace {

constexpr std::array<char, 4> kGmmMagic = {'V', 'C', 'G', 'M'};
constexpr std::uint32_t kGmmVersion = 1;

}  // namespace

void save_gmm(const std::filesystem::path& path, const GmmVcModel& model) {
  model.validate();
  detail::SectionWriter w(kGmmMagic, kGmmVersion);
  w.add_matrix("weights", model.weights.transpose(), false);
  w.add_matrix("means", model.means, false);
  w.add_matrix("vars", model.vars, false);
  w.add_matrix("conv_bias", model.conv_bias, false);
  for (int k = 0; k < model.components(); ++k) {
    w.add_matrix("conv_mat/" + std::to_string(k), model.conv_mats[k], false);
  }
  w.add_text("conversion_fitted", model.conversion_fitted ? "1" : "0");
  if (model.source_stats) w.add_text("stats/source", model.source_stats->to_text());
  if (model.target_stats) w.add_text("stats/target", model.target_stats->to_text());
  w.write(path);
}

GmmVcModel load_gmm(const std::filesystem::path& path) {
  detail::SectionReader r(path, kGmmMagic, kGmmVersion);
  GmmVcModel m;
  m.weights = r.matrix("weights").row(0).transpose();
  m.means = r.matrix("means");
  m.vars = r.matrix("vars");
  m.conv_bias = r.matrix("conv_bias");
  for (int k = 0; k < m.weights.size(); ++k) {
    m.conv_mats.push_back(r.matrix("conv_mat/" + std::to_string(k)));
  }
  m.conversion_fitted = r.text("conversion_fitted") == "1";
  if (r.has("stats/source")) m.source_stats = SpeakerStats::from_text(r.text("stats/source"));
  if (r.has("stats/target")) m.target_stats = SpeakerStats::from_text(r.text("stats/target"));
  m.validate();
  return m;
}

bool is_gmm_model(const std::filesystem::path& path) {
  return detail::peek_magic(path) == std::string(kGmmMagic.data(), kGmmMagic.size());
}

}  // namespace semivc
