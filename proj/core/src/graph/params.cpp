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

#include "semivc/graph/params.hpp"

#include "common/sections.hpp"
#include "semivc/error.hpp"

namespace semivc::graph {
namespace {

constexpr std::array<char, 4> kParamMagic = {'V', 'C', 'P', 'S'};
constexpr std::uint32_t kParamVersion = 1;

}  // namespace

Tensor& ParamSet::add(const std::string& name, Matrix init) {
  if (name.empty()) throw InputError("parameter name must not be empty");
  if (!index_.emplace(name, tensors_.size()).second) {
    throw InputError("duplicate parameter name: " + name);
  }
  names_.push_back(name);
  tensors_.push_back(Tensor{std::move(init), {}});
  return tensors_.back();
}

bool ParamSet::contains(std::string_view name) const {
  return index_.count(std::string(name)) != 0;
}

std::size_t ParamSet::index_of(std::string_view name) const {
  auto it = index_.find(std::string(name));
  if (it == index_.end()) throw InputError("unknown parameter: " + std::string(name));
  return it->second;
}

Tensor& ParamSet::at(std::string_view name) { return tensors_[index_of(name)]; }
const Tensor& ParamSet::at(std::string_view name) const { return tensors_[index_of(name)]; }

void ParamSet::zero_grad() {
  for (auto& t : tensors_) t.zero_grad();
}

Eigen::Index ParamSet::scalar_count() const {
  Eigen::Index n = 0;
  for (const auto& t : tensors_) n += t.value.size();
  return n;
}

void save_params(const std::filesystem::path& path, const ParamSet& params) {
  detail::SectionWriter w(kParamMagic, kParamVersion);
  for (std::size_t i = 0; i < params.size(); ++i) {
    w.add_matrix(params.name(i), params[i].value, true);
  }
  w.write(path);
}

void load_params(const std::filesystem::path& path, ParamSet& params) {
  detail::SectionReader r(path, kParamMagic, kParamVersion);
  if (r.names().size() != params.size()) {
    throw FormatError(path.string() + ": parameter count " + std::to_string(r.names().size()) +
                          " does not match model (" + std::to_string(params.size()) + ")",
                      0);
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    Matrix m = r.matrix(params.name(i));
    if (m.rows() != params[i].rows() || m.cols() != params[i].cols()) {
      throw FormatError(path.string() + ": shape mismatch for '" + params.name(i) + "'", 0);
    }
    params[i].value = std::move(m);
  }
}

}  // namespace semivc::graph
