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

#include <cstddef>
#include <deque>
#include <filesystem>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "semivc/graph/tensor.hpp"

namespace semivc::graph {

// Named parameters in insertion order. References returned by add()/at()
// stay valid as more parameters are added.
class ParamSet {
 public:
  Tensor& add(const std::string& name, Matrix init);

  bool contains(std::string_view name) const;
  std::size_t index_of(std::string_view name) const;
  Tensor& at(std::string_view name);
  const Tensor& at(std::string_view name) const;

  std::size_t size() const { return tensors_.size(); }
  Tensor& operator[](std::size_t i) { return tensors_[i]; }
  const Tensor& operator[](std::size_t i) const { return tensors_[i]; }
  const std::string& name(std::size_t i) const { return names_[i]; }

  void zero_grad();
  Eigen::Index scalar_count() const;

 private:
  std::vector<std::string> names_;
  std::deque<Tensor> tensors_;
  std::unordered_map<std::string, std::size_t> index_;
};

// Versioned keyed binary: name -> shape -> f32 payload.
void save_params(const std::filesystem::path& path, const ParamSet& params);
// Loads into an existing set; names and shapes must match exactly.
void load_params(const std::filesystem::path& path, ParamSet& params);

}  // namespace semivc::graph
