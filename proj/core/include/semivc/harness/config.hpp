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
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace semivc::harness {

// `key = value` lines; `#` starts a comment, blank lines are ignored.
// Missing or malformed keys raise ConfigError naming the key.
class KeyValueConfig {
 public:
  static KeyValueConfig parse(const std::string& text, const std::string& origin = "config");
  static KeyValueConfig load(const std::filesystem::path& path);

  bool has(const std::string& key) const { return values_.count(key) != 0; }
  void set(const std::string& key, const std::string& value) { values_[key] = value; }

  std::string get_string(const std::string& key) const;
  std::string get_string(const std::string& key, const std::string& fallback) const;
  std::int64_t get_int(const std::string& key) const;
  std::int64_t get_int(const std::string& key, std::int64_t fallback) const;
  double get_double(const std::string& key, double fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  // Comma- or space-separated integers.
  std::vector<int> get_int_list(const std::string& key, const std::vector<int>& fallback) const;

  // Path value resolved against the directory of the config file.
  std::filesystem::path get_path(const std::string& key) const;

  const std::map<std::string, std::string>& entries() const { return values_; }
  const std::filesystem::path& base_dir() const { return base_dir_; }

 private:
  std::string origin_;
  std::filesystem::path base_dir_;
  std::map<std::string, std::string> values_;
};

}  // namespace semivc::harness
