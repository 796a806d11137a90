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

// Keyed binary sections shared by the checkpoint formats:
//   magic[4] u32 version u32 count
//   { u32 name_len, name, u8 kind, u32 rows, u32 cols, payload }*
// Matrices are row-major little-endian; text payloads store byte length in rows.

#include <Eigen/Core>
#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace semivc::detail {

enum class SectionKind : std::uint8_t { kF64 = 0, kF32 = 1, kText = 2 };

struct Section {
  SectionKind kind = SectionKind::kF64;
  std::uint32_t rows = 0;
  std::uint32_t cols = 0;
  std::vector<double> values;  // kF64 / kF32 payload widened to double
  std::string text;
};

class SectionWriter {
 public:
  SectionWriter(std::array<char, 4> magic, std::uint32_t version)
      : magic_(magic), version_(version) {}

  void add_matrix(const std::string& name, const Eigen::MatrixXd& m, bool single_precision);
  void add_text(const std::string& name, const std::string& text);
  void write(const std::filesystem::path& path) const;

 private:
  std::array<char, 4> magic_;
  std::uint32_t version_;
  std::vector<char> body_;
  std::uint32_t count_ = 0;
};

class SectionReader {
 public:
  SectionReader(const std::filesystem::path& path, std::array<char, 4> magic,
                std::uint32_t max_version);

  std::uint32_t version() const { return version_; }
  bool has(const std::string& name) const { return sections_.count(name) != 0; }
  Eigen::MatrixXd matrix(const std::string& name) const;
  const std::string& text(const std::string& name) const;
  // Section names in file order.
  const std::vector<std::string>& names() const { return order_; }

 private:
  const Section& get(const std::string& name) const;

  std::string path_;
  std::uint32_t version_ = 0;
  std::map<std::string, Section> sections_;
  std::vector<std::string> order_;
};

// Reads the first four bytes of a file; empty string when unreadable.
std::string peek_magic(const std::filesystem::path& path);

}  // namespace semivc::detail
