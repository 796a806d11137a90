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

#include <cstring>
#include <fstream>
#include <iterator>

#include "semivc/error.hpp"

namespace semivc::detail {
namespace {

template <typename T>
void append(std::vector<char>& out, const T& v) {
  const char* p = reinterpret_cast<const char*>(&v);
  out.insert(out.end(), p, p + sizeof(T));
}

}  // namespace

void SectionWriter::add_matrix(const std::string& name, const Eigen::MatrixXd& m,
                               bool single_precision) {
  append(body_, static_cast<std::uint32_t>(name.size()));
  body_.insert(body_.end(), name.begin(), name.end());
  append(body_, single_precision ? SectionKind::kF32 : SectionKind::kF64);
  append(body_, static_cast<std::uint32_t>(m.rows()));
  append(body_, static_cast<std::uint32_t>(m.cols()));
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      if (single_precision) {
        append(body_, static_cast<float>(m(r, c)));
      } else {
        append(body_, m(r, c));
      }
    }
  }
  ++count_;
}

void SectionWriter::add_text(const std::string& name, const std::string& text) {
  append(body_, static_cast<std::uint32_t>(name.size()));
  body_.insert(body_.end(), name.begin(), name.end());
  append(body_, SectionKind::kText);
  append(body_, static_cast<std::uint32_t>(text.size()));
  append(body_, std::uint32_t{1});
  body_.insert(body_.end(), text.begin(), text.end());
  ++count_;
}

void SectionWriter::write(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot open for writing: " + path.string());
  out.write(magic_.data(), 4);
  out.write(reinterpret_cast<const char*>(&version_), 4);
  out.write(reinterpret_cast<const char*>(&count_), 4);
  out.write(body_.data(), static_cast<std::streamsize>(body_.size()));
  if (!out) throw InputError("write failed: " + path.string());
}

SectionReader::SectionReader(const std::filesystem::path& path, std::array<char, 4> magic,
                             std::uint32_t max_version)
    : path_(path.string()) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open checkpoint: " + path_);
  const std::vector<char> bytes((std::istreambuf_iterator<char>(in)),
                                std::istreambuf_iterator<char>());
  std::size_t pos = 0;
  const auto take = [&](void* dst, std::size_t n, const char* what) {
    if (pos + n > bytes.size()) {
      throw FormatError(path_ + ": truncated checkpoint while reading " + what, pos);
    }
    std::memcpy(dst, bytes.data() + pos, n);
    pos += n;
  };
  char got[4];
  take(got, 4, "magic");
  if (std::memcmp(got, magic.data(), 4) != 0) {
    throw FormatError(path_ + ": bad magic, expected " + std::string(magic.data(), 4), 0);
  }
  take(&version_, 4, "version");
  if (version_ == 0 || version_ > max_version) {
    throw UnsupportedError(path_ + ": unsupported checkpoint version " +
                           std::to_string(version_));
  }
  std::uint32_t count = 0;
  take(&count, 4, "section count");
  for (std::uint32_t s = 0; s < count; ++s) {
    std::uint32_t len = 0;
    take(&len, 4, "section name length");
    std::string name(len, '\0');
    take(name.data(), len, "section name");
    Section sec;
    take(&sec.kind, 1, "section kind");
    take(&sec.rows, 4, "section rows");
    take(&sec.cols, 4, "section cols");
    if (sec.kind == SectionKind::kText) {
      sec.text.resize(sec.rows);
      take(sec.text.data(), sec.rows, "text payload");
    } else if (sec.kind == SectionKind::kF64 || sec.kind == SectionKind::kF32) {
      const std::size_t n = std::size_t(sec.rows) * sec.cols;
      sec.values.resize(n);
      for (std::size_t i = 0; i < n; ++i) {
        if (sec.kind == SectionKind::kF64) {
          take(&sec.values[i], 8, "matrix payload");
        } else {
          float f;
          take(&f, 4, "matrix payload");
          sec.values[i] = f;
        }
      }
    } else {
      throw FormatError(path_ + ": unknown section kind", pos - 9);
    }
    if (!sections_.emplace(name, std::move(sec)).second) {
      throw FormatError(path_ + ": duplicate section '" + name + "'", pos);
    }
    order_.push_back(name);
  }
  if (pos != bytes.size()) throw FormatError(path_ + ": trailing bytes", pos);
}

const Section& SectionReader::get(const std::string& name) const {
  auto it = sections_.find(name);
  if (it == sections_.end()) {
    throw FormatError(path_ + ": missing section '" + name + "'", 0);
  }
  return it->second;
}

Eigen::MatrixXd SectionReader::matrix(const std::string& name) const {
  const Section& s = get(name);
  if (s.kind == SectionKind::kText) throw FormatError(path_ + ": '" + name + "' is text", 0);
  Eigen::MatrixXd m(s.rows, s.cols);
  for (std::uint32_t r = 0; r < s.rows; ++r) {
    for (std::uint32_t c = 0; c < s.cols; ++c) m(r, c) = s.values[std::size_t(r) * s.cols + c];
  }
  return m;
}

const std::string& SectionReader::text(const std::string& name) const {
  const Section& s = get(name);
  if (s.kind != SectionKind::kText) throw FormatError(path_ + ": '" + name + "' is not text", 0);
  return s.text;
}

std::string peek_magic(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  char buf[4];
  if (!in.read(buf, 4)) return {};
  return std::string(buf, 4);
}

}  // namespace semivc::detail
