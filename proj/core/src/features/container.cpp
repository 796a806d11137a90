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

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>

#include "semivc/error.hpp"
#include "semivc/features.hpp"

static_assert(std::endian::native == std::endian::little,
              "container I/O assumes a little-endian host");

namespace semivc {
namespace {

constexpr char kMagic[4] = {'V', 'C', 'F', '1'};
constexpr std::size_t kHeaderBytes = 16;

class ByteReader {
 public:
  explicit ByteReader(std::vector<char> bytes) : bytes_(std::move(bytes)) {}

  template <typename T>
  void read(T* dst, std::size_t count, const char* what) {
    const std::size_t need = sizeof(T) * count;
    if (pos_ + need > bytes_.size()) {
      throw FormatError(std::string("truncated feature container while reading ") + what +
                            " (need " + std::to_string(need) + " bytes, have " +
                            std::to_string(bytes_.size() - pos_) + ")",
                        pos_);
    }
    std::memcpy(dst, bytes_.data() + pos_, need);
    pos_ += need;
  }

  std::size_t position() const { return pos_; }
  std::size_t size() const { return bytes_.size(); }

 private:
  std::vector<char> bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

void FeatureSequence::validate() const {
  const auto t = static_cast<std::size_t>(mcep.rows());
  if (t == 0) throw InputError("feature sequence has no frames");
  if (c0.size() != t || f0.size() != t || ap.size() != t) {
    throw InputError("feature tracks have inconsistent lengths");
  }
  if (!mcep.allFinite()) throw InputError("mcep contains non-finite values");
  for (float v : f0) {
    if (!(v >= 0.0f) || !std::isfinite(v)) throw InputError("f0 must be finite and >= 0");
  }
}

FeatureSequence FeatureSequence::slice(int begin, int count) const {
  if (begin < 0 || count < 0 || begin + count > frames()) {
    throw InputError("slice out of range");
  }
  FeatureSequence out;
  out.mcep = mcep.middleRows(begin, count);
  out.c0.assign(c0.begin() + begin, c0.begin() + begin + count);
  out.f0.assign(f0.begin() + begin, f0.begin() + begin + count);
  out.ap.assign(ap.begin() + begin, ap.begin() + begin + count);
  out.frame_hop = frame_hop;
  out.flags = flags;
  return out;
}

bool FeatureSequence::operator==(const FeatureSequence& other) const {
  if (mcep.rows() != other.mcep.rows() || mcep.cols() != other.mcep.cols()) return false;
  const auto bits_equal = [](const float* a, const float* b, std::size_t n) {
    return n == 0 || std::memcmp(a, b, n * sizeof(float)) == 0;
  };
  return bits_equal(mcep.data(), other.mcep.data(), static_cast<std::size_t>(mcep.size())) &&
         c0.size() == other.c0.size() && bits_equal(c0.data(), other.c0.data(), c0.size()) &&
         f0.size() == other.f0.size() && bits_equal(f0.data(), other.f0.data(), f0.size()) &&
         ap.size() == other.ap.size() && bits_equal(ap.data(), other.ap.data(), ap.size()) &&
         std::memcmp(&frame_hop, &other.frame_hop, sizeof frame_hop) == 0 && flags == other.flags;
}

void write_features(const std::filesystem::path& path, const FeatureSequence& fs) {
  fs.validate();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot open for writing: " + path.string());
  const auto t = static_cast<std::uint32_t>(fs.frames());
  const auto d = static_cast<std::uint32_t>(fs.dims());
  out.write(kMagic, 4);
  out.write(reinterpret_cast<const char*>(&t), 4);
  out.write(reinterpret_cast<const char*>(&d), 4);
  out.write(reinterpret_cast<const char*>(&fs.flags), 4);
  out.write(reinterpret_cast<const char*>(fs.mcep.data()),
            static_cast<std::streamsize>(sizeof(float) * fs.mcep.size()));
  for (const auto* track : {&fs.c0, &fs.f0, &fs.ap}) {
    out.write(reinterpret_cast<const char*>(track->data()),
              static_cast<std::streamsize>(sizeof(float) * track->size()));
  }
  out.write(reinterpret_cast<const char*>(&fs.frame_hop), sizeof(double));
  if (!out) throw InputError("write failed: " + path.string());
}

FeatureSequence read_features(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open feature file: " + path.string());
  ByteReader reader(std::vector<char>((std::istreambuf_iterator<char>(in)),
                                      std::istreambuf_iterator<char>()));
  char magic[4];
  reader.read(magic, 4, "magic");
  if (std::memcmp(magic, kMagic, 4) != 0) {
    throw FormatError("bad magic in " + path.string() + ", expected VCF1", 0);
  }
  std::uint32_t t = 0, d = 0;
  FeatureSequence fs;
  reader.read(&t, 1, "frame count");
  reader.read(&d, 1, "coefficient count");
  reader.read(&fs.flags, 1, "flags");
  if (t == 0 || d == 0) throw FormatError("empty feature container", 4);

  const std::size_t payload =
      sizeof(float) * (std::size_t(t) * d + 3 * std::size_t(t)) + sizeof(double);
  if (reader.size() - kHeaderBytes < payload) {
    // Report where the payload runs out, in whole rows.
    const std::size_t available = reader.size() - kHeaderBytes;
    const std::size_t rows = std::min<std::size_t>(available / (sizeof(float) * d), t);
    throw FormatError("truncated feature container: header declares " + std::to_string(t) +
                          " frames but payload holds " + std::to_string(rows) + " mcep rows",
                      reader.size());
  }
  fs.mcep.resize(t, d);
  reader.read(fs.mcep.data(), std::size_t(t) * d, "mcep");
  for (auto* track : {&fs.c0, &fs.f0, &fs.ap}) {
    track->resize(t);
    reader.read(track->data(), t, "track");
  }
  reader.read(&fs.frame_hop, 1, "frame hop");
  if (reader.position() != reader.size()) {
    throw FormatError("trailing bytes after feature payload", reader.position());
  }
  return fs;
}

}  // namespace semivc
