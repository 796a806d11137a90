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

#include "semivc/harness/manifest.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "semivc/error.hpp"

namespace semivc::harness {
namespace fs = std::filesystem;
namespace {

fs::path resolve(const std::string& token, const fs::path& base) {
  fs::path p(token);
  if (p.is_relative()) p = base / p;
  return p.lexically_normal();
}

std::string relative_to(const fs::path& p, const fs::path& base) {
  if (base.empty()) return p.generic_string();
  const fs::path rel = p.lexically_relative(base);
  return rel.empty() ? p.generic_string() : rel.generic_string();
}

}  // namespace

const SplitEntries& DatasetManifest::split(const std::string& name) const {
  static const SplitEntries kEmpty;
  const auto it = splits.find(name);
  return it == splits.end() ? kEmpty : it->second;
}

std::string prompt_stem(const fs::path& path) { return path.stem().string(); }

void DatasetManifest::validate() const {
  std::map<std::string, std::string> owner;  // utterance -> split
  const auto claim = [&](const fs::path& p, const std::string& split) {
    const std::string key = p.lexically_normal().string();
    const auto [it, inserted] = owner.emplace(key, split);
    if (!inserted && it->second != split) {
      throw ConfigError("manifest: utterance '" + key + "' appears in splits '" + it->second +
                        "' and '" + split + "'");
    }
  };
  std::set<std::string> source_prompts;
  for (const auto& [name, entries] : splits) {
    for (const auto& p : entries.paired) {
      claim(p.source, name);
      claim(p.target, name);
    }
    for (const auto& p : entries.source_only) {
      claim(p, name);
      source_prompts.insert(prompt_stem(p));
    }
    for (const auto& p : entries.target_only) claim(p, name);
  }
  for (const auto& [name, entries] : splits) {
    for (const auto& p : entries.target_only) {
      if (source_prompts.count(prompt_stem(p))) {
        throw ConfigError("manifest: prompt '" + prompt_stem(p) +
                          "' appears in both source-only and target-only entries");
      }
    }
  }
}

DatasetManifest DatasetManifest::parse(const std::string& text, const fs::path& base_dir) {
  DatasetManifest m;
  std::string split = "train";
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::string kind;
    if (!(ls >> kind)) continue;
    std::vector<std::string> args;
    for (std::string tok; ls >> tok;) args.push_back(tok);
    const auto where = "manifest line " + std::to_string(lineno) + ": ";
    const auto expect = [&](std::size_t n) {
      if (args.size() != n) {
        throw ConfigError(where + "'" + kind + "' takes " + std::to_string(n) + " argument(s)");
      }
    };
    if (kind == "split") {
      expect(1);
      split = args[0];
      m.splits[split];
    } else if (kind == "paired") {
      expect(2);
      m.splits[split].paired.push_back({resolve(args[0], base_dir), resolve(args[1], base_dir)});
    } else if (kind == "source") {
      expect(1);
      m.splits[split].source_only.push_back(resolve(args[0], base_dir));
    } else if (kind == "target") {
      expect(1);
      m.splits[split].target_only.push_back(resolve(args[0], base_dir));
    } else {
      throw ConfigError(where + "unknown entry kind '" + kind + "'");
    }
  }
  m.validate();
  return m;
}

DatasetManifest DatasetManifest::load(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot read manifest: " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse(buf.str(), path.parent_path());
}

void DatasetManifest::save(const fs::path& path) const {
  const fs::path base = path.parent_path().lexically_normal();
  std::ofstream out(path);
  if (!out) throw InputError("cannot write manifest: " + path.string());
  for (const auto& [name, entries] : splits) {
    out << "split " << name << "\n";
    for (const auto& p : entries.paired) {
      out << "paired " << relative_to(p.source, base) << " " << relative_to(p.target, base) << "\n";
    }
    for (const auto& p : entries.source_only) out << "source " << relative_to(p, base) << "\n";
    for (const auto& p : entries.target_only) out << "target " << relative_to(p, base) << "\n";
  }
}

FeatureSequence load_utterance(const fs::path& path, const FrameConfig& cfg) {
  if (path.extension() == ".wav" || path.extension() == ".WAV") {
    return extract_features(load_wav(path), cfg);
  }
  return read_features(path);
}

}  // namespace semivc::harness
