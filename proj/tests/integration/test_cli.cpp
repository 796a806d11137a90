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

#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "cli.hpp"
#include "semivc/features.hpp"
#include "oracles.hpp"

namespace semivc::cli {

using semivc::FeatureSequence;
using semivc::FrameMatrix;
using semivc::kNumMcep;
using semivc::write_features;
namespace {

namespace fs = std::filesystem;

struct CliRun {
  int code;
  std::string out, err;
};

CliRun run(std::vector<std::string> args) {
  args.insert(args.begin(), "semivc");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string file_bytes(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_text(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

class CliTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    dir_ = new testing::TempDir;
    write_text(*dir_ / "synth.cfg",
               "train_pairs = 4\nsource_only = 3\ntarget_only = 3\nvalidation_pairs = 1\n"
               "test_pairs = 2\nmin_frames = 30\nmax_frames = 40\n");
    const CliRun r = run({"gen-synth", "--config", (*dir_ / "synth.cfg").string(), "--seed", "2",
                       "-o", (*dir_ / "corpus").string()});
    ASSERT_EQ(r.code, 0) << r.err;
    write_text(*dir_ / "train.cfg",
               "manifest = corpus/manifest.txt\nencoder_widths = 4\nlatent_dim = 2\n"
               "decoder_widths = 4\nsteps_per_epoch = 4\nmax_epochs = 2\ncomponents = 2\n"
               "total_budget = 4\nparallel_counts = 2, 4\nrepeats = 1\nunpaired_counts = 0, 2\n");
  }
  static void TearDownTestSuite() { delete dir_; }

  static fs::path path(const std::string& p) { return *dir_ / p; }
  static std::string str(const std::string& p) { return path(p).string(); }

  static testing::TempDir* dir_;
};
testing::TempDir* CliTest::dir_ = nullptr;

TEST_F(CliTest, EvaluateIdenticalDirectoriesIsZero) {
  const CliRun r = run({"evaluate", str("corpus/target"), str("corpus/target")});
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("0.00 dB"), std::string::npos) << r.out;
}

TEST_F(CliTest, UnknownFlagIsUsageError) {
  const CliRun r = run({"evaluate", "--frobnicate", "a", "b"});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("Usage"), std::string::npos);
  EXPECT_EQ(run({"no-such-command"}).code, 1);
  EXPECT_EQ(run({"--help"}).code, 0);
}

TEST_F(CliTest, MissingManifestNamesKey) {
  write_text(path("nomanifest.cfg"), "steps_per_epoch = 2\n");
  CliRun r = run({"train-ssvc", "--config", str("nomanifest.cfg"), "-o", str("x.ckpt")});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("'manifest'"), std::string::npos) << r.err;
  write_text(path("badmanifest.cfg"), "manifest = nowhere/manifest.txt\n");
  r = run({"train-ssvc", "--config", str("badmanifest.cfg"), "-o", str("x.ckpt")});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("'manifest'"), std::string::npos) << r.err;
}

TEST_F(CliTest, TrainConvertEvaluate) {
  CliRun r = run({"train-ssvc", "--config", str("train.cfg"), "--seed", "3", "-o", str("m.ckpt"),
               "--log", str("log.csv")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(file_bytes(path("log.csv")).rfind("step,term_kind,loss,val_mcd\n", 0), 0u);
  r = run({"convert", "--model", str("m.ckpt"), str("corpus/source"), "-o", str("conv")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(r.err.empty()) << r.err;
  EXPECT_TRUE(fs::exists(path("conv/e0000.vcf")));
  r = run({"evaluate", str("conv/e0000.vcf"), str("corpus/target/e0000.vcf")});
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find(" dB"), std::string::npos);
}

TEST_F(CliTest, UnpairedOnlyTrainingWarnsOnConvert) {
  CliRun r = run({"train-ssvc", "--config", str("train.cfg"), "--parallel", "0", "-o",
               str("unpaired.ckpt")});
  ASSERT_EQ(r.code, 0) << r.err;
  r = run({"convert", "--model", str("unpaired.ckpt"), str("corpus/source/e0000.vcf"), "-o",
           str("u.vcf")});
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.err.find("never cross-coupled"), std::string::npos) << r.err;
}

TEST_F(CliTest, GmmPipeline) {
  CliRun r = run({"train-gmm", "--config", str("train.cfg"), "-o", str("g.vcgm")});
  ASSERT_EQ(r.code, 0) << r.err;
  r = run({"convert", "--model", str("g.vcgm"), str("corpus/source/e0001.vcf"), "-o", str("g.vcf")});
  EXPECT_EQ(r.code, 0) << r.err;
}

TEST_F(CliTest, AlignAndStats) {
  CliRun r = run({"align", "--source", str("corpus/source/p0000.vcf"), "--target",
               str("corpus/target/p0001.vcf"), "-o", str("aligned")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(fs::exists(path("aligned/source/p0000.vcf")));
  EXPECT_TRUE(fs::exists(path("aligned/target/p0000.vcf")));
  r = run({"stats", "--config", str("train.cfg"), "--speaker", "target", "-o", str("t.stats")});
  EXPECT_EQ(r.code, 0) << r.err;
  r = run({"stats", str("corpus/source"), "-o", str("s.stats")});
  EXPECT_EQ(r.code, 0) << r.err;
}

TEST_F(CliTest, SweepsAreByteReproducible) {
  for (const char* cmd : {"sweep-parallel", "sweep-nonparallel"}) {
    const std::string a = str(std::string(cmd) + "_a.csv"), b = str(std::string(cmd) + "_b.csv");
    ASSERT_EQ(run({cmd, "--config", str("train.cfg"), "--seed", "5", "-o", a}).code, 0);
    ASSERT_EQ(run({cmd, "--config", str("train.cfg"), "--seed", "5", "-o", b}).code, 0);
    EXPECT_EQ(file_bytes(a), file_bytes(b));
  }
}

TEST_F(CliTest, RuntimeFailureExitsTwo) {
  // A corpus whose paired utterances are all unvoiced cannot be normalized.
  testing::TempDir d;
  FeatureSequence fs;
  fs.mcep = FrameMatrix::Zero(5, kNumMcep);
  fs.c0.assign(5, 0.0f);
  fs.f0.assign(5, 0.0f);
  fs.ap.assign(5, 1.0f);
  write_features(d / "x.vcf", fs);
  write_features(d / "y.vcf", fs);
  write_text(d / "m.txt", "paired x.vcf y.vcf\n");
  write_text(d / "c.cfg", "manifest = m.txt\nsteps_per_epoch = 1\nmax_epochs = 1\n");
  const CliRun r = run({"train-ssvc", "--config", (d / "c.cfg").string(), "-o", (d / "o").string()});
  EXPECT_EQ(r.code, 2) << r.err;
}

}  // namespace
}  // namespace semivc::cli
