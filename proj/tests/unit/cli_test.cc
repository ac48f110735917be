// tests/unit/cli_test.cc

// Copyright 2026  The voicemix Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#include <sys/wait.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "support/synth.hpp"
#include "voicemix/codec.hpp"
#include "voicemix/manifest.hpp"

namespace voicemix {
namespace {

namespace fs = std::filesystem;
using testing::TempDir;

struct Result {
  int code = -1;
  std::string out;
};

Result run(const std::string& args, const fs::path& scratch) {
  const fs::path out = scratch / "stdout.txt";
  const std::string cmd =
      std::string(VOICEMIX_CLI) + " " + args + " >" + out.string() + " 2>" +
      (scratch / "stderr.txt").string();
  const int status = std::system(cmd.c_str());
  Result r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  std::ifstream in(out);
  std::stringstream ss;
  ss << in.rdbuf();
  r.out = ss.str();
  return r;
}

class Cli : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    dir_ = new TempDir("cli");
    manifest_ = new fs::path(
        testing::write_corpus(testing::micro_corpus(3, 1, 1), dir_->path() / "corpus"));
  }
  static void TearDownTestSuite() {
    delete manifest_;
    delete dir_;
  }
  const fs::path& d() const { return dir_->path(); }
  std::string m() const { return manifest_->string(); }

  static TempDir* dir_;
  static fs::path* manifest_;
};
TempDir* Cli::dir_ = nullptr;
fs::path* Cli::manifest_ = nullptr;

TEST_F(Cli, UsageErrorsExitOne) {
  EXPECT_EQ(run("", d()).code, 1);
  EXPECT_EQ(run("frobnicate", d()).code, 1);
  EXPECT_EQ(run("augment --manifest " + m() + " --out " + (d() / "x").string(), d()).code, 1);
}

TEST_F(Cli, RuntimeFailureExitsTwo) {
  EXPECT_EQ(run("denoise " + (d() / "missing.wav").string() + " " + (d() / "o.wav").string(), d())
                .code,
            2);
}

TEST_F(Cli, ValidateDetectsBrokenRows) {
  EXPECT_EQ(run("validate " + m(), d()).code, 0);
  const auto entries = read_manifest(*manifest_);
  Json no_text = entries[0].to_json();
  no_text.erase("text");
  Json long_dur = entries[1].to_json();
  long_dur["duration"] = *entries[1].duration + 1.0;
  std::ofstream(d() / "corpus" / "broken.jsonl") << no_text.dump() << "\n"
                                                 << long_dur.dump() << "\n";
  const Result r = run("validate " + (d() / "corpus" / "broken.jsonl").string(), d());
  EXPECT_EQ(r.code, 1);
  const Json report = Json::parse(r.out);
  ASSERT_EQ(report["issues"].size(), 2u) << r.out;
  EXPECT_EQ(report["issues"][0]["field"], "text");
  EXPECT_EQ(report["issues"][1]["field"], "duration");
}

TEST_F(Cli, WerAndGap) {
  std::ofstream(d() / "pairs.jsonl") << R"({"reference":"a b c d","hypothesis":"a x c"})" << "\n";
  const Result w = run("wer --pairs " + (d() / "pairs.jsonl").string(), d());
  ASSERT_EQ(w.code, 0);
  EXPECT_DOUBLE_EQ(Json::parse(w.out)["wer"].get<double>(), 0.5);
  const Result g = run("gap --wer-low 0.796 --wer-high 0.562", d());
  ASSERT_EQ(g.code, 0);
  EXPECT_NEAR(Json::parse(g.out)["gap"].get<double>(), 0.234, 1e-12);
  std::ofstream(d() / "empty.jsonl") << R"({"reference":"","hypothesis":"a"})" << "\n";
  EXPECT_EQ(run("wer --pairs " + (d() / "empty.jsonl").string(), d()).code, 1);
}

TEST_F(Cli, ConfigFileWithFlagOverride) {
  const fs::path store = d() / "store";
  ASSERT_EQ(run("build-store --manifest " + m() + " --store " + store.string(), d()).code, 0);
  std::ofstream(d() / "cfg.json") << R"({"ratio": 5.0, "method": "voice_conversion"})";
  const fs::path out = d() / "cfgrun";
  const Result r = run("augment --manifest " + m() + " --seed 3 --config " +
                           (d() / "cfg.json").string() + " --ratio 1 --store " + store.string() +
                           " --out " + out.string(),
                       d());
  ASSERT_EQ(r.code, 0) << r.out;
  EXPECT_EQ(Json::parse(r.out)["emitted"], 3);
  std::ifstream meta(out / "run_metadata.json");
  EXPECT_EQ(Json::parse(meta)["method"], "voice_conversion");
  std::ofstream(d() / "bad.json") << R"({"ratoi": 5.0})";
  EXPECT_EQ(run("augment --manifest " + m() + " --seed 3 --config " +
                    (d() / "bad.json").string() + " --out " + (d() / "bad").string(),
                d())
                .code,
            1);
  EXPECT_EQ(run("analyze-timbre --original " + store.string() + " --group vc=" +
                    (out / "timbres").string() + " --out " + (d() / "fig").string(),
                d())
                .code,
            0);
  EXPECT_TRUE(fs::exists(d() / "fig.svg"));
  EXPECT_TRUE(fs::exists(d() / "fig.report.json"));
}

TEST_F(Cli, IdentityShimPassesAudioThrough) {
  const fs::path timbre = d() / "fixed.timb";
  save_timbre(encode(load_canonical(resolve_entry_path(*manifest_,
                                                       read_manifest(*manifest_)[0].audio_filepath)))
                  .timbre,
              timbre);
  const fs::path shim = d() / "identity.sh";
  std::ofstream(shim) << "#!/bin/sh\n"
                      << "if [ \"$1\" = encode ]; then cp \"$2\" \"$3\"; cp " << timbre.string()
                      << " \"$4\"; else cp \"$2\" \"$4\"; fi\n";
  const fs::path store = d() / "shimstore";
  const std::string backend = "--backend 'sh " + shim.string() + "'";
  ASSERT_EQ(run("build-store --manifest " + m() + " --store " + store.string() + " " + backend,
                d())
                .code,
            0);
  const fs::path out = d() / "shimrun";
  const Result r = run("augment --manifest " + m() + " --seed 1 --ratio 1 --no-pre-denoise "
                       "--no-post-denoise --store " + store.string() + " --out " + out.string() +
                           " " + backend,
                       d());
  ASSERT_EQ(r.code, 0) << r.out;
  for (const auto& e : read_manifest(out / "manifest.jsonl")) {
    if (!e.augmentation) continue;
    const auto& src = read_manifest(*manifest_);
    const auto it = std::find_if(src.begin(), src.end(),
                                 [&](const auto& s) { return s.utt_id == e.source_utt_id; });
    ASSERT_NE(it, src.end());
    const AudioClip a = load_wav(resolve_entry_path(*manifest_, it->audio_filepath));
    const AudioClip b = load_wav(out / e.audio_filepath);
    ASSERT_EQ(a.size(), b.size());
    EXPECT_LE((a.samples - b.samples).cwiseAbs().maxCoeff(), 1.0 / 32768.0);
  }
}

TEST_F(Cli, FailingBackendExitsTwo) {
  const fs::path shim = d() / "fail.sh";
  std::ofstream(shim) << "#!/bin/sh\necho codec exploded >&2\nexit 1\n";
  const Result r = run("build-store --manifest " + m() + " --store " +
                           (d() / "failstore").string() + " --backend 'sh " + shim.string() + "'",
                       d());
  EXPECT_EQ(r.code, 2);
}

}  // namespace
}  // namespace voicemix
