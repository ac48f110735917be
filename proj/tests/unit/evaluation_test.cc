// tests/unit/evaluation_test.cc

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

#include <fstream>

#include <gtest/gtest.h>

#include "support/synth.hpp"
#include "voicemix/errors.hpp"
#include "voicemix/evaluation.hpp"

namespace voicemix {
namespace {

using testing::TempDir;

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorKind::kInvalidArgument;
}

TEST(Wer, HandWorkedExamples) {
  const WerBreakdown a = wer("the cat sat on the mat", "the cat sit on mat");
  EXPECT_EQ(a.substitutions, 1u);
  EXPECT_EQ(a.deletions, 1u);
  EXPECT_EQ(a.insertions, 0u);
  EXPECT_DOUBLE_EQ(a.wer(), 2.0 / 6.0);
  const WerBreakdown b = wer("a b", "x a b y z");
  EXPECT_EQ(b.insertions, 3u);
  EXPECT_DOUBLE_EQ(b.wer(), 1.5);
  EXPECT_EQ(wer("same words", "same words").errors(), 0u);
}

TEST(Wer, TieBreakPrefersSubstitution) {
  const WerBreakdown b = align_words({"a", "b"}, {"b", "c"});
  EXPECT_EQ(b.errors(), 2u);
  EXPECT_EQ(b.substitutions, 2u);
}

TEST(Wer, Normalization) {
  EXPECT_EQ(wer("Hello World", "hello world").errors(), 0u);
  TextNormalization keep;
  keep.lowercase = false;
  EXPECT_EQ(wer("Hello World", "hello world", keep).errors(), 2u);
  TextNormalization strip;
  strip.strip_punctuation = true;
  EXPECT_EQ(wer("hi, there.", "hi there", strip).errors(), 0u);
  EXPECT_EQ(tokenize("  a\tb \n c "), (std::vector<std::string>{"a", "b", "c"}));
  EXPECT_EQ(tokenize("\xC3\x89t\xC3\xA9"), (std::vector<std::string>{"\xC3\x89t\xC3\xA9"}));
}

TEST(Wer, EmptyInputs) {
  EXPECT_EQ(kind_of([] { wer("   ", "x"); }), ErrorKind::kEmptyReference);
  EXPECT_EQ(kind_of([] { corpus_wer({}); }), ErrorKind::kEmptyCorpus);
  EXPECT_EQ(kind_of([] { corpus_wer({{"u", "", "x"}}); }), ErrorKind::kEmptyReference);
  EXPECT_EQ(wer("a b", "").deletions, 2u);
}

TEST(Wer, CorpusIsPooledNotAveraged) {
  const WerBreakdown c = corpus_wer({{"1", "a", "b"}, {"2", "a b c d", "a b c d"}});
  EXPECT_DOUBLE_EQ(c.wer(), 1.0 / 5.0);
  // An empty reference contributes its insertions to the pool.
  const WerBreakdown d = corpus_wer({{"1", "", "x y"}, {"2", "a b", "a b"}});
  EXPECT_EQ(d.insertions, 2u);
  EXPECT_DOUBLE_EQ(d.wer(), 1.0);
}

TEST(Wer, JoinByUttId) {
  TempDir dir("wer");
  std::ofstream(dir.path() / "r.jsonl") << R"({"utt_id":"1","text":"a b"})" << "\n"
                                        << R"({"utt_id":"2","text":"c"})" << "\n";
  std::ofstream(dir.path() / "h.jsonl") << R"({"utt_id":"2","text":"c"})" << "\n"
                                        << R"({"utt_id":"1","hypothesis":"a"})" << "\n";
  const auto pairs = join_pairs(dir.path() / "r.jsonl", dir.path() / "h.jsonl");
  ASSERT_EQ(pairs.size(), 2u);
  EXPECT_EQ(corpus_wer(pairs).deletions, 1u);
  std::ofstream(dir.path() / "h2.jsonl") << R"({"utt_id":"1","text":"a b"})" << "\n";
  EXPECT_EQ(corpus_wer(join_pairs(dir.path() / "r.jsonl", dir.path() / "h2.jsonl")).deletions, 1u);
}

TEST(Gap, Arithmetic) {
  const GapReport g = gap_from_rates(0.5, 0.2);
  EXPECT_DOUBLE_EQ(g.gap, 0.3);
  const GapReport h = gap({{"1", "a b", "a c"}}, {{"1", "a b", "a b"}});
  EXPECT_DOUBLE_EQ(h.wer_low, 0.5);
  EXPECT_DOUBLE_EQ(h.gap, 0.5);
  EXPECT_TRUE(h.to_json().contains("gap"));
}

TEST(Dtw, IdentityAndSymmetry) {
  Eigen::MatrixXd a = Eigen::MatrixXd::Random(30, 4);
  Eigen::MatrixXd b = Eigen::MatrixXd::Random(37, 4);
  EXPECT_DOUBLE_EQ(dtw_distance(a, a), 0.0);
  EXPECT_NEAR(dtw_distance(a, b), dtw_distance(b, a), 1e-12);
  EXPECT_GT(dtw_distance(a, b), 0.0);
}

TEST(Dtw, RepeatedFramesCostNothing) {
  Eigen::MatrixXd a(3, 1), b(6, 1);
  a << 0, 1, 2;
  b << 0, 0, 1, 1, 2, 2;
  EXPECT_DOUBLE_EQ(dtw_distance(a, b, 1.0), 0.0);
}

ProxyItem item(const std::string& label, const std::string& speaker, double level) {
  return {label, speaker, Eigen::MatrixXd::Constant(10, 3, level)};
}

TEST(Proxy, LeaveOneSpeakerOut) {
  std::vector<ProxyItem> originals;
  for (const char* s : {"a", "b", "c"}) {
    originals.push_back(item("x", s, 0.0));
    originals.push_back(item("y", s, 5.0));
  }
  const ProxyResult r = proxy_eval(originals, {});
  EXPECT_EQ(r.folds, 3u);
  EXPECT_EQ(r.total, 6u);
  EXPECT_DOUBLE_EQ(r.accuracy(), 1.0);
}

TEST(Proxy, AugmentedFromHeldOutSpeakerIsExcluded) {
  // Speaker b's "x" sits near the "y" cluster, so only a leaked copy of
  // itself would classify it correctly.
  std::vector<ProxyItem> originals = {item("x", "a", 0.0), item("y", "a", 5.0),
                                      item("x", "b", 4.0), item("y", "b", 5.0)};
  const ProxyResult base = proxy_eval(originals, {});
  const ProxyResult leaked = proxy_eval(originals, {item("x", "b", 4.0)});
  EXPECT_EQ(base.correct, leaked.correct);
  const ProxyResult helped = proxy_eval(originals, {item("x", "a", 4.0)});
  EXPECT_EQ(helped.correct, base.correct + 1);
}

TEST(Proxy, Errors) {
  EXPECT_EQ(kind_of([] { proxy_eval({item("x", "a", 0), item("y", "a", 1)}, {}); }),
            ErrorKind::kInsufficientSpeakers);
  EXPECT_EQ(kind_of([] { proxy_eval({item("x", "a", 0), item("x", "b", 1)}, {}); }),
            ErrorKind::kInsufficientClasses);
}

}  // namespace
}  // namespace voicemix
