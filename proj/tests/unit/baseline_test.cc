// tests/unit/baseline_test.cc

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

#include <cmath>

#include <gtest/gtest.h>

#include "support/synth.hpp"
#include "voicemix/baseline.hpp"
#include "voicemix/errors.hpp"

namespace voicemix {
namespace {

using testing::TempDir;

double median_f0(const AudioClip& clip) {
  std::vector<double> f;
  for (const auto& p : f0_track(clip)) {
    if (p.voiced) f.push_back(p.f0);
  }
  std::nth_element(f.begin(), f.begin() + f.size() / 2, f.end());
  return f[f.size() / 2];
}

TEST(Waveform, StretchLengthIsExact) {
  const AudioClip x = testing::harmonic_utterance(1, 120.0, 1.0, 0.3, 1.0);
  for (double rate : {0.85, 1.0, 1.1, 1.15}) {
    EXPECT_EQ(time_stretch(x, rate).size(), std::lround(x.size() / rate));
  }
}

TEST(Waveform, StretchKeepsPitch) {
  const AudioClip x = testing::sine(200.0, 1.0, 0.5);
  EXPECT_NEAR(median_f0(time_stretch(x, 0.85)), 200.0, 4.0);
}

TEST(Waveform, PitchShiftMovesF0AndKeepsLength) {
  const AudioClip x = testing::sine(200.0, 1.0, 0.5);
  const AudioClip up = pitch_shift(x, 2.0);
  EXPECT_EQ(up.size(), x.size());
  EXPECT_NEAR(median_f0(up), 200.0 * std::pow(2.0, 2.0 / 12.0), 5.0);
  EXPECT_NEAR(median_f0(pitch_shift(x, -2.0)), 200.0 * std::pow(2.0, -2.0 / 12.0), 5.0);
}

TEST(Waveform, GainScalesAndNeverClips) {
  const AudioClip x = testing::sine(300.0, 0.2, 0.2);
  EXPECT_NEAR(peak(apply_gain(x, 6.0)), 0.2 * std::pow(10.0, 0.3), 1e-9);
  EXPECT_NEAR(peak(apply_gain(testing::sine(300.0, 0.2, 0.9), 6.0)), 0.95, 1e-9);
}

TEST(Waveform, DrawsAreRecordedAndDeterministic) {
  const AudioClip x = testing::harmonic_utterance(2, 120.0, 1.0, 0.3, 1.0);
  for (std::uint64_t seed = 0; seed < 6; ++seed) {
    Rng a(seed), b(seed);
    const auto ra = waveform_augment(x, WaveformAugConfig{}, a);
    const auto rb = waveform_augment(x, WaveformAugConfig{}, b);
    EXPECT_EQ(ra.audio.samples, rb.audio.samples);
    EXPECT_EQ(ra.record.method, "waveform");
    EXPECT_EQ(ra.record.to_json(), rb.record.to_json());
    EXPECT_FALSE(ra.record.params.empty());
  }
}

TEST(Waveform, ConfigValidation) {
  WaveformAugConfig c;
  c.stretch_min = 1.2;
  EXPECT_THROW(c.validate(), Error);
  c = {};
  c.probability = 1.5;
  EXPECT_THROW(c.validate(), Error);
}

MelSpectrogram ramp(int frames, int bands) {
  MelSpectrogram m;
  m.frames.resize(frames, bands);
  for (int t = 0; t < frames; ++t) {
    for (int b = 0; b < bands; ++b) m.frames(t, b) = t + 0.01 * b;
  }
  return m;
}

TEST(SpecAugment, MasksStayInRangeAndFillWithMean) {
  const MelSpectrogram m = ramp(200, 80);
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    Rng rng(seed);
    const SpecAugResult r = spec_augment(m, SpecAugConfig{}, rng);
    EXPECT_NEAR(r.fill, m.frames.mean(), 1e-12);
    ASSERT_EQ(r.masks.size(), 4u);
    for (const auto& k : r.masks) {
      const bool freq = k.axis == SpecMask::Axis::kFrequency;
      EXPECT_LE(k.width, freq ? 15 : 10);
      EXPECT_GE(k.start, 0);
      EXPECT_LE(k.start + k.width, freq ? 80 : 200);
    }
    EXPECT_EQ(r.mel.frames, apply_masks(m.frames, r.masks, r.fill));
    EXPECT_EQ(r.record.method, "specaugment");
  }
}

TEST(SpecAugment, ApplyMasksTouchesOnlyMaskedCells) {
  const Eigen::MatrixXd x = Eigen::MatrixXd::Ones(10, 8);
  const Eigen::MatrixXd y =
      apply_masks(x, {{SpecMask::Axis::kFrequency, 2, 3}, {SpecMask::Axis::kTime, 5, 1}}, 0.0);
  EXPECT_EQ(y.sum(), 10 * 8 - 10 * 3 - 5);
  EXPECT_EQ(y(5, 0), 0.0);
  EXPECT_EQ(y(0, 4), 0.0);
  EXPECT_EQ(y(0, 5), 1.0);
}

TEST(SpecAugment, TooSmallFeatures) {
  Rng rng(1);
  try {
    spec_augment(ramp(200, 10), SpecAugConfig{}, rng);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kFeatureTooSmall);
  }
  EXPECT_THROW(spec_augment(ramp(10, 80), SpecAugConfig{}, rng), Error);
}

TEST(SpecAugment, FeatureFileRoundTrip) {
  TempDir dir("melf");
  const Eigen::MatrixXd x = ramp(30, 80).frames;
  save_features(x, dir.path() / "f.melf");
  const Eigen::MatrixXd back = load_features(dir.path() / "f.melf");
  EXPECT_LT((back - x).cwiseAbs().maxCoeff(), 1e-4);
}

}  // namespace
}  // namespace voicemix
