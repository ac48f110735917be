// tests/unit/denoise_test.cc

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

#include <gtest/gtest.h>

#include "support/synth.hpp"
#include "voicemix/denoise.hpp"
#include "voicemix/errors.hpp"

namespace voicemix {
namespace {

TEST(Denoise, ConfigValidation) {
  DenoiseConfig c;
  EXPECT_NO_THROW(c.validate());
  c.noise_percentile = 1.0;
  EXPECT_THROW(c.validate(), Error);
  c = {};
  c.smoothing_freq_bins = 4;
  EXPECT_THROW(c.validate(), Error);
  c = {};
  c.attenuation_floor_db = 3.0;
  EXPECT_THROW(c.validate(), Error);
}

TEST(Denoise, ShortClipThrows) {
  try {
    denoise(testing::sine(200.0, 0.05, 0.3));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kClipTooShort);
  }
}

TEST(Denoise, MaskIsBoundedByFloorAndOne) {
  const AudioClip noise = testing::white_noise(16000, 4, 0.1);
  DenoiseConfig c;
  const Eigen::MatrixXd mask = spectral_gate_mask(stft(noise), c);
  EXPECT_LE(mask.maxCoeff(), 1.0);
  EXPECT_GE(mask.minCoeff(), std::pow(10.0, c.attenuation_floor_db / 20.0) - 1e-12);
}

TEST(Denoise, KeepsLengthAndDoesNotAddEnergy) {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    AudioClip x = testing::harmonic_utterance(seed, 140.0, 1.0, 0.6);
    x.samples += testing::white_noise(x.size(), seed + 10, 0.03).samples;
    const AudioClip y = denoise(x);
    EXPECT_EQ(y.size(), x.size());
    EXPECT_LE(y.samples.squaredNorm(), x.samples.squaredNorm() * 1.01);
  }
}

TEST(Denoise, PureNoiseIsStronglyAttenuated) {
  const AudioClip x = testing::white_noise(32000, 9, 0.1);
  const AudioClip y = denoise(x);
  EXPECT_LT(y.samples.squaredNorm(), 0.5 * x.samples.squaredNorm());
}

TEST(Denoise, CleanToneSurvives) {
  const AudioClip x = testing::sine(440.0, 1.0, 0.5);
  const AudioClip y = denoise(x);
  const Eigen::VectorXd a = x.samples.array() - x.samples.mean();
  const Eigen::VectorXd b = y.samples.array() - y.samples.mean();
  EXPECT_GE(a.dot(b) / (a.norm() * b.norm()), 0.99);
}

TEST(Denoise, SilenceStaysSilent) {
  AudioClip x;
  x.samples = Eigen::VectorXd::Zero(16000);
  EXPECT_EQ(peak(denoise(x)), 0.0);
}

TEST(Denoise, Deterministic) {
  const AudioClip x = testing::white_noise(8000, 12, 0.2);
  EXPECT_EQ(denoise(x).samples, denoise(x).samples);
}

}  // namespace
}  // namespace voicemix
