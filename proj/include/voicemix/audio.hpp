// include/voicemix/audio.hpp

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

#pragma once

#include <filesystem>

#include <Eigen/Dense>

namespace voicemix {

inline constexpr int kCanonicalRate = 16000;

/// Mono sample buffer. Samples are kept in double precision in memory; files
/// on disk are 16-bit PCM.
struct AudioClip {
  Eigen::VectorXd samples;
  int sample_rate = kCanonicalRate;

  Eigen::Index size() const { return samples.size(); }
  double duration() const {
    return static_cast<double>(samples.size()) / sample_rate;
  }
};

struct WavInfo {
  int sample_rate = 0;
  int channels = 0;
  int bits_per_sample = 0;
  bool is_float = false;
  std::int64_t num_frames = 0;

  double duration() const {
    return sample_rate > 0 ? static_cast<double>(num_frames) / sample_rate : 0.0;
  }
};

/// Reads only the RIFF header.
WavInfo read_wav_info(const std::filesystem::path& path);

/// PCM16 or float32, one or two channels; channels are averaged. 16-bit
/// values are scaled by 1/32768.
AudioClip load_wav(const std::filesystem::path& path);

/// Writes mono PCM16. Samples outside [-1, 1] are clipped.
void save_wav(const AudioClip& clip, const std::filesystem::path& path);

/// Loads and converts to the canonical 16 kHz format.
AudioClip load_canonical(const std::filesystem::path& path);

/// Windowed-sinc resampling (64-tap Kaiser). Same-rate input is returned as
/// an exact copy.
AudioClip resample(const AudioClip& clip, int target_rate);

/// Resamples by an arbitrary rate ratio; output length is
/// round(size * to_rate / from_rate).
Eigen::VectorXd resample_signal(const Eigen::Ref<const Eigen::VectorXd>& x,
                                double from_rate, double to_rate);

double peak(const AudioClip& clip);

/// Rescales to a peak of 0.95 only if some sample is outside [-1, 1].
void normalize_on_overflow(AudioClip& clip);

/// Rescales so that the peak equals `target` (no-op on silence).
void peak_normalize(AudioClip& clip, double target = 0.95);

}  // namespace voicemix
