// include/voicemix/codec.hpp

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

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "voicemix/audio.hpp"
#include "voicemix/dsp.hpp"

namespace voicemix {

inline constexpr int kTimbreDim = 255;
inline constexpr int kCodecBands = 126;
inline constexpr float kStdFloor = 1e-5f;

// Slot layout of the reference codec's timbre vector.
inline constexpr int kBandMeanSlot = 0;
inline constexpr int kBandStdSlot = kCodecBands;
inline constexpr int kLogF0MeanSlot = 2 * kCodecBands;
inline constexpr int kLogF0StdSlot = kLogF0MeanSlot + 1;
inline constexpr int kVoicedFractionSlot = kLogF0MeanSlot + 2;

/// 126 mel bands between 50 Hz and 7.6 kHz.
MelConfig codec_mel_config();

/// Fixed-length speaker timbre. Values are float32, the precision of the
/// on-disk format, so save/load is lossless.
class TimbreVector {
 public:
  using Values = Eigen::Matrix<float, kTimbreDim, 1>;

  /// Throws kInvalidArgument unless every value is finite, every std slot is
  /// at least kStdFloor and the voiced fraction lies in [0, 1].
  explicit TimbreVector(const Values& values);

  /// Throws kWrongDimension unless exactly 255 values are given.
  static TimbreVector from_values(std::span<const float> values);

  /// Floors std slots and clamps the voiced fraction. Non-finite input
  /// still throws.
  static TimbreVector sanitized(Values values);

  static bool is_std_slot(int slot) {
    return (slot >= kBandStdSlot && slot < kBandStdSlot + kCodecBands) ||
           slot == kLogF0StdSlot;
  }

  const Values& values() const { return values_; }
  float operator[](int slot) const { return values_[slot]; }

  auto band_means() const { return values_.segment<kCodecBands>(kBandMeanSlot); }
  auto band_stds() const { return values_.segment<kCodecBands>(kBandStdSlot); }
  float mean_log_f0() const { return values_[kLogF0MeanSlot]; }
  float std_log_f0() const { return values_[kLogF0StdSlot]; }
  float voiced_fraction() const { return values_[kVoicedFractionSlot]; }

  friend bool operator==(const TimbreVector& a, const TimbreVector& b) {
    return a.values_ == b.values_;
  }

 private:
  Values values_;
};

/// Time-varying part of an utterance with speaker statistics removed.
struct ContentCode {
  Eigen::MatrixXd z_mel;     // frames x 126
  Eigen::VectorXd z_logf0;   // frames, 0 where unvoiced
  std::vector<std::uint8_t> voicing;
  FrameGeometry geometry;
  int sample_rate = kCanonicalRate;

  Eigen::Index num_frames() const { return z_mel.rows(); }
};

struct EncodedUtterance {
  ContentCode content;
  TimbreVector timbre;
};

inline constexpr int kMinEncodeFrames = 20;

/// Reference codec analysis. The clip is resampled to 16 kHz if needed.
EncodedUtterance encode(const AudioClip& clip);

/// Log-mel matrix the decoder aims for: z * std + mean per band.
Eigen::MatrixXd render_log_mel(const ContentCode& content, const TimbreVector& timbre);

/// Per-frame target F0 in Hz (0 on unvoiced frames).
Eigen::VectorXd render_f0(const ContentCode& content, const TimbreVector& timbre);

/// Source-filter resynthesis of `content` with `timbre`: mel inversion gives
/// the spectral envelope, a harmonic/noise excitation at the target F0 gives
/// the fine structure and the starting phase, and Griffin-Lim refines the
/// phase. Output length is frames * hop.
AudioClip decode(const ContentCode& content, const TimbreVector& timbre);

// TIMB: magic, u16 version (1), u32 dim (255), 255 x f32, little-endian.
void save_timbre(const TimbreVector& timbre, const std::filesystem::path& path);
TimbreVector load_timbre(const std::filesystem::path& path);

// CONT: magic, u16 version, u32 frames, u32 bands, row-major f32 z_mel,
// f32 z_logf0, u8 voicing.
void save_content(const ContentCode& content, const std::filesystem::path& path);
ContentCode load_content(const std::filesystem::path& path);

}  // namespace voicemix
