// include/voicemix/baseline.hpp

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
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "voicemix/audio.hpp"
#include "voicemix/dsp.hpp"
#include "voicemix/manifest.hpp"
#include "voicemix/mixup.hpp"
#include "voicemix/random.hpp"

namespace voicemix {

struct WaveformAugConfig {
  double stretch_min = 0.85;
  double stretch_max = 1.15;
  double pitch_min_semitones = -2.0;
  double pitch_max_semitones = 2.0;
  double gain_min_db = -6.0;
  double gain_max_db = 6.0;
  double probability = 0.5;

  void validate() const;
};

/// Phase-vocoder time stretch. rate > 1 shortens; the output has exactly
/// round(size / rate) samples.
AudioClip time_stretch(const AudioClip& clip, double rate);

/// Stretch by 2^(s/12) followed by resampling back to the input length.
AudioClip pitch_shift(const AudioClip& clip, double semitones);

/// Scales by 10^(db/20), then rescales if the peak exceeds 1.
AudioClip apply_gain(const AudioClip& clip, double db);

struct WaveformAugResult {
  AudioClip audio;
  AugmentationRecord record;  // method "waveform", params hold the draws
};

/// Stretch, pitch shift and gain, each applied with `probability`. Gain is
/// forced when no transform was drawn. Throws kClipTooShort.
WaveformAugResult waveform_augment(const AudioClip& clip, const WaveformAugConfig& config,
                                   Rng& rng);

struct SpecAugConfig {
  int num_freq_masks = 2;
  int max_freq_width = 15;  // mel bands
  int num_time_masks = 2;
  double max_time_fraction = 0.05;

  void validate() const;
};

struct SpecMask {
  enum class Axis { kFrequency, kTime };
  Axis axis = Axis::kFrequency;
  int start = 0;
  int width = 0;
};

struct SpecAugResult {
  MelSpectrogram mel;
  std::vector<SpecMask> masks;
  double fill = 0.0;
  AugmentationRecord record;  // method "specaugment"
};

/// Sets the masked rows/columns of `features` (frames x bands) to `fill`.
Eigen::MatrixXd apply_masks(const Eigen::MatrixXd& features,
                            const std::vector<SpecMask>& masks, double fill);

/// Frequency and time masks filled with the utterance mean. Widths are
/// uniform in [0, max]. Throws kFeatureTooSmall when a configured maximum
/// does not fit the features.
SpecAugResult spec_augment(const MelSpectrogram& mel, const SpecAugConfig& config, Rng& rng);

// MELF: magic, u16 version (1), u32 frames, u32 bands, row-major f32.
void save_features(const Eigen::MatrixXd& features, const std::filesystem::path& path);
Eigen::MatrixXd load_features(const std::filesystem::path& path);

/// Voice conversion to a randomly selected speaker: the mixup path with no
/// partner and lambda fixed at 1.
AugmentedUtterance vc_augment(const AudioClip& source, const CorpusIndex& corpus,
                              const std::string& source_utt, Rng& rng,
                              const MixupConfig& config, const CodecBackend& backend,
                              const TimbreLookup& timbres,
                              const std::filesystem::path& scratch);

}  // namespace voicemix
