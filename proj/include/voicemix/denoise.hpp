// include/voicemix/denoise.hpp

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

#include <Eigen/Dense>

#include "voicemix/audio.hpp"
#include "voicemix/dsp.hpp"

namespace voicemix {

/// Stationary spectral gating parameters.
struct DenoiseConfig {
  double noise_percentile = 0.20;
  double threshold_std_multiplier = 1.5;
  int smoothing_freq_bins = 3;
  int smoothing_time_frames = 5;
  double attenuation_floor_db = -30.0;

  void validate() const;
};

/// The gain mask (frames x bins) applied to the STFT of `clip`, after
/// smoothing and clamping. Exposed for inspection; `denoise` uses it.
Eigen::MatrixXd spectral_gate_mask(const Spectrogram& spec,
                                   const DenoiseConfig& config);

/// Whole-clip noise profile, soft sigmoid gate, ISTFT. The clip is reflect
/// padded by one window on both sides so every output sample is fully
/// covered; the result has the input length.
AudioClip denoise(const AudioClip& clip, const DenoiseConfig& config = {});

}  // namespace voicemix
