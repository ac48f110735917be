// include/voicemix/dsp.hpp

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

#include <vector>

#include <Eigen/Dense>

#include "voicemix/audio.hpp"

namespace voicemix {

/// Analysis frame geometry shared by every module: 25 ms window, 10 ms hop,
/// 512-point FFT at 16 kHz.
struct FrameGeometry {
  int fft_size = 512;
  int window_length = 400;
  int hop_length = 160;

  int num_bins() const { return fft_size / 2 + 1; }
  Eigen::Index num_frames(Eigen::Index num_samples) const;
  Eigen::Index num_samples(Eigen::Index num_frames) const;
};

/// Frames x bins. `has_phase` is false for magnitude-only spectrograms.
struct Spectrogram {
  Eigen::MatrixXcd frames;
  FrameGeometry geometry;
  int sample_rate = kCanonicalRate;
  bool has_phase = true;

  Eigen::Index num_frames() const { return frames.rows(); }
  Eigen::MatrixXd magnitude() const { return frames.cwiseAbs(); }
};

struct MelConfig {
  int num_mel = 80;
  double f_min = 50.0;
  double f_max = 7600.0;
};

/// Frames x num_mel natural-log mel power.
struct MelSpectrogram {
  Eigen::MatrixXd frames;
  MelConfig mel;
  FrameGeometry geometry;
  int sample_rate = kCanonicalRate;
};

inline constexpr double kLogPowerFloor = 1e-10;

/// Symmetric Hann window, w[0] = w[n-1] = 0.
Eigen::VectorXd hann_window(int length);

double hz_to_mel(double hz);
double mel_to_hz(double mel);

/// Frame t covers samples [t*hop, t*hop + window).
Spectrogram stft(const AudioClip& clip, const FrameGeometry& geometry = {});

/// Weighted overlap-add, normalized by the summed squared window. Output has
/// (frames - 1) * hop + window samples.
AudioClip istft(const Spectrogram& spec);

/// Builds a magnitude-only spectrogram.
Spectrogram magnitude_spectrogram(const Eigen::MatrixXd& magnitude,
                                  const FrameGeometry& geometry = {},
                                  int sample_rate = kCanonicalRate);

/// HTK-scale triangular filters, num_mel x bins. Each weight is the mean of
/// the triangle over the bin's frequency interval, so even filters narrower
/// than one bin keep a positive row sum.
Eigen::MatrixXd mel_filterbank(int sample_rate, int fft_size,
                               const MelConfig& mel);

/// Band centers in Hz.
Eigen::VectorXd mel_band_centers(const MelConfig& mel);

MelSpectrogram mel_spectrogram(const Spectrogram& spec, const MelConfig& mel);

/// Linear power (frames x bins) from a mel spectrogram: least-squares
/// solution against the filterbank with negatives clipped to zero.
Eigen::MatrixXd invert_mel_power(const MelSpectrogram& mel);

struct GriffinLimOptions {
  int iterations = 32;
  /// Fast Griffin-Lim momentum; 0 gives the classic iteration.
  double momentum = 0.99;
  /// Peak-normalize the result to 0.95.
  bool normalize = true;
};

/// Zero phase measured from each window's centre, as a frames x bins
/// matrix of unit phasors.
Eigen::MatrixXcd centered_zero_phase(Eigen::Index frames,
                                     const FrameGeometry& geometry = {});

/// Phase retrieval from the spectrogram magnitude, starting from
/// `centered_zero_phase`.
AudioClip griffin_lim(const Spectrogram& spec,
                      const GriffinLimOptions& options = {});
AudioClip griffin_lim(const MelSpectrogram& mel,
                      const GriffinLimOptions& options = {});

/// Same iteration with a caller-supplied starting phase (frames x bins).
AudioClip griffin_lim(const Eigen::MatrixXd& target_magnitude,
                      const Eigen::MatrixXcd& initial, const FrameGeometry& geometry,
                      int sample_rate, const GriffinLimOptions& options);

/// ||target - |STFT(clip)||| / ||target|| over the overlapping frames.
double spectral_convergence(const Eigen::MatrixXd& target_magnitude,
                            const AudioClip& clip,
                            const FrameGeometry& geometry = {});

struct PitchConfig {
  FrameGeometry geometry;
  double f0_min = 60.0;
  double f0_max = 400.0;
  double voicing_threshold = 0.3;
  /// A shorter-lag peak wins if it reaches this fraction of the best peak.
  double peak_tolerance = 0.9;
};

struct PitchFrame {
  double f0 = 0.0;  // Hz, 0 when unvoiced
  bool voiced = false;
};

/// Normalized-autocorrelation pitch tracker, one result per STFT frame.
std::vector<PitchFrame> f0_track(const AudioClip& clip,
                                 const PitchConfig& config = {});

/// Frames x num_coeffs. Orthonormal DCT-II of log-mel frames, c0 dropped.
Eigen::MatrixXd mfcc(const AudioClip& clip, int num_coeffs = 13,
                     const MelConfig& mel = {40, 50.0, 7600.0});

}  // namespace voicemix
