// src/denoise.cc

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

#include "voicemix/denoise.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "voicemix/errors.hpp"

namespace voicemix {

namespace {

constexpr double kSigmoidScaleDb = 3.0;
constexpr int kMinFrames = 10;

// Linear-interpolated quantile of an already sorted range.
double sorted_quantile(const std::vector<double>& sorted, double q) {
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

Eigen::MatrixXd box_smooth(const Eigen::MatrixXd& m, int time_extent,
                           int freq_extent) {
  const int ht = time_extent / 2;
  const int hf = freq_extent / 2;
  const Eigen::Index rows = m.rows();
  const Eigen::Index cols = m.cols();
  // Separable mean over the in-range neighbours.
  Eigen::MatrixXd along_freq(rows, cols);
  for (Eigen::Index t = 0; t < rows; ++t) {
    for (Eigen::Index f = 0; f < cols; ++f) {
      const Eigen::Index lo = std::max<Eigen::Index>(0, f - hf);
      const Eigen::Index hi = std::min<Eigen::Index>(cols - 1, f + hf);
      along_freq(t, f) = m.row(t).segment(lo, hi - lo + 1).mean();
    }
  }
  Eigen::MatrixXd out(rows, cols);
  for (Eigen::Index t = 0; t < rows; ++t) {
    const Eigen::Index lo = std::max<Eigen::Index>(0, t - ht);
    const Eigen::Index hi = std::min<Eigen::Index>(rows - 1, t + ht);
    out.row(t) = along_freq.middleRows(lo, hi - lo + 1).colwise().mean();
  }
  return out;
}

}  // namespace

void DenoiseConfig::validate() const {
  if (!(noise_percentile > 0.0 && noise_percentile < 1.0)) {
    throw Error(ErrorKind::kInvalidArgument, "noise percentile must be in (0, 1)");
  }
  if (!(threshold_std_multiplier > 0.0)) {
    throw Error(ErrorKind::kInvalidArgument, "threshold multiplier must be positive");
  }
  auto odd_positive = [](int v) { return v > 0 && v % 2 == 1; };
  if (!odd_positive(smoothing_freq_bins) || !odd_positive(smoothing_time_frames)) {
    throw Error(ErrorKind::kInvalidArgument,
                "mask smoothing extents must be odd positive integers");
  }
  if (!(attenuation_floor_db <= 0.0)) {
    throw Error(ErrorKind::kInvalidArgument, "attenuation floor must be <= 0 dB");
  }
}

Eigen::MatrixXd spectral_gate_mask(const Spectrogram& spec,
                                   const DenoiseConfig& config) {
  config.validate();
  const Eigen::Index frames = spec.num_frames();
  const Eigen::Index bins = spec.frames.cols();
  if (frames < kMinFrames) {
    throw Error(ErrorKind::kClipTooShort, "spectral gating needs at least " +
                                              std::to_string(kMinFrames) + " frames");
  }
  const Eigen::MatrixXd db =
      20.0 * spec.frames.cwiseAbs().cwiseMax(1e-10).array().log10();

  // The noise profile is estimated from the quietest quarter of the frames.
  const Eigen::VectorXd frame_energy = spec.frames.cwiseAbs2().rowwise().sum();
  std::vector<Eigen::Index> order(static_cast<std::size_t>(frames));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    return frame_energy[a] < frame_energy[b];
  });
  const std::size_t quiet_count =
      std::max<std::size_t>(2, static_cast<std::size_t>(frames) / 4);

  const double floor_gain = std::pow(10.0, config.attenuation_floor_db / 20.0);
  Eigen::MatrixXd mask(frames, bins);
  std::vector<double> column(static_cast<std::size_t>(frames));
  for (Eigen::Index f = 0; f < bins; ++f) {
    for (Eigen::Index t = 0; t < frames; ++t) {
      column[static_cast<std::size_t>(t)] = db(t, f);
    }
    std::sort(column.begin(), column.end());
    const double noise_floor = sorted_quantile(column, config.noise_percentile);

    double mean = 0.0;
    for (std::size_t i = 0; i < quiet_count; ++i) mean += db(order[i], f);
    mean /= static_cast<double>(quiet_count);
    double var = 0.0;
    for (std::size_t i = 0; i < quiet_count; ++i) {
      const double d = db(order[i], f) - mean;
      var += d * d;
    }
    const double spread = std::sqrt(var / static_cast<double>(quiet_count));
    const double threshold = noise_floor + config.threshold_std_multiplier * spread;

    for (Eigen::Index t = 0; t < frames; ++t) {
      const double gate =
          1.0 / (1.0 + std::exp(-(db(t, f) - threshold) / kSigmoidScaleDb));
      mask(t, f) = std::clamp(gate, floor_gain, 1.0);
    }
  }
  return box_smooth(mask, config.smoothing_time_frames, config.smoothing_freq_bins);
}

AudioClip denoise(const AudioClip& clip, const DenoiseConfig& config) {
  config.validate();
  const FrameGeometry geometry;
  const Eigen::Index n = clip.size();
  const Eigen::Index min_len = geometry.num_samples(kMinFrames);
  if (n < min_len) {
    throw Error(ErrorKind::kClipTooShort,
                "denoise needs at least " + std::to_string(min_len) + " samples");
  }
  const Eigen::Index pad = geometry.window_length;
  AudioClip padded;
  padded.sample_rate = clip.sample_rate;
  padded.samples.resize(n + 2 * pad);
  for (Eigen::Index i = 0; i < pad; ++i) {
    padded.samples[pad - 1 - i] = clip.samples[std::min(i + 1, n - 1)];
    padded.samples[pad + n + i] = clip.samples[std::max<Eigen::Index>(n - 2 - i, 0)];
  }
  padded.samples.segment(pad, n) = clip.samples;

  Spectrogram spec = stft(padded, geometry);
  spec.frames = spec.frames.cwiseProduct(
      spectral_gate_mask(spec, config).cast<std::complex<double>>());
  const AudioClip restored = istft(spec);

  AudioClip out;
  out.sample_rate = clip.sample_rate;
  out.samples = restored.samples.segment(pad, n);
  normalize_on_overflow(out);
  return out;
}

}  // namespace voicemix
