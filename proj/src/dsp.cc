// src/dsp.cc

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

#include "voicemix/dsp.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <map>
#include <mutex>
#include <tuple>

#include <unsupported/Eigen/FFT>

#include "voicemix/errors.hpp"

namespace voicemix {

namespace {

constexpr double kPi = 3.14159265358979323846;

// Eigen's FFT keeps twiddle caches internally, so each thread owns one.
Eigen::FFT<double>& thread_fft() {
  thread_local Eigen::FFT<double> fft = [] {
    Eigen::FFT<double> f;
    f.SetFlag(Eigen::FFT<double>::HalfSpectrum);
    return f;
  }();
  return fft;
}

void check_geometry(const FrameGeometry& g) {
  if (g.hop_length <= 0 || g.hop_length > g.window_length ||
      g.window_length > g.fft_size || g.fft_size % 2 != 0) {
    throw Error(ErrorKind::kInvalidArgument,
                "frame geometry requires 0 < hop <= window <= fft (even fft)");
  }
}

using FilterKey = std::tuple<int, int, int, double, double>;

const Eigen::MatrixXd& cached_filterbank(int sample_rate, int fft_size,
                                         const MelConfig& mel) {
  static std::mutex mutex;
  static std::map<FilterKey, Eigen::MatrixXd> cache;
  const FilterKey key{sample_rate, fft_size, mel.num_mel, mel.f_min, mel.f_max};
  std::lock_guard<std::mutex> lock(mutex);
  auto it = cache.find(key);
  if (it == cache.end()) {
    it = cache.emplace(key, mel_filterbank(sample_rate, fft_size, mel)).first;
  }
  // std::map nodes are stable, so the reference outlives the lock.
  return it->second;
}

// Overlap-add of real frames (frames x window) with synthesis window and
// squared-window normalization.
Eigen::VectorXd overlap_add(const Eigen::MatrixXcd& frames,
                            const FrameGeometry& g) {
  const Eigen::Index num_frames = frames.rows();
  const Eigen::Index length = g.num_samples(num_frames);
  const Eigen::VectorXd window = hann_window(g.window_length);
  Eigen::VectorXd out = Eigen::VectorXd::Zero(length);
  Eigen::VectorXd norm = Eigen::VectorXd::Zero(length);
  auto& fft = thread_fft();
  std::vector<std::complex<double>> bins(g.num_bins());
  std::vector<double> buffer(g.fft_size);
  for (Eigen::Index t = 0; t < num_frames; ++t) {
    for (int k = 0; k < g.num_bins(); ++k) bins[k] = frames(t, k);
    // A real signal has purely real DC and Nyquist terms.
    bins[0] = bins[0].real();
    bins[g.num_bins() - 1] = bins[g.num_bins() - 1].real();
    fft.inv(buffer.data(), bins.data(), g.fft_size);
    const Eigen::Index start = t * g.hop_length;
    for (int n = 0; n < g.window_length; ++n) {
      out[start + n] += buffer[n] * window[n];
      norm[start + n] += window[n] * window[n];
    }
  }
  // Flooring the normalizer keeps the first and last few samples bounded
  // when the frames are not a consistent STFT.
  const double floor = 1e-3 * (norm.size() > 0 ? norm.maxCoeff() : 1.0);
  for (Eigen::Index i = 0; i < length; ++i) {
    out[i] /= std::max(norm[i], floor);
  }
  return out;
}

Eigen::MatrixXcd analyze(const Eigen::VectorXd& x, const FrameGeometry& g) {
  const Eigen::Index num_frames = g.num_frames(x.size());
  const Eigen::VectorXd window = hann_window(g.window_length);
  Eigen::MatrixXcd frames(num_frames, g.num_bins());
  auto& fft = thread_fft();
  std::vector<double> buffer(g.fft_size, 0.0);
  std::vector<std::complex<double>> bins(g.fft_size);
  for (Eigen::Index t = 0; t < num_frames; ++t) {
    const Eigen::Index start = t * g.hop_length;
    for (int n = 0; n < g.window_length; ++n) {
      buffer[n] = x[start + n] * window[n];
    }
    fft.fwd(bins.data(), buffer.data(), g.fft_size);
    for (int k = 0; k < g.num_bins(); ++k) frames(t, k) = bins[k];
  }
  return frames;
}

}  // namespace

Eigen::Index FrameGeometry::num_frames(Eigen::Index num_samples) const {
  if (num_samples < window_length) return 0;
  return (num_samples - window_length) / hop_length + 1;
}

Eigen::Index FrameGeometry::num_samples(Eigen::Index frames) const {
  if (frames <= 0) return 0;
  return (frames - 1) * hop_length + window_length;
}

Eigen::VectorXd hann_window(int length) {
  Eigen::VectorXd w(length);
  if (length == 1) {
    w[0] = 1.0;
    return w;
  }
  for (int n = 0; n < length; ++n) {
    w[n] = 0.5 - 0.5 * std::cos(2.0 * kPi * n / (length - 1));
  }
  return w;
}

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }

double mel_to_hz(double mel) {
  return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0);
}

Spectrogram stft(const AudioClip& clip, const FrameGeometry& geometry) {
  check_geometry(geometry);
  if (clip.size() < geometry.window_length) {
    throw Error(ErrorKind::kClipTooShort,
                "stft needs at least " + std::to_string(geometry.window_length) +
                    " samples, got " + std::to_string(clip.size()));
  }
  Spectrogram spec;
  spec.geometry = geometry;
  spec.sample_rate = clip.sample_rate;
  spec.frames = analyze(clip.samples, geometry);
  return spec;
}

AudioClip istft(const Spectrogram& spec) {
  if (!spec.has_phase) {
    throw Error(ErrorKind::kMagnitudeOnly,
                "istft needs complex frames; use griffin_lim for magnitudes");
  }
  check_geometry(spec.geometry);
  if (spec.frames.cols() != spec.geometry.num_bins()) {
    throw Error(ErrorKind::kDimensionMismatch, "bin count does not match fft size");
  }
  AudioClip clip;
  clip.sample_rate = spec.sample_rate;
  clip.samples = overlap_add(spec.frames, spec.geometry);
  return clip;
}

Spectrogram magnitude_spectrogram(const Eigen::MatrixXd& magnitude,
                                  const FrameGeometry& geometry,
                                  int sample_rate) {
  Spectrogram spec;
  spec.frames = magnitude.cast<std::complex<double>>();
  spec.geometry = geometry;
  spec.sample_rate = sample_rate;
  spec.has_phase = false;
  return spec;
}

Eigen::VectorXd mel_band_centers(const MelConfig& mel) {
  const double lo = hz_to_mel(mel.f_min);
  const double hi = hz_to_mel(mel.f_max);
  Eigen::VectorXd centers(mel.num_mel);
  for (int m = 0; m < mel.num_mel; ++m) {
    centers[m] = mel_to_hz(lo + (hi - lo) * (m + 1) / (mel.num_mel + 1));
  }
  return centers;
}

Eigen::MatrixXd mel_filterbank(int sample_rate, int fft_size,
                               const MelConfig& mel) {
  if (mel.num_mel < 1 || !(mel.f_min >= 0.0) || !(mel.f_min < mel.f_max) ||
      mel.f_max > sample_rate / 2.0) {
    throw Error(ErrorKind::kInvalidArgument,
                "mel filterbank needs 0 <= f_min < f_max <= sample_rate/2");
  }
  const int num_bins = fft_size / 2 + 1;
  const double bin_hz = static_cast<double>(sample_rate) / fft_size;
  const double lo = hz_to_mel(mel.f_min);
  const double hi = hz_to_mel(mel.f_max);
  Eigen::VectorXd edges(mel.num_mel + 2);
  for (int i = 0; i < edges.size(); ++i) {
    edges[i] = mel_to_hz(lo + (hi - lo) * i / (mel.num_mel + 1));
  }
  constexpr int kSub = 32;
  Eigen::MatrixXd fb = Eigen::MatrixXd::Zero(mel.num_mel, num_bins);
  for (int m = 0; m < mel.num_mel; ++m) {
    const double left = edges[m], center = edges[m + 1], right = edges[m + 2];
    const int k_lo = std::max(0, static_cast<int>(std::floor(left / bin_hz)) - 1);
    const int k_hi =
        std::min(num_bins - 1, static_cast<int>(std::ceil(right / bin_hz)) + 1);
    for (int k = k_lo; k <= k_hi; ++k) {
      double acc = 0.0;
      for (int s = 0; s < kSub; ++s) {
        const double f = (k - 0.5 + (s + 0.5) / kSub) * bin_hz;
        if (f <= left || f >= right) continue;
        acc += f <= center ? (f - left) / (center - left)
                           : (right - f) / (right - center);
      }
      fb(m, k) = acc / kSub;
    }
  }
  return fb;
}

MelSpectrogram mel_spectrogram(const Spectrogram& spec, const MelConfig& mel) {
  const Eigen::MatrixXd& fb =
      cached_filterbank(spec.sample_rate, spec.geometry.fft_size, mel);
  const Eigen::MatrixXd power = spec.frames.cwiseAbs2();
  MelSpectrogram out;
  out.mel = mel;
  out.geometry = spec.geometry;
  out.sample_rate = spec.sample_rate;
  out.frames = (power * fb.transpose()).cwiseMax(kLogPowerFloor).array().log();
  return out;
}

Eigen::MatrixXd invert_mel_power(const MelSpectrogram& mel) {
  const Eigen::MatrixXd& fb =
      cached_filterbank(mel.sample_rate, mel.geometry.fft_size, mel.mel);
  const Eigen::MatrixXd target = mel.frames.array().exp();  // frames x mel
  // Start from each band's power spread evenly over its bins, which is
  // positive everywhere, then refine with Lee-Seung multiplicative updates
  // for min ||P fb^T - target|| subject to P >= 0.
  const Eigen::VectorXd row_sums = fb.rowwise().sum();
  const Eigen::VectorXd col_sums = fb.colwise().sum().transpose();
  Eigen::MatrixXd density = target * (1.0 / row_sums.array()).matrix().asDiagonal();
  Eigen::MatrixXd power = density * fb;
  for (Eigen::Index k = 0; k < power.cols(); ++k) {
    power.col(k) /= std::max(col_sums[k], 1e-12);
  }
  const Eigen::MatrixXd numerator = target * fb;
  const Eigen::MatrixXd gram = fb.transpose() * fb;
  constexpr int kIterations = 30;
  for (int it = 0; it < kIterations; ++it) {
    const Eigen::MatrixXd denom = power * gram;
    power = power.cwiseProduct(numerator.cwiseQuotient(denom.cwiseMax(1e-30)));
  }
  // Bins outside every filter carry no information.
  for (Eigen::Index k = 0; k < power.cols(); ++k) {
    if (col_sums[k] <= 0.0) power.col(k).setZero();
  }
  return power;
}

AudioClip griffin_lim(const Eigen::MatrixXd& target_magnitude,
                      const Eigen::MatrixXcd& initial,
                      const FrameGeometry& geometry, int sample_rate,
                      const GriffinLimOptions& options) {
  check_geometry(geometry);
  if (options.iterations < 1) {
    throw Error(ErrorKind::kInvalidArgument, "griffin_lim needs iterations >= 1");
  }
  if (initial.rows() != target_magnitude.rows() ||
      initial.cols() != target_magnitude.cols() ||
      target_magnitude.cols() != geometry.num_bins()) {
    throw Error(ErrorKind::kDimensionMismatch,
                "initial phase does not match the target magnitude shape");
  }
  AudioClip clip;
  clip.sample_rate = sample_rate;
  if (target_magnitude.rows() == 0) return clip;

  auto project_magnitude = [&](const Eigen::MatrixXcd& c) {
    Eigen::MatrixXcd out(c.rows(), c.cols());
    for (Eigen::Index i = 0; i < c.size(); ++i) {
      const double a = std::abs(c(i));
      out(i) = a > 0.0 ? c(i) * (target_magnitude(i) / a)
                       : std::complex<double>(target_magnitude(i), 0.0);
    }
    return out;
  };

  Eigen::MatrixXcd c = project_magnitude(initial);
  Eigen::MatrixXcd previous = c;
  for (int it = 0; it < options.iterations; ++it) {
    const Eigen::VectorXd x = overlap_add(project_magnitude(c), geometry);
    const Eigen::MatrixXcd t = analyze(x, geometry);
    c = t + options.momentum * (t - previous);
    previous = t;
  }
  clip.samples = overlap_add(project_magnitude(c), geometry);
  if (options.normalize) {
    peak_normalize(clip, 0.95);
  } else {
    normalize_on_overflow(clip);
  }
  return clip;
}

Eigen::MatrixXcd centered_zero_phase(Eigen::Index frames, const FrameGeometry& geometry) {
  // Zero phase about the window centre: every frame starts as a symmetric
  // pulse in the middle of its window instead of at the window edge.
  const double center = 0.5 * (geometry.window_length - 1);
  Eigen::RowVectorXcd phase(geometry.num_bins());
  for (int k = 0; k < geometry.num_bins(); ++k) {
    phase[k] = std::polar(1.0, -2.0 * kPi * k * center / geometry.fft_size);
  }
  return phase.replicate(frames, 1);
}

AudioClip griffin_lim(const Spectrogram& spec, const GriffinLimOptions& options) {
  const Eigen::MatrixXd magnitude = spec.magnitude();
  return griffin_lim(magnitude, centered_zero_phase(magnitude.rows(), spec.geometry),
                     spec.geometry, spec.sample_rate, options);
}

AudioClip griffin_lim(const MelSpectrogram& mel, const GriffinLimOptions& options) {
  const Eigen::MatrixXd magnitude = invert_mel_power(mel).cwiseSqrt();
  return griffin_lim(magnitude, centered_zero_phase(magnitude.rows(), mel.geometry),
                     mel.geometry, mel.sample_rate, options);
}

double spectral_convergence(const Eigen::MatrixXd& target_magnitude,
                            const AudioClip& clip, const FrameGeometry& geometry) {
  const Eigen::MatrixXd got = stft(clip, geometry).magnitude();
  const Eigen::Index rows = std::min(got.rows(), target_magnitude.rows());
  const double denom = target_magnitude.topRows(rows).norm();
  if (denom == 0.0) return got.topRows(rows).norm() == 0.0 ? 0.0 : 1.0;
  return (target_magnitude.topRows(rows) - got.topRows(rows)).norm() / denom;
}

std::vector<PitchFrame> f0_track(const AudioClip& clip, const PitchConfig& config) {
  const FrameGeometry& g = config.geometry;
  check_geometry(g);
  if (clip.size() < g.window_length) {
    throw Error(ErrorKind::kClipTooShort,
                "f0_track needs at least one analysis window");
  }
  const double sr = clip.sample_rate;
  const int lag_min = std::max(2, static_cast<int>(std::floor(sr / config.f0_max)));
  const int lag_max = std::min(g.window_length - 2,
                               static_cast<int>(std::ceil(sr / config.f0_min)));
  const Eigen::Index num_frames = g.num_frames(clip.size());
  std::vector<PitchFrame> out(static_cast<std::size_t>(num_frames));
  const int n = g.window_length;
  Eigen::VectorXd frame(n);
  Eigen::VectorXd prefix(n + 1);
  std::vector<double> r(static_cast<std::size_t>(lag_max + 2), 0.0);

  for (Eigen::Index t = 0; t < num_frames; ++t) {
    frame = clip.samples.segment(t * g.hop_length, n);
    frame.array() -= frame.mean();
    if (frame.squaredNorm() < 1e-10) continue;
    prefix[0] = 0.0;
    for (int i = 0; i < n; ++i) prefix[i + 1] = prefix[i] + frame[i] * frame[i];

    double best = -1.0;
    for (int lag = lag_min - 1; lag <= lag_max + 1; ++lag) {
      const int overlap = n - lag;
      const double cross = frame.head(overlap).dot(frame.segment(lag, overlap));
      const double e0 = prefix[overlap];
      const double e1 = prefix[n] - prefix[lag];
      const double denom = std::sqrt(e0 * e1);
      r[lag] = denom > 0.0 ? cross / denom : 0.0;
      if (lag >= lag_min && lag <= lag_max) best = std::max(best, r[lag]);
    }
    if (best < config.voicing_threshold) continue;

    // Shortest lag whose local peak is close to the best one; avoids
    // picking a multiple of the period.
    int chosen = -1;
    for (int lag = lag_min; lag <= lag_max; ++lag) {
      if (r[lag] >= config.peak_tolerance * best && r[lag] >= r[lag - 1] && r[lag] >= r[lag + 1]) {
        chosen = lag;
        break;
      }
    }
    if (chosen < 0) continue;
    double offset = 0.0;
    const double a = r[chosen - 1], b = r[chosen], c = r[chosen + 1];
    const double curvature = a - 2.0 * b + c;
    if (curvature < 0.0) offset = 0.5 * (a - c) / curvature;
    out[static_cast<std::size_t>(t)] = {sr / (chosen + offset), true};
  }
  return out;
}

Eigen::MatrixXd mfcc(const AudioClip& clip, int num_coeffs, const MelConfig& mel) {
  if (num_coeffs < 1 || num_coeffs >= mel.num_mel) {
    throw Error(ErrorKind::kInvalidArgument,
                "mfcc needs 1 <= num_coeffs < num_mel");
  }
  const MelSpectrogram logmel = mel_spectrogram(stft(clip), mel);
  const int m = mel.num_mel;
  // Orthonormal DCT-II basis rows 1..num_coeffs.
  Eigen::MatrixXd dct(num_coeffs, m);
  for (int k = 1; k <= num_coeffs; ++k) {
    for (int i = 0; i < m; ++i) {
      dct(k - 1, i) =
          std::sqrt(2.0 / m) * std::cos(kPi * k * (2.0 * i + 1.0) / (2.0 * m));
    }
  }
  return logmel.frames * dct.transpose();
}

}  // namespace voicemix
