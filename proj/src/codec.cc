// src/codec.cc

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

#include "voicemix/codec.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <random>

#include "binary_io.hpp"
#include "voicemix/errors.hpp"
#include "voicemix/random.hpp"

namespace voicemix {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kFallbackLogF0 = 4.787491742782046;  // log(120 Hz)
constexpr double kFallbackLogF0Std = 0.1;
constexpr int kEnvelopeHalfWidth = 4;  // bins
constexpr double kHarmonicCeilingHz = 7800.0;
constexpr double kVoicingCrossfade = 0.25;  // fraction of a hop
constexpr std::uint16_t kFormatVersion = 1;

void require_finite(const TimbreVector::Values& v) {
  if (!v.allFinite()) {
    throw Error(ErrorKind::kInvalidArgument, "timbre vector has non-finite values");
  }
}

float population_std(const Eigen::Ref<const Eigen::VectorXd>& x, double mean) {
  const double var = (x.array() - mean).square().mean();
  return std::max(static_cast<float>(std::sqrt(var)), kStdFloor);
}

// Harmonic excitation at the per-frame target pitch, crossfaded with white
// noise on unvoiced frames. Both parts have unit power.
Eigen::VectorXd excitation(const Eigen::VectorXd& frame_f0,
                           const std::vector<std::uint8_t>& voicing,
                           const FrameGeometry& g, int sample_rate) {
  const Eigen::Index frames = frame_f0.size();
  const Eigen::Index length = g.num_samples(frames);
  Eigen::VectorXd out(length);
  Rng rng(0x766f6963656d6978ULL);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const double half_window = 0.5 * g.window_length;
  double phase = 0.0;
  double f0 = 0.0;
  for (Eigen::Index t = 0; t < frames; ++t) {
    if (voicing[static_cast<std::size_t>(t)]) {
      f0 = frame_f0[t];
      break;
    }
  }
  if (f0 <= 0.0) f0 = std::exp(kFallbackLogF0);

  for (Eigen::Index n = 0; n < length; ++n) {
    const double pos = std::clamp((n - half_window) / g.hop_length, 0.0,
                                  static_cast<double>(frames - 1));
    const auto i = static_cast<Eigen::Index>(std::floor(pos));
    const Eigen::Index j = std::min(i + 1, frames - 1);
    const double a = pos - static_cast<double>(i);
    const bool vi = voicing[static_cast<std::size_t>(i)] != 0;
    const bool vj = voicing[static_cast<std::size_t>(j)] != 0;
    // Voicing switches at the midpoint between frame centres with a short
    // linear crossfade, so unvoiced frames carry little harmonic energy.
    const double w = std::clamp((a - 0.5) / kVoicingCrossfade + 0.5, 0.0, 1.0);
    const double voiced = (1.0 - w) * (vi ? 1.0 : 0.0) + w * (vj ? 1.0 : 0.0);
    if (vi && vj) {
      f0 = std::exp((1.0 - a) * std::log(frame_f0[i]) + a * std::log(frame_f0[j]));
    } else if (vi) {
      f0 = frame_f0[i];
    } else if (vj) {
      f0 = frame_f0[j];
    }
    phase = std::fmod(phase + 2.0 * kPi * f0 / sample_rate, 2.0 * kPi);

    double harmonic = 0.0;
    const int count = std::max(1, static_cast<int>(kHarmonicCeilingHz / f0));
    for (int k = 1; k <= count; ++k) harmonic += std::cos(k * phase);
    harmonic /= std::sqrt(0.5 * count);
    const double noise = gauss(rng);
    out[n] = voiced * harmonic + (1.0 - voiced) * noise;
  }
  return out;
}

}  // namespace

MelConfig codec_mel_config() { return MelConfig{kCodecBands, 50.0, 7600.0}; }

TimbreVector::TimbreVector(const Values& values) : values_(values) {
  require_finite(values_);
  for (int slot = 0; slot < kTimbreDim; ++slot) {
    if (is_std_slot(slot) && !(values_[slot] >= kStdFloor)) {
      throw Error(ErrorKind::kInvalidArgument,
                  "timbre std slot " + std::to_string(slot) + " below floor");
    }
  }
  const float voiced = values_[kVoicedFractionSlot];
  if (voiced < 0.0f || voiced > 1.0f) {
    throw Error(ErrorKind::kInvalidArgument, "voiced fraction outside [0, 1]");
  }
}

TimbreVector TimbreVector::from_values(std::span<const float> values) {
  if (values.size() != static_cast<std::size_t>(kTimbreDim)) {
    throw Error(ErrorKind::kWrongDimension,
                "timbre vectors have 255 values, got " + std::to_string(values.size()));
  }
  return TimbreVector(Eigen::Map<const Values>(values.data()));
}

TimbreVector TimbreVector::sanitized(Values values) {
  require_finite(values);
  for (int slot = 0; slot < kTimbreDim; ++slot) {
    if (is_std_slot(slot)) values[slot] = std::max(values[slot], kStdFloor);
  }
  values[kVoicedFractionSlot] = std::clamp(values[kVoicedFractionSlot], 0.0f, 1.0f);
  return TimbreVector(values);
}

EncodedUtterance encode(const AudioClip& input) {
  const AudioClip clip = resample(input, kCanonicalRate);
  const FrameGeometry geometry;
  const Eigen::Index frames = geometry.num_frames(clip.size());
  if (frames < kMinEncodeFrames) {
    throw Error(ErrorKind::kClipTooShort,
                "encode needs at least " + std::to_string(kMinEncodeFrames) +
                    " frames (" +
                    std::to_string(geometry.num_samples(kMinEncodeFrames)) +
                    " samples), got " + std::to_string(frames));
  }
  const Eigen::MatrixXd log_mel =
      mel_spectrogram(stft(clip, geometry), codec_mel_config()).frames;
  PitchConfig pitch_config;
  pitch_config.geometry = geometry;
  const std::vector<PitchFrame> pitch = f0_track(clip, pitch_config);

  TimbreVector::Values values;
  for (int b = 0; b < kCodecBands; ++b) {
    const double mean = log_mel.col(b).mean();
    values[kBandMeanSlot + b] = static_cast<float>(mean);
    values[kBandStdSlot + b] = population_std(log_mel.col(b), mean);
  }

  std::vector<double> log_f0;
  for (const auto& p : pitch) {
    if (p.voiced) log_f0.push_back(std::log(p.f0));
  }
  if (log_f0.empty()) {
    values[kLogF0MeanSlot] = static_cast<float>(kFallbackLogF0);
    values[kLogF0StdSlot] = static_cast<float>(kFallbackLogF0Std);
    values[kVoicedFractionSlot] = 0.0f;
  } else {
    const Eigen::Map<const Eigen::VectorXd> lf(log_f0.data(),
                                               static_cast<Eigen::Index>(log_f0.size()));
    const double mean = lf.mean();
    values[kLogF0MeanSlot] = static_cast<float>(mean);
    values[kLogF0StdSlot] = population_std(lf, mean);
    values[kVoicedFractionSlot] =
        static_cast<float>(static_cast<double>(log_f0.size()) / pitch.size());
  }
  TimbreVector timbre(values);

  // Z-scores use the float-rounded statistics so that rendering with the
  // stored timbre inverts them to double precision.
  ContentCode content;
  content.geometry = geometry;
  content.sample_rate = kCanonicalRate;
  const Eigen::RowVectorXd means = timbre.band_means().cast<double>().transpose();
  const Eigen::RowVectorXd stds = timbre.band_stds().cast<double>().transpose();
  content.z_mel = (log_mel.rowwise() - means).array().rowwise() / stds.array();
  content.z_logf0 = Eigen::VectorXd::Zero(frames);
  content.voicing.assign(static_cast<std::size_t>(frames), 0);
  const double f0_mean = timbre.mean_log_f0();
  const double f0_std = timbre.std_log_f0();
  for (Eigen::Index t = 0; t < frames; ++t) {
    const auto& p = pitch[static_cast<std::size_t>(t)];
    if (!p.voiced) continue;
    content.voicing[static_cast<std::size_t>(t)] = 1;
    content.z_logf0[t] = (std::log(p.f0) - f0_mean) / f0_std;
  }
  return {std::move(content), std::move(timbre)};
}

Eigen::MatrixXd render_log_mel(const ContentCode& content, const TimbreVector& timbre) {
  if (content.z_mel.cols() != kCodecBands) {
    throw Error(ErrorKind::kDimensionMismatch,
                "content has " + std::to_string(content.z_mel.cols()) +
                    " bands, the codec uses " + std::to_string(kCodecBands));
  }
  const Eigen::RowVectorXd means = timbre.band_means().cast<double>().transpose();
  const Eigen::RowVectorXd stds = timbre.band_stds().cast<double>().transpose();
  return (content.z_mel.array().rowwise() * stds.array()).rowwise() + means.array();
}

Eigen::VectorXd render_f0(const ContentCode& content, const TimbreVector& timbre) {
  const Eigen::Index frames = content.num_frames();
  if (content.z_logf0.size() != frames ||
      content.voicing.size() != static_cast<std::size_t>(frames)) {
    throw Error(ErrorKind::kDimensionMismatch,
                "content pitch track length differs from its frame count");
  }
  Eigen::VectorXd f0 = Eigen::VectorXd::Zero(frames);
  for (Eigen::Index t = 0; t < frames; ++t) {
    if (content.voicing[static_cast<std::size_t>(t)]) {
      f0[t] = std::exp(content.z_logf0[t] * timbre.std_log_f0() + timbre.mean_log_f0());
    }
  }
  return f0;
}

AudioClip decode(const ContentCode& content, const TimbreVector& timbre) {
  MelSpectrogram target;
  target.frames = render_log_mel(content, timbre);
  target.mel = codec_mel_config();
  target.geometry = content.geometry;
  target.sample_rate = content.sample_rate;
  const Eigen::VectorXd f0 = render_f0(content, timbre);
  const FrameGeometry& g = content.geometry;
  const Eigen::Index frames = content.num_frames();

  AudioClip out;
  out.sample_rate = content.sample_rate;
  if (frames == 0) return out;

  // Spectral envelope: mel inversion smoothed across frequency so that
  // the source's harmonic ripple does not survive a pitch change.
  const Eigen::MatrixXd power = invert_mel_power(target);
  const Eigen::Index bins = power.cols();
  Eigen::MatrixXd envelope(frames, bins);
  for (Eigen::Index k = 0; k < bins; ++k) {
    const Eigen::Index lo = std::max<Eigen::Index>(0, k - kEnvelopeHalfWidth);
    const Eigen::Index hi = std::min<Eigen::Index>(bins - 1, k + kEnvelopeHalfWidth);
    envelope.col(k) = power.middleCols(lo, hi - lo + 1).rowwise().mean();
  }

  const Eigen::VectorXd source = excitation(f0, content.voicing, g, content.sample_rate);
  const Eigen::MatrixXcd excited = stft(AudioClip{source, content.sample_rate}, g).frames;

  const double bin_hz = static_cast<double>(content.sample_rate) / g.fft_size;
  const auto band_lo = static_cast<Eigen::Index>(std::ceil(target.mel.f_min / bin_hz));
  const auto band_hi = std::min<Eigen::Index>(
      bins - 1, static_cast<Eigen::Index>(std::floor(target.mel.f_max / bin_hz)));
  Eigen::MatrixXd magnitude(frames, bins);
  for (Eigen::Index t = 0; t < frames; ++t) {
    const double rms = std::sqrt(
        excited.row(t).segment(band_lo, band_hi - band_lo + 1).cwiseAbs2().mean());
    const double scale = rms > 0.0 ? 1.0 / rms : 0.0;
    for (Eigen::Index k = 0; k < bins; ++k) {
      magnitude(t, k) = std::sqrt(envelope(t, k)) * std::abs(excited(t, k)) * scale;
    }
  }

  GriffinLimOptions options;
  options.normalize = false;
  out = griffin_lim(magnitude, excited, g, content.sample_rate, options);
  out.samples.conservativeResize(frames * g.hop_length);
  normalize_on_overflow(out);
  return out;
}

void save_timbre(const TimbreVector& timbre, const std::filesystem::path& path) {
  detail::ByteWriter w;
  w.magic("TIMB");
  w.u16(kFormatVersion);
  w.u32(kTimbreDim);
  for (int i = 0; i < kTimbreDim; ++i) w.f32(timbre[i]);
  w.write_to(path);
}

TimbreVector load_timbre(const std::filesystem::path& path) {
  auto r = detail::ByteReader::from_file(path);
  r.expect_magic("TIMB");
  const std::uint16_t version = r.u16();
  if (version != kFormatVersion) {
    throw Error(ErrorKind::kBadMagic,
                path.string() + ": unsupported version " + std::to_string(version));
  }
  const std::uint32_t dim = r.u32();
  if (dim != kTimbreDim) {
    throw Error(ErrorKind::kWrongDimension,
                path.string() + ": dimension " + std::to_string(dim));
  }
  std::vector<float> values(kTimbreDim);
  for (auto& v : values) v = r.f32();
  return TimbreVector::from_values(values);
}

void save_content(const ContentCode& content, const std::filesystem::path& path) {
  const Eigen::Index frames = content.num_frames();
  detail::ByteWriter w;
  w.magic("CONT");
  w.u16(kFormatVersion);
  w.u32(static_cast<std::uint32_t>(frames));
  w.u32(static_cast<std::uint32_t>(content.z_mel.cols()));
  for (Eigen::Index t = 0; t < frames; ++t) {
    for (Eigen::Index b = 0; b < content.z_mel.cols(); ++b) {
      w.f32(static_cast<float>(content.z_mel(t, b)));
    }
  }
  for (Eigen::Index t = 0; t < frames; ++t) w.f32(static_cast<float>(content.z_logf0[t]));
  for (auto v : content.voicing) w.u8(v ? 1 : 0);
  w.write_to(path);
}

ContentCode load_content(const std::filesystem::path& path) {
  auto r = detail::ByteReader::from_file(path);
  r.expect_magic("CONT");
  const std::uint16_t version = r.u16();
  if (version != kFormatVersion) {
    throw Error(ErrorKind::kBadMagic,
                path.string() + ": unsupported version " + std::to_string(version));
  }
  const std::uint32_t frames = r.u32();
  const std::uint32_t bands = r.u32();
  // 4 bytes per z_mel value, 4 per z_logf0 value, 1 per voicing flag.
  r.need(static_cast<std::size_t>(frames) * (4 * bands + 5));
  ContentCode content;
  content.z_mel.resize(frames, bands);
  for (std::uint32_t t = 0; t < frames; ++t) {
    for (std::uint32_t b = 0; b < bands; ++b) content.z_mel(t, b) = r.f32();
  }
  content.z_logf0.resize(frames);
  for (std::uint32_t t = 0; t < frames; ++t) content.z_logf0[t] = r.f32();
  content.voicing.resize(frames);
  for (auto& v : content.voicing) v = r.u8();
  return content;
}

}  // namespace voicemix
