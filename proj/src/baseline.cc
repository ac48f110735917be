// src/baseline.cc

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

#include "voicemix/baseline.hpp"

#include <algorithm>
#include <cmath>
#include <complex>

#include "binary_io.hpp"
#include "voicemix/errors.hpp"

namespace voicemix {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr std::uint16_t kFeatureVersion = 1;

double wrap_phase(double x) { return x - 2.0 * kPi * std::round(x / (2.0 * kPi)); }

double uniform(Rng& rng, double lo, double hi) { return lo + (hi - lo) * uniform01(rng); }

int uniform_int(Rng& rng, int lo, int hi) {
  return lo + static_cast<int>(uniform_index(rng, static_cast<std::size_t>(hi - lo + 1)));
}

// Hop = fft / 4 so the per-bin phase deviation resolves +-2 bins, the width
// of the Hann main lobe. The shared 400/160 analysis frames resolve only
// +-1.6 bins, and stretched partials then cancel.
constexpr FrameGeometry kVocoderGeometry{512, 512, 128};

// Phase-vocoder resynthesis of `x` read at `rate` frames per output frame.
Eigen::VectorXd stretch_samples(const Eigen::VectorXd& x, double rate, int sample_rate) {
  const FrameGeometry g = kVocoderGeometry;
  AudioClip in{x, sample_rate};
  const Spectrogram spec = stft(in, g);
  const Eigen::Index frames = spec.num_frames();
  const int bins = g.num_bins();

  Eigen::VectorXd expected(bins);
  for (int k = 0; k < bins; ++k) expected[k] = 2.0 * kPi * k * g.hop_length / g.fft_size;

  std::vector<double> positions;
  for (double t = 0.0; t < static_cast<double>(frames - 1) + 1e-9; t += rate) {
    positions.push_back(t);
  }
  Spectrogram out;
  out.geometry = g;
  out.sample_rate = sample_rate;
  out.frames.resize(static_cast<Eigen::Index>(positions.size()), bins);

  Eigen::VectorXd phase = spec.frames.row(0).transpose().array().arg();
  for (std::size_t k = 0; k < positions.size(); ++k) {
    const double t = positions[k];
    const auto i = static_cast<Eigen::Index>(std::floor(t));
    const Eigen::Index j = std::min(i + 1, frames - 1);
    const double a = t - static_cast<double>(i);
    for (int b = 0; b < bins; ++b) {
      const double mag = (1.0 - a) * std::abs(spec.frames(i, b)) + a * std::abs(spec.frames(j, b));
      out.frames(static_cast<Eigen::Index>(k), b) = std::polar(mag, phase[b]);
      const double dphi =
          std::arg(spec.frames(j, b)) - std::arg(spec.frames(i, b)) - expected[b];
      phase[b] += expected[b] + wrap_phase(dphi);
    }
  }
  return istft(out).samples;
}

}  // namespace

void WaveformAugConfig::validate() const {
  if (!(0.0 < stretch_min && stretch_min <= stretch_max) ||
      !(pitch_min_semitones <= pitch_max_semitones) || !(gain_min_db <= gain_max_db) ||
      !(probability >= 0.0 && probability <= 1.0)) {
    throw Error(ErrorKind::kInvalidArgument, "waveform augmentation ranges are invalid");
  }
}

AudioClip time_stretch(const AudioClip& clip, double rate) {
  if (!(rate > 0.0)) throw Error(ErrorKind::kInvalidArgument, "stretch rate must be positive");
  const FrameGeometry g = kVocoderGeometry;
  if (clip.size() < FrameGeometry{}.window_length) {
    throw Error(ErrorKind::kClipTooShort, "time stretch needs one full window");
  }
  // Zero padding keeps the poorly normalized ISTFT edges out of the result.
  const Eigen::Index pad = g.window_length;
  Eigen::VectorXd padded = Eigen::VectorXd::Zero(clip.size() + 2 * pad);
  padded.segment(pad, clip.size()) = clip.samples;
  const Eigen::VectorXd y = stretch_samples(padded, rate, clip.sample_rate);

  const auto offset = static_cast<Eigen::Index>(std::lround(pad / rate));
  const auto length = static_cast<Eigen::Index>(std::lround(clip.size() / rate));
  AudioClip out;
  out.sample_rate = clip.sample_rate;
  out.samples = Eigen::VectorXd::Zero(length);
  const Eigen::Index avail = std::clamp<Eigen::Index>(y.size() - offset, 0, length);
  out.samples.head(avail) = y.segment(offset, avail);
  normalize_on_overflow(out);
  return out;
}

AudioClip pitch_shift(const AudioClip& clip, double semitones) {
  const double factor = std::pow(2.0, semitones / 12.0);
  const AudioClip stretched = time_stretch(clip, 1.0 / factor);
  AudioClip out;
  out.sample_rate = clip.sample_rate;
  const Eigen::VectorXd shifted = resample_signal(stretched.samples, factor, 1.0);
  out.samples = Eigen::VectorXd::Zero(clip.size());
  const Eigen::Index keep = std::min(clip.size(), shifted.size());
  out.samples.head(keep) = shifted.head(keep);
  normalize_on_overflow(out);
  return out;
}

AudioClip apply_gain(const AudioClip& clip, double db) {
  AudioClip out = clip;
  out.samples *= std::pow(10.0, db / 20.0);
  normalize_on_overflow(out);
  return out;
}

WaveformAugResult waveform_augment(const AudioClip& clip, const WaveformAugConfig& config,
                                   Rng& rng) {
  config.validate();
  if (clip.size() < FrameGeometry{}.window_length) {
    throw Error(ErrorKind::kClipTooShort, "waveform augmentation needs one full window");
  }
  // All draws happen up front so the stream does not depend on the choices.
  const bool do_stretch = uniform01(rng) < config.probability;
  const double rate = uniform(rng, config.stretch_min, config.stretch_max);
  const bool do_pitch = uniform01(rng) < config.probability;
  const double semitones =
      uniform(rng, config.pitch_min_semitones, config.pitch_max_semitones);
  bool do_gain = uniform01(rng) < config.probability;
  const double gain_db = uniform(rng, config.gain_min_db, config.gain_max_db);
  if (!do_stretch && !do_pitch) do_gain = true;

  WaveformAugResult result{clip, {}};
  result.record.method = "waveform";
  Json params = Json::object();
  if (do_stretch) {
    result.audio = time_stretch(result.audio, rate);
    params["stretch_rate"] = rate;
  }
  if (do_pitch) {
    result.audio = pitch_shift(result.audio, semitones);
    params["pitch_semitones"] = semitones;
  }
  if (do_gain) {
    result.audio = apply_gain(result.audio, gain_db);
    params["gain_db"] = gain_db;
  }
  result.record.params = std::move(params);
  return result;
}

void SpecAugConfig::validate() const {
  if (num_freq_masks < 0 || num_time_masks < 0 || max_freq_width < 0 ||
      !(max_time_fraction >= 0.0 && max_time_fraction < 1.0)) {
    throw Error(ErrorKind::kInvalidArgument, "SpecAugment settings are invalid");
  }
}

Eigen::MatrixXd apply_masks(const Eigen::MatrixXd& features,
                            const std::vector<SpecMask>& masks, double fill) {
  Eigen::MatrixXd out = features;
  for (const auto& m : masks) {
    if (m.width <= 0) continue;
    if (m.axis == SpecMask::Axis::kFrequency) {
      out.middleCols(m.start, m.width).setConstant(fill);
    } else {
      out.middleRows(m.start, m.width).setConstant(fill);
    }
  }
  return out;
}

SpecAugResult spec_augment(const MelSpectrogram& mel, const SpecAugConfig& config, Rng& rng) {
  config.validate();
  const auto frames = static_cast<int>(mel.frames.rows());
  const auto bands = static_cast<int>(mel.frames.cols());
  const int max_time = static_cast<int>(std::floor(config.max_time_fraction * frames));
  if (config.num_freq_masks > 0 && config.max_freq_width >= bands) {
    throw Error(ErrorKind::kFeatureTooSmall,
                std::to_string(bands) + " bands for frequency masks up to " +
                    std::to_string(config.max_freq_width));
  }
  if (config.num_time_masks > 0 && (max_time < 1 || max_time >= frames)) {
    throw Error(ErrorKind::kFeatureTooSmall,
                std::to_string(frames) + " frames are too few for time masks");
  }

  SpecAugResult result;
  result.fill = mel.frames.mean();
  for (int i = 0; i < config.num_freq_masks; ++i) {
    const int width = uniform_int(rng, 0, config.max_freq_width);
    const int start = uniform_int(rng, 0, bands - width);
    result.masks.push_back({SpecMask::Axis::kFrequency, start, width});
  }
  for (int i = 0; i < config.num_time_masks; ++i) {
    const int width = uniform_int(rng, 0, max_time);
    const int start = uniform_int(rng, 0, frames - width);
    result.masks.push_back({SpecMask::Axis::kTime, start, width});
  }
  result.mel = mel;
  result.mel.frames = apply_masks(mel.frames, result.masks, result.fill);

  result.record.method = "specaugment";
  Json masks = Json::array();
  for (const auto& m : result.masks) {
    masks.push_back({{"axis", m.axis == SpecMask::Axis::kFrequency ? "frequency" : "time"},
                     {"start", m.start},
                     {"width", m.width}});
  }
  result.record.params = {{"fill", result.fill}, {"masks", std::move(masks)}};
  return result;
}

void save_features(const Eigen::MatrixXd& features, const std::filesystem::path& path) {
  detail::ByteWriter w;
  w.magic("MELF");
  w.u16(kFeatureVersion);
  w.u32(static_cast<std::uint32_t>(features.rows()));
  w.u32(static_cast<std::uint32_t>(features.cols()));
  for (Eigen::Index t = 0; t < features.rows(); ++t) {
    for (Eigen::Index b = 0; b < features.cols(); ++b) {
      w.f32(static_cast<float>(features(t, b)));
    }
  }
  w.write_to(path);
}

Eigen::MatrixXd load_features(const std::filesystem::path& path) {
  auto r = detail::ByteReader::from_file(path);
  r.expect_magic("MELF");
  if (r.u16() != kFeatureVersion) {
    throw Error(ErrorKind::kBadMagic, path.string() + ": unsupported MELF version");
  }
  const std::uint32_t frames = r.u32();
  const std::uint32_t bands = r.u32();
  Eigen::MatrixXd out(frames, bands);
  for (std::uint32_t t = 0; t < frames; ++t) {
    for (std::uint32_t b = 0; b < bands; ++b) out(t, b) = r.f32();
  }
  return out;
}

AugmentedUtterance vc_augment(const AudioClip& source, const CorpusIndex& corpus,
                              const std::string& source_utt, Rng& rng,
                              const MixupConfig& config, const CodecBackend& backend,
                              const TimbreLookup& timbres,
                              const std::filesystem::path& scratch) {
  const PartnerSelection selection = select_partners(corpus, source_utt, rng, config, 0);
  return augment_utterance(source, selection, MixDraw{}, config, backend, timbres, scratch);
}

}  // namespace voicemix
