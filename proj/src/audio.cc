// src/audio.cc

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

#include "voicemix/audio.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <vector>

#include "voicemix/errors.hpp"

namespace voicemix {

namespace {

constexpr double kPi = 3.14159265358979323846;

std::uint16_t read_u16(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

std::uint32_t read_u32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) |
         (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) |
         (static_cast<std::uint32_t>(p[3]) << 24);
}

void put_u16(std::vector<unsigned char>& out, std::uint16_t v) {
  out.push_back(v & 0xff);
  out.push_back((v >> 8) & 0xff);
}

void put_u32(std::vector<unsigned char>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back((v >> (8 * i)) & 0xff);
}

struct ParsedWav {
  WavInfo info;
  std::size_t data_offset = 0;
  std::size_t data_size = 0;
};

std::vector<unsigned char> read_file(const std::filesystem::path& path,
                                     std::size_t max_bytes = 0) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kMissingFile, path.string());
  std::vector<unsigned char> bytes;
  if (max_bytes == 0) {
    bytes.assign(std::istreambuf_iterator<char>(in), {});
  } else {
    bytes.resize(max_bytes);
    in.read(reinterpret_cast<char*>(bytes.data()),
            static_cast<std::streamsize>(max_bytes));
    bytes.resize(static_cast<std::size_t>(in.gcount()));
  }
  return bytes;
}

// Walks the chunk list. When `header_only` the data chunk may extend past the
// buffer; its size is taken from the chunk header.
ParsedWav parse_wav(const std::vector<unsigned char>& b,
                    const std::filesystem::path& path, bool header_only) {
  if (b.size() < 12 || std::memcmp(b.data(), "RIFF", 4) != 0 ||
      std::memcmp(b.data() + 8, "WAVE", 4) != 0) {
    throw Error(ErrorKind::kUnsupportedEncoding,
                path.string() + " is not a RIFF/WAVE file");
  }
  ParsedWav wav;
  bool have_fmt = false;
  bool have_data = false;
  std::size_t pos = 12;
  while (pos + 8 <= b.size()) {
    const std::uint32_t chunk_size = read_u32(b.data() + pos + 4);
    const unsigned char* body = b.data() + pos + 8;
    if (std::memcmp(b.data() + pos, "fmt ", 4) == 0) {
      if (pos + 8 + 16 > b.size()) break;
      std::uint16_t format = read_u16(body);
      wav.info.channels = read_u16(body + 2);
      wav.info.sample_rate = static_cast<int>(read_u32(body + 4));
      wav.info.bits_per_sample = read_u16(body + 14);
      if (format == 0xFFFE && chunk_size >= 40 && pos + 8 + 40 <= b.size()) {
        format = read_u16(body + 24);  // sub-format GUID prefix
      }
      if (format == 1 && wav.info.bits_per_sample == 16) {
        wav.info.is_float = false;
      } else if (format == 3 && wav.info.bits_per_sample == 32) {
        wav.info.is_float = true;
      } else {
        throw Error(ErrorKind::kUnsupportedEncoding,
                    path.string() + ": format " + std::to_string(format) +
                        " with " + std::to_string(wav.info.bits_per_sample) +
                        " bits per sample");
      }
      if (wav.info.channels < 1 || wav.info.channels > 2) {
        throw Error(ErrorKind::kUnsupportedEncoding,
                    path.string() + ": " + std::to_string(wav.info.channels) +
                        " channels");
      }
      if (wav.info.sample_rate <= 0) {
        throw Error(ErrorKind::kUnsupportedEncoding,
                    path.string() + ": invalid sample rate");
      }
      have_fmt = true;
    } else if (std::memcmp(b.data() + pos, "data", 4) == 0) {
      if (!have_fmt) break;
      wav.data_offset = pos + 8;
      wav.data_size = chunk_size;
      if (!header_only) {
        wav.data_size = std::min<std::size_t>(chunk_size, b.size() - pos - 8);
      }
      have_data = true;
      break;
    }
    pos += 8 + chunk_size + (chunk_size & 1);
  }
  if (!have_fmt || !have_data) {
    throw Error(ErrorKind::kUnsupportedEncoding,
                path.string() + ": missing fmt or data chunk");
  }
  const std::size_t frame_bytes =
      static_cast<std::size_t>(wav.info.channels) * wav.info.bits_per_sample / 8;
  wav.info.num_frames = static_cast<std::int64_t>(wav.data_size / frame_bytes);
  return wav;
}

double bessel_i0(double x) { return std::cyl_bessel_i(0.0, x); }

}  // namespace

WavInfo read_wav_info(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) {
    throw Error(ErrorKind::kMissingFile, path.string());
  }
  auto bytes = read_file(path, 4096);
  return parse_wav(bytes, path, true).info;
}

AudioClip load_wav(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) {
    throw Error(ErrorKind::kMissingFile, path.string());
  }
  const auto bytes = read_file(path);
  const ParsedWav wav = parse_wav(bytes, path, false);
  const int channels = wav.info.channels;
  const Eigen::Index frames = wav.info.num_frames;
  AudioClip clip;
  clip.sample_rate = wav.info.sample_rate;
  clip.samples.setZero(frames);
  const unsigned char* data = bytes.data() + wav.data_offset;
  for (Eigen::Index i = 0; i < frames; ++i) {
    double acc = 0.0;
    for (int c = 0; c < channels; ++c) {
      const std::size_t k = static_cast<std::size_t>(i) * channels + c;
      if (wav.info.is_float) {
        float v;
        std::uint32_t bits = read_u32(data + 4 * k);
        std::memcpy(&v, &bits, sizeof v);
        acc += static_cast<double>(v);
      } else {
        const auto v = static_cast<std::int16_t>(read_u16(data + 2 * k));
        acc += static_cast<double>(v) / 32768.0;
      }
    }
    clip.samples[i] = acc / channels;
  }
  if (!clip.samples.allFinite()) {
    throw Error(ErrorKind::kUnsupportedEncoding,
                path.string() + ": non-finite samples");
  }
  normalize_on_overflow(clip);
  return clip;
}

void save_wav(const AudioClip& clip, const std::filesystem::path& path) {
  const auto n = static_cast<std::uint32_t>(clip.samples.size());
  std::vector<unsigned char> out;
  out.reserve(44 + 2 * n);
  out.insert(out.end(), {'R', 'I', 'F', 'F'});
  put_u32(out, 36 + 2 * n);
  out.insert(out.end(), {'W', 'A', 'V', 'E', 'f', 'm', 't', ' '});
  put_u32(out, 16);
  put_u16(out, 1);
  put_u16(out, 1);
  put_u32(out, static_cast<std::uint32_t>(clip.sample_rate));
  put_u32(out, static_cast<std::uint32_t>(clip.sample_rate) * 2);
  put_u16(out, 2);
  put_u16(out, 16);
  out.insert(out.end(), {'d', 'a', 't', 'a'});
  put_u32(out, 2 * n);
  for (Eigen::Index i = 0; i < clip.samples.size(); ++i) {
    const double scaled = std::round(clip.samples[i] * 32768.0);
    const auto v = static_cast<std::int16_t>(std::clamp(scaled, -32768.0, 32767.0));
    put_u16(out, static_cast<std::uint16_t>(v));
  }
  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) throw Error(ErrorKind::kUnwritablePath, path.string());
  file.write(reinterpret_cast<const char*>(out.data()),
             static_cast<std::streamsize>(out.size()));
  if (!file) throw Error(ErrorKind::kUnwritablePath, path.string());
}

AudioClip load_canonical(const std::filesystem::path& path) {
  return resample(load_wav(path), kCanonicalRate);
}

Eigen::VectorXd resample_signal(const Eigen::Ref<const Eigen::VectorXd>& x,
                                double from_rate, double to_rate) {
  if (from_rate <= 0 || to_rate <= 0) {
    throw Error(ErrorKind::kInvalidArgument, "sample rates must be positive");
  }
  const double ratio = to_rate / from_rate;
  const auto out_len =
      static_cast<Eigen::Index>(std::llround(static_cast<double>(x.size()) * ratio));
  constexpr int kTaps = 64;
  constexpr int kHalf = kTaps / 2;
  constexpr double kBeta = 5.0;
  // Cutoff relative to the input Nyquist frequency.
  const double cutoff = 0.95 * std::min(1.0, ratio);
  const double i0_beta = bessel_i0(kBeta);

  Eigen::VectorXd y(out_len);
  for (Eigen::Index m = 0; m < out_len; ++m) {
    const double t = static_cast<double>(m) / ratio;
    const auto base = static_cast<Eigen::Index>(std::floor(t));
    double acc = 0.0;
    for (Eigen::Index k = base - kHalf + 1; k <= base + kHalf; ++k) {
      if (k < 0 || k >= x.size()) continue;
      const double d = t - static_cast<double>(k);
      const double u = d / kHalf;
      if (std::abs(u) >= 1.0) continue;
      const double window = bessel_i0(kBeta * std::sqrt(1.0 - u * u)) / i0_beta;
      const double arg = cutoff * d;
      const double sinc = arg == 0.0 ? 1.0 : std::sin(kPi * arg) / (kPi * arg);
      acc += x[k] * cutoff * sinc * window;
    }
    y[m] = acc;
  }
  return y;
}

AudioClip resample(const AudioClip& clip, int target_rate) {
  if (target_rate <= 0) {
    throw Error(ErrorKind::kInvalidArgument, "target rate must be positive");
  }
  if (target_rate == clip.sample_rate) return clip;
  AudioClip out;
  out.sample_rate = target_rate;
  out.samples = resample_signal(clip.samples, clip.sample_rate, target_rate);
  normalize_on_overflow(out);
  return out;
}

double peak(const AudioClip& clip) {
  return clip.samples.size() == 0 ? 0.0 : clip.samples.cwiseAbs().maxCoeff();
}

void normalize_on_overflow(AudioClip& clip) {
  if (peak(clip) > 1.0) peak_normalize(clip, 0.95);
}

void peak_normalize(AudioClip& clip, double target) {
  const double p = peak(clip);
  if (p > 0.0) clip.samples *= target / p;
}

}  // namespace voicemix
