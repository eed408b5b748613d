// Copyright 2026 The ffsv Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "ffsv/features.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>

#include "ffsv/common.hpp"
#include "ffsv/stft.hpp"

namespace ffsv {

double HzToMel(double hz) {
  if (!(hz >= 0.0)) Fail(ErrorKind::kInvalidArgument, "negative frequency");
  return 2595.0 * std::log10(1.0 + hz / 700.0);
}

double MelToHz(double mel) {
  return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0);
}

namespace {

double ResolveFMax(const MelConfig& config, std::uint32_t sample_rate_hz) {
  return config.f_max.value_or(sample_rate_hz / 2.0);
}

}  // namespace

MelFilterbank BuildMelFilterbank(const MelConfig& config,
                                 std::uint32_t sample_rate_hz) {
  const double nyquist = sample_rate_hz / 2.0;
  const double f_max = ResolveFMax(config, sample_rate_hz);
  if (sample_rate_hz == 0) Fail(ErrorKind::kInvalidArgument, "sample rate must be positive");
  if (config.n_mels < 2) Fail(ErrorKind::kInvalidArgument, "n_mels must be >= 2");
  if (!(config.f_min >= 0.0 && config.f_min < f_max && f_max <= nyquist)) {
    Fail(ErrorKind::kInvalidArgument,
         StrFormat("need 0 <= f_min < f_max <= %.1f Hz", nyquist));
  }
  if (config.n_fft < 2 || !IsPowerOfTwo(config.n_fft)) {
    Fail(ErrorKind::kInvalidArgument, "n_fft must be a power of two");
  }

  MelFilterbank fb;
  fb.n_mels = config.n_mels;
  fb.bins = config.n_fft / 2 + 1;
  fb.weights.assign(fb.n_mels * fb.bins, 0.0);
  fb.center_hz.resize(fb.n_mels);

  const double mel_lo = HzToMel(config.f_min);
  const double mel_hi = HzToMel(f_max);
  std::vector<double> edges(fb.n_mels + 2);
  for (std::size_t i = 0; i < edges.size(); ++i) {
    edges[i] = MelToHz(mel_lo + (mel_hi - mel_lo) * static_cast<double>(i) /
                                    static_cast<double>(fb.n_mels + 1));
  }
  const double bin_hz = static_cast<double>(sample_rate_hz) /
                        static_cast<double>(config.n_fft);
  for (std::size_t m = 0; m < fb.n_mels; ++m) {
    const double left = edges[m];
    const double center = edges[m + 1];
    const double right = edges[m + 2];
    fb.center_hz[m] = center;
    bool any = false;
    for (std::size_t k = 0; k < fb.bins; ++k) {
      const double f = static_cast<double>(k) * bin_hz;
      const double up = (f - left) / (center - left);
      const double down = (right - f) / (right - center);
      const double w = std::max(0.0, std::min(up, down));
      fb.weights[m * fb.bins + k] = w;
      any = any || w > 0.0;
    }
    if (!any) {
      Fail(ErrorKind::kInvalidArgument,
           StrFormat("mel filter %zu (%.1f-%.1f Hz) covers no FFT bin; "
                     "n_mels=%zu is too large for n_fft=%zu",
                     m, left, right, config.n_mels, config.n_fft));
    }
  }
  return fb;
}

MelSpectrogram LogMel(const AudioBuffer& buffer, const MelConfig& config) {
  if (buffer.size() < config.n_fft) {
    Fail(ErrorKind::kData,
         StrFormat("%s: %zu samples is shorter than n_fft %zu",
                   buffer.source_id.c_str(), buffer.size(), config.n_fft));
  }
  if (!(config.log_floor > 0.0)) {
    Fail(ErrorKind::kInvalidArgument, "log_floor must be positive");
  }
  const MelFilterbank fb = BuildMelFilterbank(config, buffer.sample_rate_hz);
  const Spectrogram spec = Stft(buffer, config.n_fft, config.hop);

  MelSpectrogram out;
  out.frames = spec.frames;
  out.n_mels = fb.n_mels;
  out.config = config;
  out.config.f_max = ResolveFMax(config, buffer.sample_rate_hz);
  out.values.resize(out.frames * out.n_mels);
  std::vector<double> power(spec.bins);
  for (std::size_t t = 0; t < spec.frames; ++t) {
    for (std::size_t k = 0; k < spec.bins; ++k) power[k] = std::norm(spec.at(t, k));
    for (std::size_t m = 0; m < fb.n_mels; ++m) {
      double e = 0.0;
      for (std::size_t k = 0; k < spec.bins; ++k) e += fb.at(m, k) * power[k];
      out.values[t * out.n_mels + m] = std::log10(std::max(e, config.log_floor));
    }
  }
  return out;
}

namespace {

constexpr char kMelMagic[] = "MELF0001";

void PutU32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

std::uint32_t GetU32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) |
         (static_cast<std::uint32_t>(p[3]) << 24);
}

}  // namespace

std::string EncodeMelMatrix(const MelSpectrogram& mel) {
  std::string out(kMelMagic, 8);
  PutU32(out, static_cast<std::uint32_t>(mel.frames));
  PutU32(out, static_cast<std::uint32_t>(mel.n_mels));
  for (double v : mel.values) PutU32(out, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
  return out;
}

MelSpectrogram DecodeMelMatrix(std::string_view bytes) {
  if (bytes.size() < 16 || bytes.substr(0, 8) != std::string_view(kMelMagic, 8)) {
    Fail(ErrorKind::kFormat, "not a MELF0001 matrix");
  }
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
  MelSpectrogram mel;
  mel.frames = GetU32(p + 8);
  mel.n_mels = GetU32(p + 12);
  const std::size_t count = mel.frames * mel.n_mels;
  if (bytes.size() != 16 + 4 * count) {
    Fail(ErrorKind::kFormat, "MELF0001 payload size does not match header");
  }
  mel.values.resize(count);
  for (std::size_t i = 0; i < count; ++i) {
    mel.values[i] = std::bit_cast<float>(GetU32(p + 16 + 4 * i));
  }
  return mel;
}

void WriteMelMatrix(const MelSpectrogram& mel, const std::filesystem::path& path) {
  WriteFileBytes(path, EncodeMelMatrix(mel));
}

}  // namespace ffsv
