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

#include "ffsv/denoise.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

#include "ffsv/common.hpp"

namespace ffsv {

namespace {

constexpr double kMagFloor = 1e-10;

// Separable box filter; edges average over in-range neighbours only.
std::vector<double> BoxSmooth(const std::vector<double>& in, std::size_t rows,
                              std::size_t cols, std::size_t width_rows,
                              std::size_t width_cols) {
  auto pass = [](const std::vector<double>& src, std::size_t rows,
                 std::size_t cols, std::size_t width, bool along_rows) {
    if (width <= 1) return src;
    const auto half = static_cast<std::ptrdiff_t>(width / 2);
    std::vector<double> dst(src.size());
    const std::size_t outer = along_rows ? cols : rows;
    const std::size_t inner = along_rows ? rows : cols;
    for (std::size_t o = 0; o < outer; ++o) {
      for (std::size_t i = 0; i < inner; ++i) {
        const auto lo = std::max<std::ptrdiff_t>(0, static_cast<std::ptrdiff_t>(i) - half);
        const auto hi = std::min<std::ptrdiff_t>(
            static_cast<std::ptrdiff_t>(inner) - 1,
            static_cast<std::ptrdiff_t>(i) + static_cast<std::ptrdiff_t>(width) - 1 - half);
        double sum = 0.0;
        for (auto j = lo; j <= hi; ++j) {
          const std::size_t idx = along_rows
                                      ? static_cast<std::size_t>(j) * cols + o
                                      : o * cols + static_cast<std::size_t>(j);
          sum += src[idx];
        }
        const std::size_t out_idx = along_rows ? i * cols + o : o * cols + i;
        dst[out_idx] = sum / static_cast<double>(hi - lo + 1);
      }
    }
    return dst;
  };
  return pass(pass(in, rows, cols, width_rows, true), rows, cols, width_cols,
              false);
}

}  // namespace

void ValidateGateConfig(const GateConfig& c) {
  if (!(c.prop_decrease >= 0.0 && c.prop_decrease <= 1.0)) {
    Fail(ErrorKind::kInvalidArgument, "prop_decrease must be in [0, 1]");
  }
  if (!(c.n_std_thresh > 0.0) || !std::isfinite(c.n_std_thresh)) {
    Fail(ErrorKind::kInvalidArgument, "n_std_thresh must be positive");
  }
  if (c.n_fft < 2 || !IsPowerOfTwo(c.n_fft)) {
    Fail(ErrorKind::kInvalidArgument, "n_fft must be a power of two");
  }
  if (c.hop < 1 || c.hop > c.n_fft) {
    Fail(ErrorKind::kInvalidArgument, "hop must be in [1, n_fft]");
  }
  if (!(c.ema_coeff >= 0.0 && c.ema_coeff < 1.0)) {
    Fail(ErrorKind::kInvalidArgument, "ema coefficient must be in [0, 1)");
  }
}

std::vector<double> GateMask(const Spectrogram& spec, const GateConfig& config) {
  ValidateGateConfig(config);
  const std::size_t frames = spec.frames;
  const std::size_t bins = spec.bins;
  std::vector<double> db(frames * bins);
  for (std::size_t i = 0; i < db.size(); ++i) {
    db[i] = 20.0 * std::log10(std::abs(spec.data[i]) + kMagFloor);
  }

  const double attenuated = 1.0 - config.prop_decrease;
  std::vector<double> mask(frames * bins, attenuated);
  if (config.stationary) {
    for (std::size_t b = 0; b < bins; ++b) {
      double mean = 0.0;
      for (std::size_t t = 0; t < frames; ++t) mean += db[t * bins + b];
      mean /= static_cast<double>(frames);
      double var = 0.0;
      for (std::size_t t = 0; t < frames; ++t) {
        const double d = db[t * bins + b] - mean;
        var += d * d;
      }
      const double thresh =
          mean + config.n_std_thresh * std::sqrt(var / static_cast<double>(frames));
      for (std::size_t t = 0; t < frames; ++t) {
        if (db[t * bins + b] > thresh) mask[t * bins + b] = 1.0;
      }
    }
  } else {
    const double a = config.ema_coeff;
    std::vector<double> mean(db.begin(), db.begin() + static_cast<std::ptrdiff_t>(bins));
    std::vector<double> var(bins, 0.0);
    for (std::size_t t = 0; t < frames; ++t) {
      for (std::size_t b = 0; b < bins; ++b) {
        const double x = db[t * bins + b];
        if (t > 0) {
          const double d = x - mean[b];
          mean[b] = a * mean[b] + (1.0 - a) * x;
          var[b] = a * var[b] + (1.0 - a) * d * d;
        }
        const double thresh = mean[b] + config.n_std_thresh * std::sqrt(var[b]);
        if (x > thresh) mask[t * bins + b] = 1.0;
      }
    }
  }
  return BoxSmooth(mask, frames, bins, config.smooth_frames, config.smooth_bins);
}

Spectrogram ApplyGain(const Spectrogram& spec, const std::vector<double>& gain) {
  if (gain.size() != spec.data.size()) {
    Fail(ErrorKind::kInvalidArgument, "gain shape does not match spectrogram");
  }
  Spectrogram out = spec;
  for (std::size_t i = 0; i < gain.size(); ++i) out.data[i] *= gain[i];
  return out;
}

AudioBuffer SpectralGate(const AudioBuffer& buffer, const GateConfig& config) {
  ValidateGateConfig(config);
  if (buffer.size() < config.n_fft) {
    Fail(ErrorKind::kData,
         StrFormat("%s: %zu samples is shorter than n_fft %zu",
                   buffer.source_id.c_str(), buffer.size(), config.n_fft));
  }
  const Spectrogram spec = Stft(buffer, config.n_fft, config.hop);
  AudioBuffer out = Istft(ApplyGain(spec, GateMask(spec, config)));
  out.source_id = buffer.source_id;
  return out;
}

std::size_t DenoiseDirectory(const std::filesystem::path& in_dir,
                             const std::filesystem::path& out_dir,
                             const GateConfig& config, int channel, int workers) {
  ValidateGateConfig(config);
  const auto files = ListWavFiles(in_dir);
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) Fail(ErrorKind::kIo, "cannot create " + out_dir.string());
  ParallelFor(files.size(), workers, [&](std::size_t i) {
    std::optional<int> ch;
    if (channel >= 0) ch = channel;
    const AudioBuffer in = ReadWav(files[i], ch);
    WriteWav(SpectralGate(in, config), out_dir / files[i].filename());
  });
  return files.size();
}

}  // namespace ffsv
