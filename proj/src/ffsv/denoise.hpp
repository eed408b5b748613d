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

#ifndef FFSV_DENOISE_HPP_
#define FFSV_DENOISE_HPP_

#include <filesystem>
#include <vector>

#include "ffsv/audio_io.hpp"
#include "ffsv/stft.hpp"

namespace ffsv {

struct GateConfig {
  double prop_decrease = 1.0;  // fraction of gated energy removed
  double n_std_thresh = 1.0;
  bool stationary = false;
  std::size_t n_fft = 1024;
  std::size_t hop = 256;
  std::size_t smooth_frames = 3;  // box width; 0 or 1 disables
  std::size_t smooth_bins = 3;
  double ema_coeff = 0.95;  // weight on the running statistic (non-stationary)
};

void ValidateGateConfig(const GateConfig& config);

// Gain per (frame, bin), frame-major. 1 where the cell's magnitude in dB
// exceeds its threshold, 1 - prop_decrease elsewhere, then box-smoothed.
//
// Stationary: threshold[bin] = mean + n_std * std of dB over all frames.
// Non-stationary: causal exponential moving mean m and variance v per bin,
//   m_t = a m_{t-1} + (1 - a) x_t,  v_t = a v_{t-1} + (1 - a)(x_t - m_{t-1})^2,
//   threshold[t][bin] = m_t + n_std * sqrt(v_t), seeded with m_0 = x_0, v_0 = 0.
std::vector<double> GateMask(const Spectrogram& spec, const GateConfig& config);

Spectrogram ApplyGain(const Spectrogram& spec, const std::vector<double>& gain);

AudioBuffer SpectralGate(const AudioBuffer& buffer, const GateConfig& config);

// Gates every WAV in in_dir into same-named files in out_dir.
std::size_t DenoiseDirectory(const std::filesystem::path& in_dir,
                             const std::filesystem::path& out_dir,
                             const GateConfig& config, int channel, int workers);

}  // namespace ffsv

#endif  // FFSV_DENOISE_HPP_
