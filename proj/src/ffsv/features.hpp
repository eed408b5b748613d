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

#ifndef FFSV_FEATURES_HPP_
#define FFSV_FEATURES_HPP_

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "ffsv/audio_io.hpp"

namespace ffsv {

struct MelConfig {
  std::size_t n_fft = 512;
  std::size_t hop = 160;
  std::size_t n_mels = 64;
  double f_min = 20.0;
  std::optional<double> f_max;  // Nyquist when unset
  double log_floor = 1e-10;
};

// HTK convention.
double HzToMel(double hz);
double MelToHz(double mel);

struct MelFilterbank {
  std::size_t n_mels = 0;
  std::size_t bins = 0;
  std::vector<double> weights;    // n_mels x bins, row-major
  std::vector<double> center_hz;  // n_mels

  double at(std::size_t mel, std::size_t bin) const {
    return weights[mel * bins + bin];
  }
};

// Triangles with mel-uniform edges between f_min and f_max, evaluated at the
// FFT bin frequencies. Unnormalized: the nominal triangle peak is 1.
MelFilterbank BuildMelFilterbank(const MelConfig& config,
                                 std::uint32_t sample_rate_hz);

struct MelSpectrogram {
  std::size_t frames = 0;
  std::size_t n_mels = 0;
  std::vector<double> values;  // frames x n_mels, log10 energies
  MelConfig config;

  double at(std::size_t frame, std::size_t mel) const {
    return values[frame * n_mels + mel];
  }
};

// log10(max(filterbank * |stft|^2, log_floor)).
MelSpectrogram LogMel(const AudioBuffer& buffer, const MelConfig& config);

// Binary dump: "MELF0001", u32 rows, u32 cols, row-major f32 little-endian.
std::string EncodeMelMatrix(const MelSpectrogram& mel);
MelSpectrogram DecodeMelMatrix(std::string_view bytes);
void WriteMelMatrix(const MelSpectrogram& mel, const std::filesystem::path& path);

}  // namespace ffsv

#endif  // FFSV_FEATURES_HPP_
