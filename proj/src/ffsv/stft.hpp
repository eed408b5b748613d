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

#ifndef FFSV_STFT_HPP_
#define FFSV_STFT_HPP_

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include "ffsv/audio_io.hpp"

namespace ffsv {

// Frame-major complex spectrogram: frames x (n_fft / 2 + 1).
struct Spectrogram {
  std::size_t n_fft = 0;
  std::size_t hop = 0;
  std::size_t frames = 0;
  std::size_t bins = 0;
  std::size_t signal_length = 0;
  std::uint32_t sample_rate_hz = 0;
  std::vector<std::complex<double>> data;

  std::complex<double>& at(std::size_t frame, std::size_t bin) {
    return data[frame * bins + bin];
  }
  const std::complex<double>& at(std::size_t frame, std::size_t bin) const {
    return data[frame * bins + bin];
  }
};

// Periodic Hann window.
std::vector<double> HannWindow(std::size_t n);

// Centered frames (reflect padding of n_fft/2 on each side), periodic Hann
// analysis window. frames = ceil(len / hop).
Spectrogram Stft(const AudioBuffer& buffer, std::size_t n_fft, std::size_t hop);

// Weighted overlap-add with the same window, normalized by the summed squared
// window; trimmed to spec.signal_length.
AudioBuffer Istft(const Spectrogram& spec);

bool IsPowerOfTwo(std::size_t n);

}  // namespace ffsv

#endif  // FFSV_STFT_HPP_
