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

#ifndef FFSV_AUDIO_IO_HPP_
#define FFSV_AUDIO_IO_HPP_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace ffsv {

// Mono floating-point audio. Samples nominally lie in [-1, 1].
struct AudioBuffer {
  std::vector<double> samples;
  std::uint32_t sample_rate_hz = 0;
  std::string source_id;

  std::size_t size() const { return samples.size(); }
  bool empty() const { return samples.empty(); }
  double duration_s() const {
    return sample_rate_hz == 0 ? 0.0
                               : static_cast<double>(samples.size()) /
                                     sample_rate_hz;
  }
};

// Throws kData on a non-positive rate or a non-finite sample.
void ValidateAudio(const AudioBuffer& buffer);

// Reads a RIFF/WAVE file holding PCM16 or IEEE float32 samples. Multi-channel
// files require channel_select (0-based).
AudioBuffer ReadWav(const std::filesystem::path& path,
                    std::optional<int> channel_select = std::nullopt);
AudioBuffer DecodeWav(std::span<const std::uint8_t> bytes,
                      std::optional<int> channel_select = std::nullopt,
                      const std::string& source_id = {});

// PCM16 mono. Samples are clamped to [-1, 1 - 2^-15], scaled by 32768 and
// rounded to nearest.
void WriteWav(const AudioBuffer& buffer, const std::filesystem::path& path);
std::string EncodeWav(const AudioBuffer& buffer);

std::int16_t QuantizePcm16(double sample);

}  // namespace ffsv

#endif  // FFSV_AUDIO_IO_HPP_
