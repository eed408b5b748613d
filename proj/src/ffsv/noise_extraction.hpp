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

#ifndef FFSV_NOISE_EXTRACTION_HPP_
#define FFSV_NOISE_EXTRACTION_HPP_

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ffsv/audio_io.hpp"

namespace ffsv {

// Half-open sample range [start, end).
struct Interval {
  std::size_t start = 0;
  std::size_t end = 0;
  std::size_t length() const { return end - start; }
  friend bool operator==(const Interval&, const Interval&) = default;
};

// Sorted, disjoint, non-adjacent voiced ranges.
using ActivityIntervals = std::vector<Interval>;
// 1 = keep (noise), 0 = voiced.
using BinaryMask = std::vector<std::uint8_t>;

struct ActivityOptions {
  double threshold_db = -40.0;  // dBFS
  std::size_t frame_len = 400;  // 25 ms at 16 kHz
  std::size_t hop = 160;        // 10 ms at 16 kHz
};

inline constexpr double kLevelEpsilon = 1e-10;

// 20*log10(rms + 1e-10) over a span of samples.
double LevelDb(std::span<const double> samples);

// Frames start every `hop` samples; the final frame may be shorter than
// frame_len and is measured over the samples it holds. A frame whose level is
// >= threshold marks all of its samples active. frame_len = hop = 1 gives the
// per-sample mode.
ActivityIntervals DetectActivity(const AudioBuffer& buffer,
                                 const ActivityOptions& options);

BinaryMask BuildMask(const ActivityIntervals& intervals, std::size_t length);

AudioBuffer ApplyMask(const AudioBuffer& buffer, const BinaryMask& mask);

// Complement of the intervals, as [start, end) ranges of at least
// min_segment samples.
std::vector<Interval> ComplementSegments(const ActivityIntervals& intervals,
                                         std::size_t length,
                                         std::size_t min_segment);

std::vector<AudioBuffer> ExtractNoise(const AudioBuffer& buffer,
                                      const ActivityIntervals& intervals,
                                      std::size_t min_segment);

struct NoiseClip {
  std::string clip_id;  // <source-stem>__<start>_<end>
  std::string source_path;
  std::size_t start_sample = 0;
  std::size_t end_sample = 0;
  double rms_db = 0.0;
  AudioBuffer audio;

  double duration_s() const { return audio.duration_s(); }
};

struct NoisePool {
  std::uint32_t sample_rate_hz = 0;
  std::vector<NoiseClip> clips;
  // Source files that yielded no clip.
  std::vector<std::string> empty_sources;

  double total_duration_s() const;
  std::size_t total_samples() const;
};

struct MineOptions {
  // frame_len / hop of 0 are derived per file from frame_ms / hop_ms.
  ActivityOptions activity{-40.0, 0, 0};
  double frame_ms = 25.0;
  double hop_ms = 10.0;
  std::size_t min_segment = 0;  // 0 means one frame length
  int channel = -1;             // -1: input must be mono
  int workers = 1;
};

// Frame geometry in samples for one sample rate.
ActivityOptions ResolveActivity(const MineOptions& options,
                                std::uint32_t sample_rate_hz);

NoisePool MineNoisePool(const std::filesystem::path& dir,
                        const MineOptions& options);

// Writes one PCM16 WAV per clip plus manifest.tsv.
void WriteNoisePool(const NoisePool& pool, const std::filesystem::path& out_dir);
// Loads clips listed in manifest.tsv.
NoisePool ReadNoisePool(const std::filesystem::path& pool_dir);

std::string NoisePoolManifest(const NoisePool& pool);

}  // namespace ffsv

#endif  // FFSV_NOISE_EXTRACTION_HPP_
