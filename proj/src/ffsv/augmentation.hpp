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

#ifndef FFSV_AUGMENTATION_HPP_
#define FFSV_AUGMENTATION_HPP_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "ffsv/audio_io.hpp"
#include "ffsv/common.hpp"
#include "ffsv/noise_extraction.hpp"

namespace ffsv {

struct SnrRangeDb {
  double low_db = 0.0;
  double high_db = 0.0;
};

// Named presets: aug1 = [-10, -4], aug2 = [-7, -4], aug3 = [-7, +3] dB.
std::optional<SnrRangeDb> SnrPreset(const std::string& name);

struct AugmentationConfig {
  SnrRangeDb snr_range;
  std::uint64_t seed = 0;
  std::filesystem::path noise_pool_path;
  int channel = -1;
  int workers = 1;
};

// Mean square.
double MeasurePower(std::span<const double> samples);

// output[i] = source[(offset + i) mod source.size()].
std::vector<double> TileToLength(std::span<const double> source,
                                 std::size_t length, std::size_t offset);

struct FittedNoise {
  AudioBuffer audio;
  std::vector<std::string> clip_ids;
  std::size_t offset = 0;
};

// Draws clips with replacement until their concatenation covers `length`,
// then takes a random start offset into the concatenation and wraps.
FittedNoise FitNoiseToLength(const NoisePool& pool, std::size_t length,
                             Rng& rng);

struct MixResult {
  AudioBuffer mixture;
  double gain = 0.0;     // applied to the noise before summing
  double rescale = 1.0;  // peak normalization factor, 1 when not clipping
};

MixResult MixAtSnr(const AudioBuffer& clean, const AudioBuffer& noise,
                   double target_snr_db);

struct AugmentRecord {
  std::string file;
  double snr_db = 0.0;
  std::vector<std::string> clip_ids;
  std::size_t offset = 0;
  double rescale = 1.0;
};

// Augments every WAV in enroll_dir, writing same-named files to out_dir and
// augment.manifest.tsv. Returns the manifest rows in file order.
std::vector<AugmentRecord> AugmentCorpus(const std::filesystem::path& enroll_dir,
                                         const AugmentationConfig& config,
                                         const std::filesystem::path& out_dir);
std::vector<AugmentRecord> AugmentCorpus(const std::filesystem::path& enroll_dir,
                                         const NoisePool& pool,
                                         const AugmentationConfig& config,
                                         const std::filesystem::path& out_dir);

std::string AugmentManifest(const std::vector<AugmentRecord>& records);

}  // namespace ffsv

#endif  // FFSV_AUGMENTATION_HPP_
