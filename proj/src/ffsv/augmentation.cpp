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

#include "ffsv/augmentation.hpp"

#include <algorithm>
#include <cmath>

namespace ffsv {

namespace fs = std::filesystem;

std::optional<SnrRangeDb> SnrPreset(const std::string& name) {
  if (name == "aug1") return SnrRangeDb{-10.0, -4.0};
  if (name == "aug2") return SnrRangeDb{-7.0, -4.0};
  if (name == "aug3") return SnrRangeDb{-7.0, 3.0};
  return std::nullopt;
}

double MeasurePower(std::span<const double> samples) {
  if (samples.empty()) Fail(ErrorKind::kData, "power of an empty buffer");
  double sum = 0.0;
  for (double s : samples) sum += s * s;
  return sum / static_cast<double>(samples.size());
}

std::vector<double> TileToLength(std::span<const double> source,
                                 std::size_t length, std::size_t offset) {
  if (source.empty()) Fail(ErrorKind::kData, "cannot tile an empty clip");
  std::vector<double> out(length);
  std::size_t j = offset % source.size();
  for (std::size_t i = 0; i < length; ++i) {
    out[i] = source[j];
    if (++j == source.size()) j = 0;
  }
  return out;
}

FittedNoise FitNoiseToLength(const NoisePool& pool, std::size_t length,
                             Rng& rng) {
  if (pool.clips.empty()) Fail(ErrorKind::kData, "noise pool is empty");
  FittedNoise out;
  std::vector<double> concat;
  do {
    const NoiseClip& clip = pool.clips[rng.Below(pool.clips.size())];
    out.clip_ids.push_back(clip.clip_id);
    concat.insert(concat.end(), clip.audio.samples.begin(),
                  clip.audio.samples.end());
  } while (concat.size() < length);
  out.offset = rng.Below(concat.size());
  out.audio.sample_rate_hz = pool.sample_rate_hz;
  out.audio.source_id = "noise";
  out.audio.samples = TileToLength(concat, length, out.offset);
  return out;
}

MixResult MixAtSnr(const AudioBuffer& clean, const AudioBuffer& noise,
                   double target_snr_db) {
  if (clean.size() != noise.size()) {
    Fail(ErrorKind::kData, StrFormat("length mismatch: clean %zu, noise %zu",
                                     clean.size(), noise.size()));
  }
  if (clean.sample_rate_hz != noise.sample_rate_hz) {
    Fail(ErrorKind::kData,
         StrFormat("sample-rate mismatch: clean %u Hz, noise %u Hz",
                   clean.sample_rate_hz, noise.sample_rate_hz));
  }
  if (!std::isfinite(target_snr_db)) {
    Fail(ErrorKind::kInvalidArgument, "target SNR must be finite");
  }
  const double p_clean = MeasurePower(clean.samples);
  const double p_noise = MeasurePower(noise.samples);
  if (p_clean <= 0.0) Fail(ErrorKind::kData, clean.source_id + ": zero-power clean signal");
  if (p_noise <= 0.0) Fail(ErrorKind::kData, "zero-power noise");

  MixResult r;
  r.gain = std::sqrt(p_clean / (p_noise * std::pow(10.0, target_snr_db / 10.0)));
  r.mixture.sample_rate_hz = clean.sample_rate_hz;
  r.mixture.source_id = clean.source_id;
  r.mixture.samples.resize(clean.size());
  double peak = 0.0;
  for (std::size_t i = 0; i < clean.size(); ++i) {
    const double v = clean.samples[i] + r.gain * noise.samples[i];
    r.mixture.samples[i] = v;
    peak = std::max(peak, std::abs(v));
  }
  if (peak > 1.0) {
    r.rescale = 1.0 / peak;
    for (double& v : r.mixture.samples) v *= r.rescale;
  }
  return r;
}

std::string AugmentManifest(const std::vector<AugmentRecord>& records) {
  std::string out = "file\tsnr_db\tclip_ids\toffset\trescale\n";
  for (const auto& rec : records) {
    std::string ids;
    for (std::size_t i = 0; i < rec.clip_ids.size(); ++i) {
      if (i) ids += ',';
      ids += rec.clip_ids[i];
    }
    out += StrFormat("%s\t%.2f\t%s\t%zu\t%.6f\n", rec.file.c_str(), rec.snr_db,
                     ids.c_str(), rec.offset, rec.rescale);
  }
  return out;
}

std::vector<AugmentRecord> AugmentCorpus(const fs::path& enroll_dir,
                                         const AugmentationConfig& config,
                                         const fs::path& out_dir) {
  return AugmentCorpus(enroll_dir, ReadNoisePool(config.noise_pool_path), config,
                       out_dir);
}

std::vector<AugmentRecord> AugmentCorpus(const fs::path& enroll_dir,
                                         const NoisePool& pool,
                                         const AugmentationConfig& config,
                                         const fs::path& out_dir) {
  const SnrRangeDb range = config.snr_range;
  if (!(range.low_db <= range.high_db) || !std::isfinite(range.low_db) ||
      !std::isfinite(range.high_db)) {
    Fail(ErrorKind::kInvalidArgument, "SNR range needs finite low <= high");
  }
  if (pool.clips.empty()) Fail(ErrorKind::kData, "noise pool is empty");
  const auto files = ListWavFiles(enroll_dir);
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) Fail(ErrorKind::kIo, "cannot create " + out_dir.string());

  std::vector<AugmentRecord> records(files.size());
  ParallelFor(files.size(), config.workers, [&](std::size_t i) {
    std::optional<int> channel;
    if (config.channel >= 0) channel = config.channel;
    const AudioBuffer clean = ReadWav(files[i], channel);
    if (clean.sample_rate_hz != pool.sample_rate_hz) {
      Fail(ErrorKind::kData,
           StrFormat("%s: %u Hz does not match noise pool rate %u Hz",
                     files[i].string().c_str(), clean.sample_rate_hz,
                     pool.sample_rate_hz));
    }
    if (clean.empty()) {
      Fail(ErrorKind::kData, files[i].string() + ": empty audio");
    }
    const std::string stem = files[i].stem().string();
    Rng rng(Hash64(config.seed, stem));
    const double snr = range.low_db + rng.Uniform() * (range.high_db - range.low_db);
    FittedNoise noise = FitNoiseToLength(pool, clean.size(), rng);
    const MixResult mix = MixAtSnr(clean, noise.audio, snr);
    WriteWav(mix.mixture, out_dir / files[i].filename());

    AugmentRecord& rec = records[i];
    rec.file = files[i].filename().string();
    rec.snr_db = snr;
    rec.clip_ids = std::move(noise.clip_ids);
    rec.offset = noise.offset;
    rec.rescale = mix.rescale;
  });
  WriteFileBytes(out_dir / "augment.manifest.tsv", AugmentManifest(records));
  return records;
}

}  // namespace ffsv
