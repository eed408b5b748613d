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

#include "ffsv/noise_extraction.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <optional>
#include <sstream>

#include "ffsv/common.hpp"

namespace ffsv {

namespace fs = std::filesystem;

double LevelDb(std::span<const double> samples) {
  if (samples.empty()) return 20.0 * std::log10(kLevelEpsilon);
  double sum = 0.0;
  for (double s : samples) sum += s * s;
  const double rms = std::sqrt(sum / static_cast<double>(samples.size()));
  return 20.0 * std::log10(rms + kLevelEpsilon);
}

ActivityIntervals DetectActivity(const AudioBuffer& buffer,
                                 const ActivityOptions& options) {
  if (buffer.empty()) Fail(ErrorKind::kData, buffer.source_id + ": empty buffer");
  if (options.frame_len < 1 || options.hop < 1 || options.hop > options.frame_len) {
    Fail(ErrorKind::kInvalidArgument,
         "activity detection needs frame_len >= 1 and 1 <= hop <= frame_len");
  }
  if (!(options.threshold_db <= 0.0)) {
    Fail(ErrorKind::kInvalidArgument, "threshold_db must be <= 0 dBFS");
  }
  const std::span<const double> x(buffer.samples);
  const std::size_t n = x.size();
  ActivityIntervals out;
  for (std::size_t start = 0; start < n; start += options.hop) {
    const std::size_t end = std::min(n, start + options.frame_len);
    if (LevelDb(x.subspan(start, end - start)) < options.threshold_db) continue;
    // Frames arrive in start order, so merging only touches the last run.
    if (!out.empty() && start <= out.back().end) {
      out.back().end = std::max(out.back().end, end);
    } else {
      out.push_back({start, end});
    }
  }
  return out;
}

namespace {

void CheckIntervals(const ActivityIntervals& intervals, std::size_t length) {
  std::size_t prev_end = 0;
  for (std::size_t i = 0; i < intervals.size(); ++i) {
    const Interval& iv = intervals[i];
    if (iv.start > iv.end || iv.end > length) {
      Fail(ErrorKind::kInvalidArgument,
           StrFormat("interval [%zu, %zu) outside [0, %zu]", iv.start, iv.end,
                     length));
    }
    if (i > 0 && iv.start < prev_end) {
      Fail(ErrorKind::kInvalidArgument, "intervals must be sorted and disjoint");
    }
    prev_end = iv.end;
  }
}

}  // namespace

BinaryMask BuildMask(const ActivityIntervals& intervals, std::size_t length) {
  CheckIntervals(intervals, length);
  BinaryMask mask(length, 1);
  for (const Interval& iv : intervals) {
    std::fill(mask.begin() + static_cast<std::ptrdiff_t>(iv.start),
              mask.begin() + static_cast<std::ptrdiff_t>(iv.end), 0);
  }
  return mask;
}

AudioBuffer ApplyMask(const AudioBuffer& buffer, const BinaryMask& mask) {
  if (mask.size() != buffer.size()) {
    Fail(ErrorKind::kInvalidArgument,
         StrFormat("mask length %zu != buffer length %zu", mask.size(),
                   buffer.size()));
  }
  AudioBuffer out = buffer;
  for (std::size_t i = 0; i < mask.size(); ++i) {
    out.samples[i] *= static_cast<double>(mask[i]);
  }
  return out;
}

std::vector<Interval> ComplementSegments(const ActivityIntervals& intervals,
                                         std::size_t length,
                                         std::size_t min_segment) {
  CheckIntervals(intervals, length);
  const std::size_t keep = std::max<std::size_t>(1, min_segment);
  std::vector<Interval> out;
  std::size_t cursor = 0;
  auto emit = [&](std::size_t end) {
    if (end > cursor && end - cursor >= keep) out.push_back({cursor, end});
  };
  for (const Interval& iv : intervals) {
    emit(iv.start);
    cursor = std::max(cursor, iv.end);
  }
  emit(length);
  return out;
}

std::vector<AudioBuffer> ExtractNoise(const AudioBuffer& buffer,
                                      const ActivityIntervals& intervals,
                                      std::size_t min_segment) {
  std::vector<AudioBuffer> out;
  for (const Interval& seg :
       ComplementSegments(intervals, buffer.size(), min_segment)) {
    AudioBuffer clip;
    clip.sample_rate_hz = buffer.sample_rate_hz;
    clip.source_id = StrFormat("%s__%zu_%zu", buffer.source_id.c_str(),
                               seg.start, seg.end);
    clip.samples.assign(buffer.samples.begin() + static_cast<std::ptrdiff_t>(seg.start),
                        buffer.samples.begin() + static_cast<std::ptrdiff_t>(seg.end));
    out.push_back(std::move(clip));
  }
  return out;
}

double NoisePool::total_duration_s() const {
  double total = 0.0;
  for (const auto& c : clips) total += c.duration_s();
  return total;
}

std::size_t NoisePool::total_samples() const {
  std::size_t total = 0;
  for (const auto& c : clips) total += c.audio.size();
  return total;
}

namespace {

struct FileResult {
  std::uint32_t sample_rate = 0;
  std::vector<NoiseClip> clips;
};

}  // namespace

ActivityOptions ResolveActivity(const MineOptions& options,
                                std::uint32_t sample_rate_hz) {
  ActivityOptions a = options.activity;
  auto from_ms = [&](double ms) {
    if (!(ms > 0.0)) Fail(ErrorKind::kInvalidArgument, "frame/hop duration must be positive");
    return std::max<std::size_t>(
        1, static_cast<std::size_t>(std::llround(ms * sample_rate_hz / 1000.0)));
  };
  if (a.frame_len == 0) a.frame_len = from_ms(options.frame_ms);
  if (a.hop == 0) a.hop = std::min(a.frame_len, from_ms(options.hop_ms));
  return a;
}

NoisePool MineNoisePool(const fs::path& dir, const MineOptions& options) {
  const auto files = ListWavFiles(dir);
  if (files.empty()) {
    Fail(ErrorKind::kData, "no WAV files in " + dir.string());
  }

  std::vector<FileResult> results(files.size());
  ParallelFor(files.size(), options.workers, [&](std::size_t i) {
    std::optional<int> channel;
    if (options.channel >= 0) channel = options.channel;
    const AudioBuffer audio = ReadWav(files[i], channel);
    if (audio.empty()) return;  // recorded as an empty source below
    const ActivityOptions activity = ResolveActivity(options, audio.sample_rate_hz);
    const std::size_t min_segment =
        options.min_segment == 0 ? activity.frame_len : options.min_segment;
    const auto intervals = DetectActivity(audio, activity);
    FileResult& r = results[i];
    r.sample_rate = audio.sample_rate_hz;
    for (const Interval& seg :
         ComplementSegments(intervals, audio.size(), min_segment)) {
      NoiseClip clip;
      clip.source_path = files[i].string();
      clip.start_sample = seg.start;
      clip.end_sample = seg.end;
      clip.clip_id = StrFormat("%s__%zu_%zu", files[i].stem().string().c_str(),
                               seg.start, seg.end);
      clip.audio.sample_rate_hz = audio.sample_rate_hz;
      clip.audio.source_id = clip.clip_id;
      clip.audio.samples.assign(
          audio.samples.begin() + static_cast<std::ptrdiff_t>(seg.start),
          audio.samples.begin() + static_cast<std::ptrdiff_t>(seg.end));
      clip.rms_db = LevelDb(clip.audio.samples);
      r.clips.push_back(std::move(clip));
    }
  });

  NoisePool pool;
  for (std::size_t i = 0; i < files.size(); ++i) {
    FileResult& r = results[i];
    if (r.sample_rate != 0) {
      if (pool.sample_rate_hz == 0) {
        pool.sample_rate_hz = r.sample_rate;
      } else if (pool.sample_rate_hz != r.sample_rate) {
        Fail(ErrorKind::kData,
             StrFormat("mixed sample rates: %s is %u Hz, expected %u Hz",
                       files[i].string().c_str(), r.sample_rate,
                       pool.sample_rate_hz));
      }
    }
    if (r.clips.empty()) {
      pool.empty_sources.push_back(files[i].string());
    }
    for (auto& c : r.clips) pool.clips.push_back(std::move(c));
  }
  return pool;
}

std::string NoisePoolManifest(const NoisePool& pool) {
  // Rows follow source order; empty sources appear as "-" rows after the
  // clips of the preceding sources.
  std::vector<std::pair<std::string, std::string>> rows;
  for (const auto& c : pool.clips) {
    rows.emplace_back(c.source_path,
                      StrFormat("%s\t%s\t%zu\t%zu\t%.6f\n", c.clip_id.c_str(),
                                c.source_path.c_str(), c.start_sample,
                                c.end_sample, c.rms_db));
  }
  for (const auto& src : pool.empty_sources) {
    rows.emplace_back(src, StrFormat("-\t%s\t0\t0\t-\n", src.c_str()));
  }
  std::stable_sort(rows.begin(), rows.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });
  std::string out = "clip_id\tsource_path\tstart_sample\tend_sample\trms_db\n";
  for (const auto& row : rows) out += row.second;
  return out;
}

void WriteNoisePool(const NoisePool& pool, const fs::path& out_dir) {
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) Fail(ErrorKind::kIo, "cannot create " + out_dir.string());
  for (const auto& c : pool.clips) {
    WriteWav(c.audio, out_dir / (c.clip_id + ".wav"));
  }
  WriteFileBytes(out_dir / "manifest.tsv", NoisePoolManifest(pool));
}

namespace {

std::vector<std::string> SplitTabs(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t tab = line.find('\t', start);
    fields.push_back(line.substr(start, tab - start));
    if (tab == std::string::npos) break;
    start = tab + 1;
  }
  return fields;
}

}  // namespace

NoisePool ReadNoisePool(const fs::path& pool_dir) {
  const fs::path manifest = pool_dir / "manifest.tsv";
  std::istringstream in(ReadFileBytes(manifest));
  std::string line;
  if (!std::getline(in, line) || line.rfind("clip_id\t", 0) != 0) {
    Fail(ErrorKind::kFormat, manifest.string() + ": missing header");
  }
  NoisePool pool;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto f = SplitTabs(line);
    if (f.size() != 5) {
      Fail(ErrorKind::kFormat,
           StrFormat("%s:%zu: expected 5 columns", manifest.string().c_str(), lineno));
    }
    if (f[0] == "-") {
      pool.empty_sources.push_back(f[1]);
      continue;
    }
    NoiseClip clip;
    clip.clip_id = f[0];
    clip.source_path = f[1];
    try {
      clip.start_sample = std::stoull(f[2]);
      clip.end_sample = std::stoull(f[3]);
      clip.rms_db = std::stod(f[4]);
    } catch (const std::exception&) {
      Fail(ErrorKind::kFormat,
           StrFormat("%s:%zu: bad number", manifest.string().c_str(), lineno));
    }
    clip.audio = ReadWav(pool_dir / (clip.clip_id + ".wav"));
    clip.audio.source_id = clip.clip_id;
    if (clip.audio.empty()) {
      Fail(ErrorKind::kData, "empty noise clip " + clip.clip_id);
    }
    if (pool.sample_rate_hz == 0) {
      pool.sample_rate_hz = clip.audio.sample_rate_hz;
    } else if (pool.sample_rate_hz != clip.audio.sample_rate_hz) {
      Fail(ErrorKind::kData, "noise pool mixes sample rates at " + clip.clip_id);
    }
    pool.clips.push_back(std::move(clip));
  }
  return pool;
}

}  // namespace ffsv
