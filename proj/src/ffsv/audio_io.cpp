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

#include "ffsv/audio_io.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>

#include "ffsv/common.hpp"

namespace ffsv {

namespace {

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

class ByteReader {
 public:
  explicit ByteReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  bool Has(std::size_t n) const { return bytes_.size() - pos_ >= n; }
  std::size_t pos() const { return pos_; }
  std::size_t remaining() const { return bytes_.size() - pos_; }
  void Skip(std::size_t n) { pos_ = std::min(bytes_.size(), pos_ + n); }

  std::uint16_t U16() {
    std::uint16_t v = static_cast<std::uint16_t>(bytes_[pos_] |
                                                 (bytes_[pos_ + 1] << 8));
    pos_ += 2;
    return v;
  }
  std::uint32_t U32() {
    std::uint32_t v = static_cast<std::uint32_t>(bytes_[pos_]) |
                      (static_cast<std::uint32_t>(bytes_[pos_ + 1]) << 8) |
                      (static_cast<std::uint32_t>(bytes_[pos_ + 2]) << 16) |
                      (static_cast<std::uint32_t>(bytes_[pos_ + 3]) << 24);
    pos_ += 4;
    return v;
  }
  std::string Tag() {
    std::string s(reinterpret_cast<const char*>(bytes_.data() + pos_), 4);
    pos_ += 4;
    return s;
  }
  const std::uint8_t* Here() const { return bytes_.data() + pos_; }

 private:
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

void PutU16(std::string& out, std::uint16_t v) {
  out.push_back(static_cast<char>(v & 0xFF));
  out.push_back(static_cast<char>(v >> 8));
}

void PutU32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

struct FmtChunk {
  std::uint16_t format = 0;
  std::uint16_t channels = 0;
  std::uint32_t sample_rate = 0;
  std::uint16_t block_align = 0;
  std::uint16_t bits = 0;
};

FmtChunk ParseFmt(ByteReader r, std::uint32_t size, const std::string& id) {
  if (size < 16) Fail(ErrorKind::kFormat, id + ": fmt chunk too short");
  FmtChunk f;
  f.format = r.U16();
  f.channels = r.U16();
  f.sample_rate = r.U32();
  r.U32();  // byte rate
  f.block_align = r.U16();
  f.bits = r.U16();
  if (f.format == kFormatExtensible) {
    if (size < 40) Fail(ErrorKind::kFormat, id + ": truncated extensible fmt");
    r.U16();  // cbSize
    r.U16();  // valid bits
    r.U32();  // channel mask
    f.format = r.U16();  // first two bytes of the subformat GUID
  }
  return f;
}

}  // namespace

void ValidateAudio(const AudioBuffer& buffer) {
  if (buffer.sample_rate_hz == 0) {
    Fail(ErrorKind::kData, buffer.source_id + ": sample rate must be positive");
  }
  for (double s : buffer.samples) {
    if (!std::isfinite(s)) {
      Fail(ErrorKind::kData, buffer.source_id + ": non-finite sample");
    }
  }
}

AudioBuffer DecodeWav(std::span<const std::uint8_t> bytes,
                      std::optional<int> channel_select,
                      const std::string& source_id) {
  ByteReader r(bytes);
  if (!r.Has(12)) Fail(ErrorKind::kFormat, source_id + ": file too short for RIFF header");
  if (r.Tag() != "RIFF") Fail(ErrorKind::kFormat, source_id + ": missing RIFF tag");
  r.U32();  // riff size; often wrong in the wild, not trusted
  if (r.Tag() != "WAVE") Fail(ErrorKind::kFormat, source_id + ": missing WAVE tag");

  std::optional<FmtChunk> fmt;
  const std::uint8_t* data = nullptr;
  std::size_t data_size = 0;
  while (r.Has(8)) {
    const std::string tag = r.Tag();
    const std::uint32_t size = r.U32();
    if (!r.Has(size)) {
      if (tag == "data" && fmt) {
        // Truncated data chunk: keep whole frames that are present.
        data = r.Here();
        data_size = r.remaining();
        break;
      }
      Fail(ErrorKind::kFormat, source_id + ": chunk '" + tag + "' overruns file");
    }
    if (tag == "fmt ") {
      fmt = ParseFmt(r, size, source_id);
    } else if (tag == "data") {
      data = r.Here();
      data_size = size;
    }
    r.Skip(size + (size & 1u));
    if (data && fmt) break;
  }
  if (!fmt) Fail(ErrorKind::kFormat, source_id + ": missing fmt chunk");
  if (!data) Fail(ErrorKind::kFormat, source_id + ": missing data chunk");

  const FmtChunk& f = *fmt;
  if (f.channels == 0) Fail(ErrorKind::kFormat, source_id + ": zero channels");
  if (f.sample_rate == 0) Fail(ErrorKind::kFormat, source_id + ": zero sample rate");
  const bool pcm16 = f.format == kFormatPcm && f.bits == 16;
  const bool float32 = f.format == kFormatFloat && f.bits == 32;
  if (!pcm16 && !float32) {
    Fail(ErrorKind::kFormat,
         StrFormat("%s: unsupported codec (format %u, %u bits)", source_id.c_str(),
                   f.format, f.bits));
  }
  int channel = 0;
  if (f.channels > 1) {
    if (!channel_select) {
      Fail(ErrorKind::kInvalidArgument,
           StrFormat("%s: %u channels, a channel must be selected",
                     source_id.c_str(), f.channels));
    }
    channel = *channel_select;
  } else if (channel_select) {
    channel = *channel_select;
  }
  if (channel < 0 || channel >= f.channels) {
    Fail(ErrorKind::kInvalidArgument,
         StrFormat("%s: channel %d out of range [0, %u)", source_id.c_str(),
                   channel, f.channels));
  }

  const std::size_t bytes_per_sample = f.bits / 8;
  const std::size_t frame_bytes = bytes_per_sample * f.channels;
  const std::size_t frames = data_size / frame_bytes;

  AudioBuffer out;
  out.sample_rate_hz = f.sample_rate;
  out.source_id = source_id;
  out.samples.resize(frames);
  for (std::size_t i = 0; i < frames; ++i) {
    const std::uint8_t* p = data + i * frame_bytes + channel * bytes_per_sample;
    if (pcm16) {
      const auto v = static_cast<std::int16_t>(
          static_cast<std::uint16_t>(p[0] | (p[1] << 8)));
      out.samples[i] = static_cast<double>(v) / 32768.0;
    } else {
      const std::uint32_t bits = static_cast<std::uint32_t>(p[0]) |
                                 (static_cast<std::uint32_t>(p[1]) << 8) |
                                 (static_cast<std::uint32_t>(p[2]) << 16) |
                                 (static_cast<std::uint32_t>(p[3]) << 24);
      const float v = std::bit_cast<float>(bits);
      if (!std::isfinite(v)) {
        Fail(ErrorKind::kData,
             StrFormat("%s: non-finite sample at frame %zu", source_id.c_str(), i));
      }
      out.samples[i] = static_cast<double>(v);
    }
  }
  return out;
}

AudioBuffer ReadWav(const std::filesystem::path& path,
                    std::optional<int> channel_select) {
  const std::string bytes = ReadFileBytes(path);
  return DecodeWav(
      std::span(reinterpret_cast<const std::uint8_t*>(bytes.data()), bytes.size()),
      channel_select, path.stem().string());
}

std::int16_t QuantizePcm16(double sample) {
  constexpr double kMax = 1.0 - 1.0 / 32768.0;
  const double clamped = std::isnan(sample) ? 0.0 : std::clamp(sample, -1.0, kMax);
  return static_cast<std::int16_t>(std::lround(clamped * 32768.0));
}

std::string EncodeWav(const AudioBuffer& buffer) {
  ValidateAudio(buffer);
  const std::uint32_t data_bytes =
      static_cast<std::uint32_t>(buffer.samples.size() * 2);
  std::string out;
  out.reserve(44 + data_bytes);
  out += "RIFF";
  PutU32(out, 36 + data_bytes);
  out += "WAVE";
  out += "fmt ";
  PutU32(out, 16);
  PutU16(out, kFormatPcm);
  PutU16(out, 1);
  PutU32(out, buffer.sample_rate_hz);
  PutU32(out, buffer.sample_rate_hz * 2);
  PutU16(out, 2);
  PutU16(out, 16);
  out += "data";
  PutU32(out, data_bytes);
  for (double s : buffer.samples) {
    PutU16(out, static_cast<std::uint16_t>(QuantizePcm16(s)));
  }
  return out;
}

void WriteWav(const AudioBuffer& buffer, const std::filesystem::path& path) {
  WriteFileBytes(path, EncodeWav(buffer));
}

}  // namespace ffsv
