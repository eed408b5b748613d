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

#include "ffsv/embeddings.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <optional>

#include "ffsv/common.hpp"

namespace ffsv {

namespace fs = std::filesystem;

void EmbeddingSet::Add(Embedding e) {
  if (e.values.empty()) {
    Fail(ErrorKind::kData, "embedding '" + e.utterance_id + "' has no values");
  }
  if (dim_ == 0 && items_.empty()) dim_ = e.values.size();
  if (e.values.size() != dim_) {
    Fail(ErrorKind::kData,
         StrFormat("embedding '%s' has dim %zu, set dim is %zu",
                   e.utterance_id.c_str(), e.values.size(), dim_));
  }
  for (float v : e.values) {
    if (!std::isfinite(v)) {
      Fail(ErrorKind::kData, "embedding '" + e.utterance_id + "' is not finite");
    }
  }
  const std::string key = e.utterance_id;
  if (!items_.try_emplace(key, std::move(e)).second) {
    Fail(ErrorKind::kData, "duplicate embedding id '" + key + "'");
  }
}

const Embedding* EmbeddingSet::Find(std::string_view id) const {
  auto it = items_.find(id);
  return it == items_.end() ? nullptr : &it->second;
}

const Embedding& EmbeddingSet::At(std::string_view id) const {
  const Embedding* e = Find(id);
  if (!e) Fail(ErrorKind::kData, "unknown utterance id '" + std::string(id) + "'");
  return *e;
}

std::size_t EmbeddingSet::Erase(std::string_view id) {
  auto it = items_.find(id);
  if (it == items_.end()) return 0;
  items_.erase(it);
  return 1;
}

bool operator==(const EmbeddingSet& a, const EmbeddingSet& b) {
  if (a.dim_ != b.dim_ || a.items_.size() != b.items_.size()) return false;
  auto ib = b.items_.begin();
  for (const auto& [id, e] : a.items_) {
    if (id != ib->first || e.values.size() != ib->second.values.size()) return false;
    for (std::size_t i = 0; i < e.values.size(); ++i) {
      if (std::bit_cast<std::uint32_t>(e.values[i]) !=
          std::bit_cast<std::uint32_t>(ib->second.values[i])) {
        return false;
      }
    }
    ++ib;
  }
  return true;
}

Embedding EmbedFromLogMel(const MelSpectrogram& mel, std::string utterance_id) {
  if (mel.frames == 0 || mel.n_mels == 0) {
    Fail(ErrorKind::kData, utterance_id + ": empty log-mel matrix");
  }
  Embedding e;
  e.utterance_id = std::move(utterance_id);
  e.values.resize(2 * mel.n_mels);
  const auto frames = static_cast<double>(mel.frames);
  for (std::size_t m = 0; m < mel.n_mels; ++m) {
    double mean = 0.0;
    for (std::size_t t = 0; t < mel.frames; ++t) mean += mel.at(t, m);
    mean /= frames;
    double var = 0.0;
    for (std::size_t t = 0; t < mel.frames; ++t) {
      const double d = mel.at(t, m) - mean;
      var += d * d;
    }
    e.values[m] = static_cast<float>(mean);
    e.values[mel.n_mels + m] = static_cast<float>(std::sqrt(var / frames));
  }
  return e;
}

Embedding BaselineEmbed(const AudioBuffer& buffer, const MelConfig& config) {
  return EmbedFromLogMel(LogMel(buffer, config), buffer.source_id);
}

SpeakerModel AverageSpeaker(const EmbeddingSet& set,
                            const std::vector<std::string>& utterances,
                            const std::string& speaker_id, bool l2_normalize) {
  if (utterances.empty()) {
    Fail(ErrorKind::kData, "speaker '" + speaker_id + "' has no utterances");
  }
  // Summing in id order makes the centroid independent of list order.
  std::vector<std::string> ids = utterances;
  std::sort(ids.begin(), ids.end());
  std::vector<double> sum(set.dim(), 0.0);
  for (const auto& id : ids) {
    const Embedding& e = set.At(id);
    double scale = 1.0;
    if (l2_normalize) {
      double norm = 0.0;
      for (float v : e.values) norm += static_cast<double>(v) * v;
      norm = std::sqrt(norm);
      if (norm == 0.0) Fail(ErrorKind::kData, "cannot normalize zero embedding '" + id + "'");
      scale = 1.0 / norm;
    }
    for (std::size_t i = 0; i < sum.size(); ++i) sum[i] += scale * e.values[i];
  }
  SpeakerModel model;
  model.speaker_id = speaker_id;
  model.utterances = std::move(ids);
  model.centroid.utterance_id = speaker_id;
  model.centroid.values.resize(sum.size());
  const auto n = static_cast<double>(model.utterances.size());
  for (std::size_t i = 0; i < sum.size(); ++i) {
    model.centroid.values[i] = static_cast<float>(sum[i] / n);
  }
  return model;
}

std::string SpeakerOf(std::string_view utterance_id, std::string_view delimiter) {
  if (delimiter.empty()) return std::string(utterance_id);
  const std::size_t pos = utterance_id.find(delimiter);
  return std::string(utterance_id.substr(0, pos));
}

std::map<std::string, SpeakerModel> BuildSpeakerModels(
    const EmbeddingSet& set, std::string_view delimiter,
    const std::set<std::string, std::less<>>& excluded, bool l2_normalize) {
  std::map<std::string, std::vector<std::string>> groups;
  for (const auto& [id, e] : set) {
    if (excluded.contains(id)) continue;
    groups[SpeakerOf(id, delimiter)].push_back(id);
  }
  std::map<std::string, SpeakerModel> models;
  for (const auto& [spk, ids] : groups) {
    models.emplace(spk, AverageSpeaker(set, ids, spk, l2_normalize));
  }
  return models;
}

namespace {

constexpr char kMagic[] = "SPKEMB01";

void PutU16(std::string& out, std::uint16_t v) {
  out.push_back(static_cast<char>(v & 0xFF));
  out.push_back(static_cast<char>(v >> 8));
}

void PutU32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

class Cursor {
 public:
  explicit Cursor(std::string_view bytes) : bytes_(bytes) {}
  void Need(std::size_t n, const char* what) const {
    if (bytes_.size() - pos_ < n) {
      Fail(ErrorKind::kFormat, StrFormat("truncated embedding file (%s)", what));
    }
  }
  std::uint16_t U16(const char* what) {
    Need(2, what);
    const auto* p = reinterpret_cast<const unsigned char*>(bytes_.data() + pos_);
    pos_ += 2;
    return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
  }
  std::uint32_t U32(const char* what) {
    Need(4, what);
    const auto* p = reinterpret_cast<const unsigned char*>(bytes_.data() + pos_);
    pos_ += 4;
    return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
           (static_cast<std::uint32_t>(p[2]) << 16) |
           (static_cast<std::uint32_t>(p[3]) << 24);
  }
  std::string_view Take(std::size_t n, const char* what) {
    Need(n, what);
    auto s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  bool AtEnd() const { return pos_ == bytes_.size(); }

 private:
  std::string_view bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

std::string EncodeEmbeddings(const EmbeddingSet& set) {
  std::string out(kMagic, 8);
  PutU32(out, static_cast<std::uint32_t>(set.dim()));
  PutU32(out, static_cast<std::uint32_t>(set.size()));
  for (const auto& [id, e] : set) {
    if (id.size() > 0xFFFF) {
      Fail(ErrorKind::kInvalidArgument, "utterance id longer than 65535 bytes");
    }
    PutU16(out, static_cast<std::uint16_t>(id.size()));
    out += id;
    for (float v : e.values) PutU32(out, std::bit_cast<std::uint32_t>(v));
  }
  return out;
}

EmbeddingSet DecodeEmbeddings(std::string_view bytes) {
  Cursor c(bytes);
  if (c.Take(8, "magic") != std::string_view(kMagic, 8)) {
    Fail(ErrorKind::kFormat, "bad magic: not an SPKEMB01 file");
  }
  const std::uint32_t dim = c.U32("dim");
  const std::uint32_t count = c.U32("count");
  if (count > 0 && dim == 0) Fail(ErrorKind::kFormat, "zero dimension with records");
  EmbeddingSet set(dim);
  for (std::uint32_t r = 0; r < count; ++r) {
    const std::uint16_t len = c.U16("id length");
    Embedding e;
    e.utterance_id = std::string(c.Take(len, "id"));
    if (e.utterance_id.empty()) Fail(ErrorKind::kFormat, "empty utterance id");
    e.values.resize(dim);
    for (std::uint32_t i = 0; i < dim; ++i) {
      e.values[i] = std::bit_cast<float>(c.U32("values"));
    }
    try {
      set.Add(std::move(e));
    } catch (const Error& err) {
      Fail(ErrorKind::kFormat, err.what());
    }
  }
  if (!c.AtEnd()) {
    Fail(ErrorKind::kFormat, "trailing bytes after the declared record count");
  }
  return set;
}

void WriteEmbeddings(const EmbeddingSet& set, const fs::path& path) {
  WriteFileBytes(path, EncodeEmbeddings(set));
}

EmbeddingSet ReadEmbeddings(const fs::path& path) {
  try {
    return DecodeEmbeddings(ReadFileBytes(path));
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::kFormat) {
      Fail(ErrorKind::kFormat, path.string() + ": " + e.what());
    }
    throw;
  }
}

std::set<std::string, std::less<>> ParseExclusionList(std::string_view text) {
  std::set<std::string, std::less<>> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t nl = text.find('\n', start);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view line = text.substr(start, nl - start);
    if (auto hash = line.find('#'); hash != std::string_view::npos) {
      line = line.substr(0, hash);
    }
    const auto first = line.find_first_not_of(" \t\r");
    if (first != std::string_view::npos) {
      const auto last = line.find_last_not_of(" \t\r");
      out.emplace(line.substr(first, last - first + 1));
    }
    start = nl + 1;
  }
  return out;
}

std::set<std::string, std::less<>> ReadExclusionList(const fs::path& path) {
  return ParseExclusionList(ReadFileBytes(path));
}

EmbeddingSet EmbedDirectory(const fs::path& dir, const MelConfig& config,
                            int channel, int workers,
                            const fs::path& mel_dump_dir) {
  const auto files = ListWavFiles(dir);
  if (!mel_dump_dir.empty()) {
    std::error_code ec;
    fs::create_directories(mel_dump_dir, ec);
    if (ec) Fail(ErrorKind::kIo, "cannot create " + mel_dump_dir.string());
  }
  std::vector<Embedding> results(files.size());
  ParallelFor(files.size(), workers, [&](std::size_t i) {
    std::optional<int> ch;
    if (channel >= 0) ch = channel;
    const AudioBuffer audio = ReadWav(files[i], ch);
    const MelSpectrogram mel = LogMel(audio, config);
    if (!mel_dump_dir.empty()) {
      WriteMelMatrix(mel, mel_dump_dir / (files[i].stem().string() + ".melf"));
    }
    results[i] = EmbedFromLogMel(mel, files[i].stem().string());
  });
  EmbeddingSet set(2 * config.n_mels);
  for (auto& e : results) set.Add(std::move(e));
  return set;
}

}  // namespace ffsv
