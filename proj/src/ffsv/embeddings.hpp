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

#ifndef FFSV_EMBEDDINGS_HPP_
#define FFSV_EMBEDDINGS_HPP_

#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "ffsv/audio_io.hpp"
#include "ffsv/features.hpp"

namespace ffsv {

struct Embedding {
  std::string utterance_id;
  std::vector<float> values;

  std::size_t dim() const { return values.size(); }
};

// Utterance id -> embedding, all of one dimension. Iteration is in id order.
class EmbeddingSet {
 public:
  EmbeddingSet() = default;
  explicit EmbeddingSet(std::size_t dim) : dim_(dim) {}

  // Throws on a duplicate id or a dimension mismatch. The first insertion
  // into an empty dimensionless set fixes the dimension.
  void Add(Embedding e);

  const Embedding* Find(std::string_view id) const;
  const Embedding& At(std::string_view id) const;
  bool Contains(std::string_view id) const { return Find(id) != nullptr; }
  std::size_t Erase(std::string_view id);

  std::size_t dim() const { return dim_; }
  std::size_t size() const { return items_.size(); }
  bool empty() const { return items_.empty(); }

  auto begin() const { return items_.begin(); }
  auto end() const { return items_.end(); }

  friend bool operator==(const EmbeddingSet&, const EmbeddingSet&);

 private:
  std::size_t dim_ = 0;
  std::map<std::string, Embedding, std::less<>> items_;
};

bool operator==(const EmbeddingSet& a, const EmbeddingSet& b);

struct SpeakerModel {
  std::string speaker_id;
  Embedding centroid;
  std::vector<std::string> utterances;
};

// Per-band mean then per-band standard deviation of the log-mel frames:
// dim = 2 * n_mels.
Embedding EmbedFromLogMel(const MelSpectrogram& mel, std::string utterance_id);
Embedding BaselineEmbed(const AudioBuffer& buffer, const MelConfig& config);

// Coordinate-wise mean. With l2_normalize each input is scaled to unit norm
// first.
SpeakerModel AverageSpeaker(const EmbeddingSet& set,
                            const std::vector<std::string>& utterances,
                            const std::string& speaker_id,
                            bool l2_normalize = false);

// Speaker id = utterance id up to the first occurrence of the delimiter
// (the whole id when the delimiter is absent or empty).
std::string SpeakerOf(std::string_view utterance_id, std::string_view delimiter);

// Groups the set by SpeakerOf and averages each group. Ids in `excluded` are
// dropped first.
std::map<std::string, SpeakerModel> BuildSpeakerModels(
    const EmbeddingSet& set, std::string_view delimiter,
    const std::set<std::string, std::less<>>& excluded, bool l2_normalize);

// SPKEMB01 interchange: magic, u32 dim, u32 count, then per record u16 id
// length, UTF-8 id bytes, dim x f32. Integers and floats little-endian.
std::string EncodeEmbeddings(const EmbeddingSet& set);
EmbeddingSet DecodeEmbeddings(std::string_view bytes);
void WriteEmbeddings(const EmbeddingSet& set, const std::filesystem::path& path);
EmbeddingSet ReadEmbeddings(const std::filesystem::path& path);

// One id per line; '#' starts a comment; surrounding whitespace ignored.
std::set<std::string, std::less<>> ParseExclusionList(std::string_view text);
std::set<std::string, std::less<>> ReadExclusionList(
    const std::filesystem::path& path);

// Baseline embeddings of every WAV in dir, keyed by file stem.
EmbeddingSet EmbedDirectory(const std::filesystem::path& dir,
                            const MelConfig& config, int channel, int workers,
                            const std::filesystem::path& mel_dump_dir = {});

}  // namespace ffsv

#endif  // FFSV_EMBEDDINGS_HPP_
