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

#ifndef FFSV_PIPELINE_HPP_
#define FFSV_PIPELINE_HPP_

#include <filesystem>
#include <map>
#include <string>
#include <string_view>

#include "ffsv/augmentation.hpp"
#include "ffsv/denoise.hpp"
#include "ffsv/features.hpp"
#include "ffsv/noise_extraction.hpp"
#include "ffsv/scoring.hpp"

namespace ffsv {

// Experiment configuration as a flat key=value map over a fixed key set.
// Unknown keys and malformed values are rejected with kInvalidArgument.
class RunConfig {
 public:
  RunConfig();

  static RunConfig Parse(std::string_view text);
  static RunConfig Load(const std::filesystem::path& path);

  void Set(const std::string& key, const std::string& value);
  const std::string& Get(const std::string& key) const;
  bool IsSet(const std::string& key) const;  // differs from the default

  std::string GetString(const std::string& key) const { return Get(key); }
  double GetDouble(const std::string& key) const;
  long long GetInt(const std::string& key) const;
  bool GetBool(const std::string& key) const;

  // Canonical text of every key except the execution-only ones (workers,
  // work_dir), sorted by key. This is what gets frozen next to outputs.
  std::string Frozen() const;
  std::uint64_t Hash() const;

  int workers() const;
  MineOptions mine_options() const;
  AugmentationConfig augmentation() const;  // throws when preset is none
  bool augmentation_enabled() const;
  GateConfig gate() const;
  MelConfig mel() const;
  DcfParams dcf() const;

  static const std::map<std::string, std::string>& Defaults();

 private:
  std::map<std::string, std::string> values_;
};

struct EmbedSummary {
  std::size_t utterances = 0;
  std::size_t records = 0;
  std::size_t dim = 0;
};

struct EvalSummary {
  EvalReport report;
  std::size_t scored = 0;
  std::size_t skipped = 0;
  std::size_t excluded = 0;
};

// Stage entry points. Each writes a frozen copy of the config beside its
// outputs.
NoisePool StageMineNoise(const RunConfig& config,
                         const std::filesystem::path& in_dir,
                         const std::filesystem::path& out_dir);
std::vector<AugmentRecord> StageAugment(const RunConfig& config,
                                        const std::filesystem::path& enroll_dir,
                                        const std::filesystem::path& pool_dir,
                                        const std::filesystem::path& out_dir);
std::size_t StageDenoise(const RunConfig& config,
                         const std::filesystem::path& in_dir,
                         const std::filesystem::path& out_dir);
// Baseline embeds in_dir locally; with a non-empty `external`, validates that
// the file covers every WAV stem in in_dir and copies it to out_file.
EmbedSummary StageEmbed(const RunConfig& config,
                        const std::filesystem::path& in_dir,
                        const std::filesystem::path& out_file,
                        const std::filesystem::path& external = {});
EvalSummary StageEvaluate(const RunConfig& config,
                          const std::filesystem::path& enroll_embeddings,
                          const std::filesystem::path& test_embeddings,
                          const std::filesystem::path& trials,
                          const std::filesystem::path& out_dir);

// mine-noise -> augment -> [denoise] -> embed -> evaluate under work_dir.
EvalSummary RunPipeline(const RunConfig& config);

}  // namespace ffsv

#endif  // FFSV_PIPELINE_HPP_
