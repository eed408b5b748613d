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

#include "ffsv/pipeline.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdlib>

#include "ffsv/common.hpp"
#include "ffsv/embeddings.hpp"

namespace ffsv {

namespace fs = std::filesystem;

const std::map<std::string, std::string>& RunConfig::Defaults() {
  static const std::map<std::string, std::string> kDefaults = {
      {"enroll_dir", ""},
      {"test_dir", ""},
      {"noise_dir", ""},  // empty: mine noise from test_dir
      {"trials", ""},
      {"work_dir", ""},
      {"exclude", ""},
      {"threshold_db", "-40"},
      {"frame_ms", "25"},
      {"hop_ms", "10"},
      {"min_segment", "0"},
      {"preset", "aug1"},
      {"snr_low", ""},
      {"snr_high", ""},
      {"seed", "0"},
      {"enroll_channel", "-1"},
      {"test_channel", "-1"},
      {"noise_channel", "-1"},
      {"denoise_test", "false"},
      {"gate_mode", "non-stationary"},
      {"prop_decrease", "1"},
      {"n_std", "1"},
      {"gate_n_fft", "1024"},
      {"gate_hop", "256"},
      {"smooth_frames", "3"},
      {"smooth_bins", "3"},
      {"ema", "0.95"},
      {"embedder", "baseline"},
      {"enroll_embeddings", ""},
      {"test_embeddings", ""},
      {"n_fft", "512"},
      {"mel_hop", "160"},
      {"n_mels", "64"},
      {"f_min", "20"},
      {"f_max", ""},
      {"log_floor", "1e-10"},
      {"l2_normalize", "false"},
      {"speaker_delimiter", "-"},
      {"strict", "true"},
      {"p_target", "0.01"},
      {"c_miss", "1"},
      {"c_fa", "1"},
      {"workers", "1"},
  };
  return kDefaults;
}

RunConfig::RunConfig() : values_(Defaults()) {}

RunConfig RunConfig::Parse(std::string_view text) {
  RunConfig config;
  std::size_t start = 0;
  std::size_t lineno = 0;
  while (start < text.size()) {
    std::size_t nl = text.find('\n', start);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view line = text.substr(start, nl - start);
    start = nl + 1;
    ++lineno;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string_view::npos || line[first] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      Fail(ErrorKind::kInvalidArgument,
           StrFormat("config line %zu: expected key=value", lineno));
    }
    auto trim = [](std::string_view s) {
      const auto a = s.find_first_not_of(" \t\r");
      if (a == std::string_view::npos) return std::string();
      const auto b = s.find_last_not_of(" \t\r");
      return std::string(s.substr(a, b - a + 1));
    };
    config.Set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return config;
}

RunConfig RunConfig::Load(const fs::path& path) {
  return Parse(ReadFileBytes(path));
}

void RunConfig::Set(const std::string& key, const std::string& value) {
  auto it = values_.find(key);
  if (it == values_.end()) {
    Fail(ErrorKind::kInvalidArgument, "unknown config key '" + key + "'");
  }
  if (value.find_first_of("\n\r") != std::string::npos) {
    Fail(ErrorKind::kInvalidArgument, "config value for '" + key + "' has a newline");
  }
  it->second = value;
}

const std::string& RunConfig::Get(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) {
    Fail(ErrorKind::kInvalidArgument, "unknown config key '" + key + "'");
  }
  return it->second;
}

bool RunConfig::IsSet(const std::string& key) const {
  return Get(key) != Defaults().at(key);
}

double RunConfig::GetDouble(const std::string& key) const {
  const std::string& v = Get(key);
  char* end = nullptr;
  errno = 0;
  const double d = std::strtod(v.c_str(), &end);
  if (v.empty() || *end != '\0' || errno == ERANGE || !std::isfinite(d)) {
    Fail(ErrorKind::kInvalidArgument,
         "config '" + key + "' must be a finite number (got '" + v + "')");
  }
  return d;
}

long long RunConfig::GetInt(const std::string& key) const {
  const std::string& v = Get(key);
  char* end = nullptr;
  errno = 0;
  const long long n = std::strtoll(v.c_str(), &end, 10);
  if (v.empty() || *end != '\0' || errno == ERANGE) {
    Fail(ErrorKind::kInvalidArgument,
         "config '" + key + "' must be an integer (got '" + v + "')");
  }
  return n;
}

bool RunConfig::GetBool(const std::string& key) const {
  const std::string& v = Get(key);
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  Fail(ErrorKind::kInvalidArgument,
       "config '" + key + "' must be true or false (got '" + v + "')");
}

std::string RunConfig::Frozen() const {
  std::string out;
  for (const auto& [k, v] : values_) {
    if (k == "workers" || k == "work_dir") continue;
    out += k + "=" + v + "\n";
  }
  return out;
}

std::uint64_t RunConfig::Hash() const { return Fnv1a64(Frozen()); }

namespace {

std::size_t NonNegative(const RunConfig& c, const std::string& key) {
  const long long v = c.GetInt(key);
  if (v < 0) Fail(ErrorKind::kInvalidArgument, "config '" + key + "' must be >= 0");
  return static_cast<std::size_t>(v);
}

int Channel(const RunConfig& c, const std::string& key) {
  const long long v = c.GetInt(key);
  if (v < -1 || v > 65535) {
    Fail(ErrorKind::kInvalidArgument, "config '" + key + "' out of range");
  }
  return static_cast<int>(v);
}

}  // namespace

int RunConfig::workers() const {
  const long long w = GetInt("workers");
  if (w < 1 || w > 1024) Fail(ErrorKind::kInvalidArgument, "workers must be in [1, 1024]");
  return static_cast<int>(w);
}

MineOptions RunConfig::mine_options() const {
  MineOptions m;
  m.activity.threshold_db = GetDouble("threshold_db");
  if (m.activity.threshold_db > 0.0) {
    Fail(ErrorKind::kInvalidArgument, "threshold_db must be <= 0 dBFS");
  }
  m.frame_ms = GetDouble("frame_ms");
  m.hop_ms = GetDouble("hop_ms");
  if (!(m.frame_ms > 0.0) || !(m.hop_ms > 0.0) || m.hop_ms > m.frame_ms) {
    Fail(ErrorKind::kInvalidArgument, "need 0 < hop_ms <= frame_ms");
  }
  m.min_segment = NonNegative(*this, "min_segment");
  m.channel = Channel(*this, "noise_channel");
  m.workers = workers();
  return m;
}

bool RunConfig::augmentation_enabled() const {
  return Get("preset") != "none" || IsSet("snr_low") || IsSet("snr_high");
}

AugmentationConfig RunConfig::augmentation() const {
  AugmentationConfig a;
  if (IsSet("snr_low") || IsSet("snr_high")) {
    if (!IsSet("snr_low") || !IsSet("snr_high")) {
      Fail(ErrorKind::kInvalidArgument, "snr_low and snr_high must be given together");
    }
    a.snr_range = {GetDouble("snr_low"), GetDouble("snr_high")};
  } else {
    auto preset = SnrPreset(Get("preset"));
    if (!preset) {
      Fail(ErrorKind::kInvalidArgument,
           "preset must be aug1, aug2 or aug3 (got '" + Get("preset") + "')");
    }
    a.snr_range = *preset;
  }
  if (!(a.snr_range.low_db <= a.snr_range.high_db)) {
    Fail(ErrorKind::kInvalidArgument, "snr_low must not exceed snr_high");
  }
  const std::string& seed = Get("seed");
  char* end = nullptr;
  errno = 0;
  a.seed = std::strtoull(seed.c_str(), &end, 10);
  if (seed.empty() || *end != '\0' || errno == ERANGE || seed[0] == '-') {
    Fail(ErrorKind::kInvalidArgument, "seed must be an unsigned 64-bit integer");
  }
  a.channel = Channel(*this, "enroll_channel");
  a.workers = workers();
  return a;
}

GateConfig RunConfig::gate() const {
  GateConfig g;
  const std::string& mode = Get("gate_mode");
  if (mode == "stationary") {
    g.stationary = true;
  } else if (mode == "non-stationary") {
    g.stationary = false;
  } else {
    Fail(ErrorKind::kInvalidArgument, "gate_mode must be stationary or non-stationary");
  }
  g.prop_decrease = GetDouble("prop_decrease");
  g.n_std_thresh = GetDouble("n_std");
  g.n_fft = NonNegative(*this, "gate_n_fft");
  g.hop = NonNegative(*this, "gate_hop");
  g.smooth_frames = NonNegative(*this, "smooth_frames");
  g.smooth_bins = NonNegative(*this, "smooth_bins");
  g.ema_coeff = GetDouble("ema");
  ValidateGateConfig(g);
  return g;
}

MelConfig RunConfig::mel() const {
  MelConfig m;
  m.n_fft = NonNegative(*this, "n_fft");
  m.hop = NonNegative(*this, "mel_hop");
  m.n_mels = NonNegative(*this, "n_mels");
  m.f_min = GetDouble("f_min");
  if (!Get("f_max").empty()) m.f_max = GetDouble("f_max");
  m.log_floor = GetDouble("log_floor");
  if (m.hop < 1 || m.hop > m.n_fft) Fail(ErrorKind::kInvalidArgument, "mel_hop must be in [1, n_fft]");
  return m;
}

DcfParams RunConfig::dcf() const {
  DcfParams p{GetDouble("p_target"), GetDouble("c_miss"), GetDouble("c_fa")};
  ValidateDcfParams(p);
  return p;
}

namespace {

void EnsureDir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) Fail(ErrorKind::kIo, "cannot create " + dir.string());
}

void FreezeConfig(const RunConfig& config, const fs::path& dir) {
  EnsureDir(dir);
  WriteFileBytes(dir / "run.config", config.Frozen());
}

std::string Digest(const fs::path& path) { return Hex64(Fnv1a64(ReadFileBytes(path))); }

void RequirePath(const fs::path& p, const char* what) {
  if (p.empty()) Fail(ErrorKind::kInvalidArgument, std::string(what) + " is required");
  std::error_code ec;
  if (!fs::exists(p, ec)) Fail(ErrorKind::kIo, std::string(what) + " not found: " + p.string());
}

}  // namespace

NoisePool StageMineNoise(const RunConfig& config, const fs::path& in_dir,
                         const fs::path& out_dir) {
  RequirePath(in_dir, "noise source directory");
  const MineOptions options = config.mine_options();
  NoisePool pool = MineNoisePool(in_dir, options);
  EnsureDir(out_dir);
  WriteNoisePool(pool, out_dir);
  FreezeConfig(config, out_dir);
  return pool;
}

std::vector<AugmentRecord> StageAugment(const RunConfig& config,
                                        const fs::path& enroll_dir,
                                        const fs::path& pool_dir,
                                        const fs::path& out_dir) {
  RequirePath(enroll_dir, "enrollment directory");
  RequirePath(pool_dir, "noise pool directory");
  AugmentationConfig aug = config.augmentation();
  aug.noise_pool_path = pool_dir;
  auto records = AugmentCorpus(enroll_dir, aug, out_dir);
  FreezeConfig(config, out_dir);
  return records;
}

std::size_t StageDenoise(const RunConfig& config, const fs::path& in_dir,
                         const fs::path& out_dir) {
  RequirePath(in_dir, "input directory");
  const std::size_t n = DenoiseDirectory(in_dir, out_dir, config.gate(),
                                         Channel(config, "test_channel"),
                                         config.workers());
  FreezeConfig(config, out_dir);
  return n;
}

EmbedSummary StageEmbed(const RunConfig& config, const fs::path& in_dir,
                        const fs::path& out_file, const fs::path& external) {
  RequirePath(in_dir, "input directory");
  if (out_file.empty()) Fail(ErrorKind::kInvalidArgument, "output file is required");
  const auto files = ListWavFiles(in_dir);
  EmbeddingSet set;
  std::string coverage = "utterance_id\tstatus\n";
  if (external.empty()) {
    if (config.Get("embedder") != "baseline") {
      Fail(ErrorKind::kInvalidArgument, "embedder=external needs an embeddings file");
    }
    set = EmbedDirectory(in_dir, config.mel(), Channel(config, "enroll_channel"),
                         config.workers());
    for (const auto& [id, e] : set) coverage += id + "\tembedded\n";
  } else {
    RequirePath(external, "external embeddings file");
    set = ReadEmbeddings(external);
    std::vector<std::string> missing;
    for (const auto& f : files) {
      const std::string id = f.stem().string();
      if (set.Contains(id)) {
        coverage += id + "\tpresent\n";
      } else {
        missing.push_back(id);
      }
    }
    if (!missing.empty()) {
      std::string list;
      for (const auto& m : missing) list += (list.empty() ? "" : ", ") + m;
      Fail(ErrorKind::kData, external.string() + " is missing utterances: " + list);
    }
  }
  if (out_file.has_parent_path()) EnsureDir(out_file.parent_path());
  WriteEmbeddings(set, out_file);
  fs::path cov = out_file;
  cov += ".coverage.tsv";
  WriteFileBytes(cov, coverage);
  return {files.size(), set.size(), set.dim()};
}

EvalSummary StageEvaluate(const RunConfig& config, const fs::path& enroll_embeddings,
                          const fs::path& test_embeddings, const fs::path& trials,
                          const fs::path& out_dir) {
  RequirePath(enroll_embeddings, "enrollment embeddings");
  RequirePath(test_embeddings, "test embeddings");
  RequirePath(trials, "trial list");
  const DcfParams dcf = config.dcf();
  EmbeddingSet enroll = ReadEmbeddings(enroll_embeddings);
  EmbeddingSet tests = ReadEmbeddings(test_embeddings);
  if (!enroll.empty() && !tests.empty() && enroll.dim() != tests.dim()) {
    Fail(ErrorKind::kData, StrFormat("enrollment dim %zu != test dim %zu",
                                     enroll.dim(), tests.dim()));
  }

  std::set<std::string, std::less<>> excluded;
  const fs::path exclude_path = config.Get("exclude");
  if (!exclude_path.empty()) excluded = ReadExclusionList(exclude_path);

  std::vector<std::string> notes;
  std::size_t excluded_present = 0;
  for (const auto& id : excluded) {
    const bool in_enroll = enroll.Erase(id) > 0;
    const bool in_test = tests.Erase(id) > 0;
    if (in_enroll || in_test) {
      ++excluded_present;
      notes.push_back("excluded utterance " + id);
    }
  }

  const std::string delimiter = config.Get("speaker_delimiter");
  const auto speakers =
      BuildSpeakerModels(enroll, delimiter, {}, config.GetBool("l2_normalize"));

  // Trials whose utterance or whole speaker was excluded are dropped, not
  // treated as unresolvable.
  std::vector<Trial> kept;
  for (const Trial& t : ReadTrials(trials)) {
    const bool test_gone = excluded.contains(t.test_utterance_id);
    const bool speaker_gone =
        !speakers.contains(t.enroll_speaker_id) &&
        std::any_of(excluded.begin(), excluded.end(), [&](const std::string& id) {
          return SpeakerOf(id, delimiter) == t.enroll_speaker_id;
        });
    if (test_gone || speaker_gone) continue;
    kept.push_back(t);
  }

  ScoringOutcome scored =
      ScoreTrials(kept, speakers, tests, config.GetBool("strict"), config.workers());
  for (auto& w : scored.warnings) notes.push_back(std::move(w));

  EvalSummary summary;
  summary.report = Evaluate(scored.scores, dcf);
  summary.scored = scored.scores.entries.size();
  summary.skipped = scored.warnings.size();
  summary.excluded = excluded_present;

  EnsureDir(out_dir);
  WriteFileBytes(out_dir / "scores.tsv", FormatScoresTsv(scored.scores));
  WriteFileBytes(out_dir / "report.txt", FormatReport(summary.report, notes));
  WriteFileBytes(out_dir / "det.tsv", FormatDetTsv(summary.report.det));
  FreezeConfig(config, out_dir);

  std::string manifest;
  manifest += StrFormat("tool=ffsv %s\n", kVersion);
  manifest += "config_hash=" + Hex64(config.Hash()) + "\n";
  manifest += "input\t" + enroll_embeddings.string() + "\t" + Digest(enroll_embeddings) + "\n";
  manifest += "input\t" + test_embeddings.string() + "\t" + Digest(test_embeddings) + "\n";
  manifest += "input\t" + trials.string() + "\t" + Digest(trials) + "\n";
  if (!exclude_path.empty()) {
    manifest += "input\t" + exclude_path.string() + "\t" + Digest(exclude_path) + "\n";
  }
  WriteFileBytes(out_dir / "run.manifest", manifest);
  return summary;
}

EvalSummary RunPipeline(const RunConfig& config) {
  const fs::path work = config.Get("work_dir");
  if (work.empty()) Fail(ErrorKind::kInvalidArgument, "work_dir is required");
  const fs::path enroll_dir = config.Get("enroll_dir");
  const fs::path test_dir = config.Get("test_dir");
  const fs::path trials = config.Get("trials");
  RequirePath(enroll_dir, "enroll_dir");
  RequirePath(test_dir, "test_dir");
  RequirePath(trials, "trials");
  const fs::path noise_dir =
      config.Get("noise_dir").empty() ? test_dir : fs::path(config.Get("noise_dir"));
  const bool external = config.Get("embedder") == "external";
  if (!external && config.Get("embedder") != "baseline") {
    Fail(ErrorKind::kInvalidArgument, "embedder must be baseline or external");
  }
  EnsureDir(work);

  fs::path enroll_audio = enroll_dir;
  if (config.augmentation_enabled()) {
    StageMineNoise(config, noise_dir, work / "noise_pool");
    StageAugment(config, enroll_dir, work / "noise_pool", work / "augmented");
    enroll_audio = work / "augmented";
  }
  fs::path test_audio = test_dir;
  if (config.GetBool("denoise_test")) {
    StageDenoise(config, test_dir, work / "denoised");
    test_audio = work / "denoised";
  }

  const fs::path enroll_emb = work / "embeddings" / "enroll.spkemb";
  const fs::path test_emb = work / "embeddings" / "test.spkemb";
  StageEmbed(config, enroll_audio, enroll_emb,
             external ? fs::path(config.Get("enroll_embeddings")) : fs::path());
  {
    // Test audio may carry its own channel selection.
    RunConfig test_config = config;
    test_config.Set("enroll_channel", config.Get("test_channel"));
    StageEmbed(test_config, test_audio, test_emb,
               external ? fs::path(config.Get("test_embeddings")) : fs::path());
  }
  EvalSummary summary = StageEvaluate(config, enroll_emb, test_emb, trials, work / "eval");

  FreezeConfig(config, work);
  std::string manifest;
  manifest += StrFormat("tool=ffsv %s\n", kVersion);
  manifest += "config_hash=" + Hex64(config.Hash()) + "\n";
  std::vector<fs::path> dirs = {enroll_dir, test_dir};
  if (noise_dir != test_dir) dirs.push_back(noise_dir);
  for (const auto& dir : dirs) {
    for (const auto& f : ListWavFiles(dir)) {
      manifest += "input\t" + f.string() + "\t" + Digest(f) + "\n";
    }
  }
  manifest += "input\t" + trials.string() + "\t" + Digest(trials) + "\n";
  for (const char* rel : {"eval/scores.tsv", "eval/report.txt", "eval/det.tsv",
                          "embeddings/enroll.spkemb", "embeddings/test.spkemb"}) {
    manifest += std::string("output\t") + rel + "\t" + Digest(work / rel) + "\n";
  }
  WriteFileBytes(work / "run.manifest", manifest);
  return summary;
}

}  // namespace ffsv
