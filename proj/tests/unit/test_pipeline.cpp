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

#include <filesystem>
#include <string>

#include "doctest.h"
#include "ffsv/common.hpp"
#include "ffsv/pipeline.hpp"
#include "ffsv/synth.hpp"
#include "support/test_util.hpp"

namespace ffsv {
namespace {

namespace fs = std::filesystem;

CorpusOptions SmallCorpus() {
  CorpusOptions o;
  o.enroll_per_speaker = 2;
  o.test_per_speaker = 2;
  o.enroll_seconds = 0.8;
  o.test_speech_seconds = 0.8;
  o.test_pad_seconds = 0.3;
  return o;
}

RunConfig ConfigFor(const CorpusLayout& c, const fs::path& work) {
  RunConfig cfg;
  cfg.Set("enroll_dir", c.enroll_dir.string());
  cfg.Set("test_dir", c.test_dir.string());
  cfg.Set("trials", c.trials.string());
  cfg.Set("work_dir", work.string());
  cfg.Set("threshold_db", "-18");
  cfg.Set("seed", "5");
  return cfg;
}

TEST_CASE("config parsing and validation") {
  const auto cfg = RunConfig::Parse("# comment\n  preset = aug2 \nseed=9\n\nn_mels=32\n");
  CHECK(cfg.Get("preset") == "aug2");
  CHECK(cfg.GetInt("seed") == 9);
  CHECK(cfg.IsSet("n_mels"));
  CHECK_FALSE(cfg.IsSet("n_fft"));
  CHECK(cfg.mel().n_mels == 32);
  CHECK(cfg.augmentation().snr_range.low_db == -7.0);
  CHECK_FALSE(cfg.mel().f_max.has_value());

  auto kind = [](auto fn) {
    try {
      fn();
    } catch (const Error& e) {
      return e.kind();
    }
    return ErrorKind::kData;
  };
  CHECK(kind([] { RunConfig::Parse("nonsense=1\n"); }) == ErrorKind::kInvalidArgument);
  CHECK(kind([] { RunConfig::Parse("no equals sign\n"); }) == ErrorKind::kInvalidArgument);
  CHECK(kind([] { RunConfig().Set("seed", "a\nb"); }) == ErrorKind::kInvalidArgument);
  CHECK(kind([] { RunConfig::Parse("n_mels=abc").mel(); }) == ErrorKind::kInvalidArgument);
  CHECK(kind([] { RunConfig::Parse("workers=0").workers(); }) == ErrorKind::kInvalidArgument);
  CHECK(kind([] { RunConfig::Parse("threshold_db=3").mine_options(); }) ==
        ErrorKind::kInvalidArgument);
  CHECK(kind([] { RunConfig::Parse("snr_low=-3").augmentation(); }) ==
        ErrorKind::kInvalidArgument);
  CHECK(kind([] { RunConfig::Parse("preset=aug9").augmentation(); }) ==
        ErrorKind::kInvalidArgument);
  CHECK(kind([] { RunConfig::Parse("gate_mode=sometimes").gate(); }) ==
        ErrorKind::kInvalidArgument);
  CHECK(kind([] { RunConfig::Parse("p_target=1").dcf(); }) == ErrorKind::kInvalidArgument);
}

TEST_CASE("typed views of the config") {
  auto cfg = RunConfig::Parse("snr_low=-3\nsnr_high=2\ngate_mode=stationary\nf_max=7000\n");
  CHECK(cfg.augmentation().snr_range.low_db == -3.0);
  CHECK(cfg.augmentation().snr_range.high_db == 2.0);
  CHECK(cfg.gate().stationary);
  CHECK_FALSE(RunConfig().gate().stationary);
  CHECK(RunConfig().gate().n_fft == 1024);
  CHECK(cfg.mel().f_max.value() == 7000.0);
  CHECK(RunConfig().dcf().p_target == 0.01);
  CHECK(RunConfig().augmentation_enabled());
  CHECK_FALSE(RunConfig::Parse("preset=none").augmentation_enabled());
  const auto mine = RunConfig::Parse("threshold_db=-30\nmin_segment=12").mine_options();
  CHECK(mine.activity.threshold_db == -30.0);
  CHECK(mine.min_segment == 12);
}

TEST_CASE("frozen config ignores execution-only keys") {
  RunConfig a, b;
  a.Set("workers", "1");
  b.Set("workers", "8");
  b.Set("work_dir", "/elsewhere");
  CHECK(a.Frozen() == b.Frozen());
  CHECK(a.Hash() == b.Hash());
  CHECK(a.Frozen().find("workers") == std::string::npos);
  CHECK(a.Hash() == Fnv1a64(a.Frozen()));
  b.Set("seed", "1");
  CHECK(a.Hash() != b.Hash());
  // Frozen text parses back to the same configuration.
  CHECK(RunConfig::Parse(a.Frozen()).Frozen() == a.Frozen());
}

TEST_CASE("synthetic corpus layout") {
  testing::TempDir dir("corpus");
  const auto c = MakeSyntheticCorpus(dir.path(), SmallCorpus());
  CHECK(ListWavFiles(c.enroll_dir).size() == 4);
  CHECK(ListWavFiles(c.test_dir).size() == 4);
  const std::string trials = ReadFileBytes(c.trials);
  CHECK(trials.find("spk_1\tspk_1-test_0\ttarget\n") != std::string::npos);
  CHECK(trials.find("spk_2\tspk_1-test_1\tnontarget\n") != std::string::npos);
  testing::TempDir dir2("corpus");
  MakeSyntheticCorpus(dir2.path(), SmallCorpus());
  CHECK(ReadFileBytes(c.test_dir / "spk_2-test_1.wav") ==
        ReadFileBytes(dir2 / "test/spk_2-test_1.wav"));
}

TEST_CASE("pipeline runs every stage and is reproducible") {
  testing::TempDir dir("pipe");
  const auto c = MakeSyntheticCorpus(dir / "corpus", SmallCorpus());
  auto cfg = ConfigFor(c, dir / "w1");
  cfg.Set("denoise_test", "true");
  const auto s1 = RunPipeline(cfg);
  CHECK(s1.scored == 8);
  CHECK(s1.skipped == 0);
  for (const char* rel : {"noise_pool/manifest.tsv", "augmented/augment.manifest.tsv",
                          "denoised/run.config", "embeddings/enroll.spkemb",
                          "embeddings/test.spkemb.coverage.tsv", "eval/scores.tsv",
                          "eval/report.txt", "eval/det.tsv", "eval/run.manifest",
                          "run.config", "run.manifest"}) {
    CHECK_MESSAGE(fs::exists(dir / "w1" / rel), rel);
  }
  const auto enroll = ReadEmbeddings(dir / "w1/embeddings/enroll.spkemb");
  CHECK(enroll.size() == 4);
  CHECK(enroll.dim() == 128);

  cfg.Set("work_dir", (dir / "w2").string());
  cfg.Set("workers", "4");
  RunPipeline(cfg);
  for (const char* rel : {"noise_pool/manifest.tsv", "augmented/augment.manifest.tsv",
                          "embeddings/enroll.spkemb", "embeddings/test.spkemb",
                          "eval/scores.tsv", "eval/report.txt", "eval/det.tsv",
                          "run.config", "run.manifest"}) {
    CHECK_MESSAGE(ReadFileBytes(dir / "w1" / rel) == ReadFileBytes(dir / "w2" / rel), rel);
  }
}

TEST_CASE("evaluation applies exclusions and lenient scoring") {
  testing::TempDir dir("eval");
  const auto c = MakeSyntheticCorpus(dir / "corpus", SmallCorpus());
  auto cfg = ConfigFor(c, dir / "w");
  cfg.Set("preset", "none");
  WriteFileBytes(dir / "exclude.txt", "spk_1-test_0\nspk_2-enroll_0\nspk_2-enroll_1\n");
  cfg.Set("exclude", (dir / "exclude.txt").string());
  const auto s = RunPipeline(cfg);
  // spk_2 loses every enrollment file: its 4 trials go, and so do the
  // 2 trials of the excluded test utterance (one of them already gone).
  CHECK(s.excluded == 3);
  CHECK(s.scored == 3);
  const std::string report = ReadFileBytes(dir / "w/eval/report.txt");
  CHECK(report.find("note: excluded utterance spk_1-test_0") != std::string::npos);

  WriteFileBytes(dir / "trials2.tsv", "spk_1\tspk_1-test_1\ttarget\nspk_1\tghost\tnontarget\n"
                                      "spk_1\tspk_2-test_0\tnontarget\n");
  cfg.Set("exclude", "");
  cfg.Set("trials", (dir / "trials2.tsv").string());
  CHECK_THROWS_AS(RunPipeline(cfg), Error);
  cfg.Set("strict", "false");
  const auto lenient = RunPipeline(cfg);
  CHECK(lenient.scored == 2);
  CHECK(lenient.skipped == 1);
}

TEST_CASE("external embeddings must cover every utterance") {
  testing::TempDir dir("ext");
  const auto c = MakeSyntheticCorpus(dir / "corpus", SmallCorpus());
  RunConfig cfg;
  StageEmbed(cfg, c.test_dir, dir / "full.spkemb");
  auto set = ReadEmbeddings(dir / "full.spkemb");
  set.Erase("spk_2-test_1");
  WriteEmbeddings(set, dir / "partial.spkemb");
  try {
    StageEmbed(cfg, c.test_dir, dir / "out.spkemb", dir / "partial.spkemb");
    FAIL("expected missing-id error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kData);
    CHECK(std::string(e.what()).find("spk_2-test_1") != std::string::npos);
  }
  const auto ok = StageEmbed(cfg, c.test_dir, dir / "out.spkemb", dir / "full.spkemb");
  CHECK(ok.records == 4);
  CHECK(ReadFileBytes(dir / "out.spkemb") == ReadFileBytes(dir / "full.spkemb"));
}

TEST_CASE("stages report missing inputs") {
  RunConfig cfg;
  CHECK_THROWS_AS(RunPipeline(cfg), Error);
  cfg.Set("work_dir", "/nonexistent/ffsv");
  cfg.Set("enroll_dir", "/nonexistent/enroll");
  try {
    RunPipeline(cfg);
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kIo);
  }
}

}  // namespace
}  // namespace ffsv
