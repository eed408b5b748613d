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

// Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any
// failure.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <limits>
#include <map>
#include <numbers>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "ffsv/augmentation.hpp"
#include "ffsv/common.hpp"
#include "ffsv/denoise.hpp"
#include "ffsv/embeddings.hpp"
#include "ffsv/noise_extraction.hpp"
#include "ffsv/pipeline.hpp"
#include "ffsv/scoring.hpp"
#include "ffsv/stft.hpp"
#include "ffsv/synth.hpp"
#include "support/test_util.hpp"

namespace ffsv {
namespace {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = true;
  std::string detail;
};

int g_failures = 0;

void Run(const char* name, double limit_s, const std::function<Outcome()>& body) {
  const auto t0 = Clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
  std::string timing = StrFormat("%.2fs", secs);
  if (limit_s > 0.0) {
    timing += StrFormat(" (limit %.0fs)", limit_s);
    if (secs >= limit_s) o.pass = false;
  }
  if (!o.pass) ++g_failures;
  std::printf("%s %s: %s [%s]\n", o.pass ? "PASS" : "FAIL", name, o.detail.c_str(),
              timing.c_str());
  std::fflush(stdout);
}

AudioBuffer Buffer(std::vector<double> samples, std::uint32_t rate = 16000) {
  AudioBuffer b;
  b.sample_rate_hz = rate;
  b.samples = std::move(samples);
  return b;
}

// ---- noise extraction ----------------------------------------------------

Outcome NoiseExtraction() {
  Rng rng(2024);
  std::size_t mismatches = 0, lost = 0, total = 0, segments = 0;
  for (int sig = 0; sig < 50; ++sig) {
    const std::size_t n = 8000 + rng.Below(40000);
    std::vector<double> x(n);
    const double floor_rms = 1e-3 * (1.0 + rng.Uniform());
    for (auto& v : x) v = floor_rms * rng.Gaussian();
    const int bursts = 1 + static_cast<int>(rng.Below(6));
    for (int k = 0; k < bursts; ++k) {
      const std::size_t start = rng.Below(n);
      const std::size_t len = 200 + rng.Below(6000);
      const double amp = 0.05 + 0.4 * rng.Uniform();
      for (std::size_t i = start; i < std::min(n, start + len); ++i) {
        x[i] += amp * std::sin(0.07 * double(i)) ;
      }
    }
    const ActivityOptions opt{-35.0, 400, 160};
    const std::size_t min_segment = opt.frame_len;

    // Oracle: per-frame threshold decisions painted onto samples.
    std::vector<bool> voiced(n, false);
    for (std::size_t s = 0; s < n; s += opt.hop) {
      const std::size_t e = std::min(n, s + opt.frame_len);
      double sum = 0.0;
      for (std::size_t i = s; i < e; ++i) sum += x[i] * x[i];
      if (20.0 * std::log10(std::sqrt(sum / double(e - s)) + 1e-10) >= opt.threshold_db) {
        std::fill(voiced.begin() + s, voiced.begin() + e, true);
      }
    }
    std::vector<Interval> expect;
    for (std::size_t i = 0; i < n;) {
      if (voiced[i]) { ++i; continue; }
      std::size_t j = i;
      while (j < n && !voiced[j]) ++j;
      if (j - i >= min_segment) expect.push_back({i, j});
      i = j;
    }

    const AudioBuffer b = Buffer(x);
    const auto act = DetectActivity(b, opt);
    const auto got = ComplementSegments(act, n, min_segment);
    const auto clips = ExtractNoise(b, act, min_segment);
    if (got != expect || clips.size() != expect.size()) ++mismatches;
    for (std::size_t c = 0; c < std::min(clips.size(), expect.size()); ++c) {
      if (clips[c].samples != std::vector<double>(x.begin() + expect[c].start,
                                                  x.begin() + expect[c].end)) {
        ++mismatches;
      }
    }
    segments += got.size();

    // Partition: voiced runs plus the unfiltered complement cover [0, n) once.
    std::vector<int> cover(n, 0);
    for (const auto& iv : act) for (std::size_t i = iv.start; i < iv.end; ++i) ++cover[i];
    for (const auto& iv : ComplementSegments(act, n, 1)) {
      for (std::size_t i = iv.start; i < iv.end; ++i) ++cover[i];
    }
    for (int c : cover) lost += c != 1;
    total += n;
  }
  return {mismatches == 0 && lost == 0,
          StrFormat("50 signals, %zu samples, %zu noise segments, %zu oracle mismatches, "
                    "%zu samples lost or doubled",
                    total, segments, mismatches, lost)};
}

// ---- SNR accuracy --------------------------------------------------------

Outcome SnrAccuracy() {
  Rng rng(77);
  NoisePool pool;
  pool.sample_rate_hz = 16000;
  for (int i = 0; i < 8; ++i) {
    NoiseClip clip;
    clip.clip_id = "n" + std::to_string(i);
    const double scale = 0.01 + 0.3 * rng.Uniform();
    clip.audio = Buffer(std::vector<double>(2000 + rng.Below(20000)));
    for (auto& v : clip.audio.samples) v = scale * rng.Gaussian();
    pool.clips.push_back(clip);
  }
  double worst = 0.0, peak = 0.0;
  int rescaled = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 4000 + rng.Below(40000);
    const double amp = 0.02 + 0.9 * rng.Uniform();
    std::vector<double> clean(n);
    for (std::size_t i = 0; i < n; ++i) {
      clean[i] = amp * std::sin(0.01 * double(i) + 0.3 * rng.Gaussian());
    }
    const double target = -15.0 + 25.0 * rng.Uniform();
    const FittedNoise noise = FitNoiseToLength(pool, n, rng);
    const MixResult mix = MixAtSnr(Buffer(clean), noise.audio, target);
    double pc = 0.0, pn = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double added = mix.mixture.samples[i] / mix.rescale - clean[i];
      pc += clean[i] * clean[i];
      pn += added * added;
      peak = std::max(peak, std::abs(mix.mixture.samples[i]));
    }
    worst = std::max(worst, std::abs(10.0 * std::log10(pc / pn) - target));
    rescaled += mix.rescale < 1.0;
  }
  return {worst <= 0.01 && peak <= 1.0,
          StrFormat("200 mixes, max |SNR error| %.3g dB (tol 0.01), max |sample| %.6f, "
                    "%d peak-normalized",
                    worst, peak, rescaled)};
}

// ---- metric oracles ------------------------------------------------------

void BruteForce(const std::vector<double>& tar, const std::vector<double>& non,
                const DcfParams& p, double& eer, double& min_dcf) {
  std::set<double> uniq(tar.begin(), tar.end());
  uniq.insert(non.begin(), non.end());
  std::vector<double> ths(uniq.begin(), uniq.end());
  ths.push_back(std::numeric_limits<double>::infinity());
  eer = std::nan("");
  min_dcf = std::numeric_limits<double>::infinity();
  double prev_pm = 0.0, prev_pf = 0.0;
  for (std::size_t i = 0; i < ths.size(); ++i) {
    std::size_t miss = 0, fa = 0;
    for (double s : tar) miss += s < ths[i];
    for (double s : non) fa += s >= ths[i];
    const double pm = double(miss) / tar.size(), pf = double(fa) / non.size();
    const double wm = p.c_miss * p.p_target, wf = p.c_fa * (1.0 - p.p_target);
    min_dcf = std::min(min_dcf, (wm * pm + wf * pf) / std::min(wm, wf));
    if (std::isnan(eer) && pm >= pf) {
      if (pm == pf || i == 0) {
        eer = pm;
      } else {
        const double d0 = prev_pm - prev_pf, d1 = pm - pf;
        eer = prev_pm + (pm - prev_pm) * d0 / (d0 - d1);
      }
    }
    prev_pm = pm;
    prev_pf = pf;
  }
}

ScoreSet Labeled(const std::vector<double>& tar, const std::vector<double>& non) {
  ScoreSet s;
  s.convention = ScoreConvention::kSimilarity;
  for (double v : tar) s.entries.push_back({{"e", "t", TrialLabel::kTarget}, v});
  for (double v : non) s.entries.push_back({{"e", "n", TrialLabel::kNontarget}, v});
  return s;
}

Outcome MetricOracles() {
  Rng rng(5150);
  double worst_eer = 0.0, worst_dcf = 0.0;
  std::size_t largest = 0;
  for (int set = 0; set < 100; ++set) {
    const std::size_t n = 2 + rng.Below(1999);
    const std::size_t n_tar = 1 + rng.Below(n - 1);
    std::vector<double> tar(n_tar), non(n - n_tar);
    const bool ties = set % 4 == 0;
    const double sep = 3.0 * rng.Uniform();
    for (auto& v : tar) v = ties ? double(rng.Below(20)) + 2.0 * sep : rng.Gaussian() + sep;
    for (auto& v : non) v = ties ? double(rng.Below(20)) : rng.Gaussian();
    const DcfParams p{0.001 + 0.998 * rng.Uniform(), 0.2 + 5.0 * rng.Uniform(),
                      0.2 + 5.0 * rng.Uniform()};
    double eer = 0.0, dcf = 0.0;
    BruteForce(tar, non, p, eer, dcf);
    const EvalReport r = Evaluate(Labeled(tar, non), p);
    worst_eer = std::max(worst_eer, std::abs(r.eer - eer));
    worst_dcf = std::max(worst_dcf, std::abs(r.min_dcf - dcf));
    largest = std::max(largest, n);
  }
  const auto fixture = Labeled({0.9, 0.8, 0.7, 0.4}, {0.6, 0.5, 0.3, 0.2});
  const EvalReport f = Evaluate(fixture, {0.5, 1.0, 1.0});
  const bool ok = worst_eer <= 1e-12 && worst_dcf <= 1e-12 && f.eer == 0.25 && f.min_dcf == 0.25;
  return {ok, StrFormat("100 sets (n <= %zu): max |dEER| %.3g, max |dminDCF| %.3g (tol 1e-12); "
                        "fixture EER %.17g, minDCF(p=0.5) %.17g",
                        largest, worst_eer, worst_dcf, f.eer, f.min_dcf)};
}

// ---- STFT round trip -----------------------------------------------------

double MaxAbsDiff(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) return std::numeric_limits<double>::infinity();
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

Outcome StftRoundTrip() {
  Rng rng(909);
  double worst_rt = 0.0, worst_gate = 0.0;
  int cases = 0;
  for (std::size_t n_fft : {256u, 512u, 1024u, 2048u}) {
    for (int rep = 0; rep < 5; ++rep) {
      std::vector<double> x(n_fft + rng.Below(30000));
      for (auto& v : x) v = 0.5 * rng.Gaussian();
      const AudioBuffer b = Buffer(x);
      worst_rt = std::max(worst_rt, MaxAbsDiff(Istft(Stft(b, n_fft, n_fft / 4)).samples, x));
      GateConfig g;
      g.prop_decrease = 0.0;
      g.n_fft = n_fft;
      g.hop = n_fft / 4;
      g.stationary = rep % 2 == 0;
      worst_gate = std::max(worst_gate, MaxAbsDiff(SpectralGate(b, g).samples, x));
      ++cases;
    }
  }
  return {worst_rt <= 1e-6 && worst_gate <= 1e-6,
          StrFormat("%d signals, hop = n_fft/4: max round-trip error %.3g, "
                    "prop_decrease=0 gate error %.3g (tol 1e-6)",
                    cases, worst_rt, worst_gate)};
}

// ---- denoise efficacy ----------------------------------------------------

double SnrVsReference(const std::vector<double>& ref, const std::vector<double>& y) {
  double ps = 0.0, pe = 0.0;
  for (std::size_t i = 0; i < ref.size(); ++i) {
    ps += ref[i] * ref[i];
    pe += (y[i] - ref[i]) * (y[i] - ref[i]);
  }
  return 10.0 * std::log10(ps / pe);
}

Outcome DenoiseEfficacy() {
  Rng rng(31337);
  const std::size_t n = 4 * 16000;
  std::vector<double> clean(n, 0.0), noise(n);
  // A 1 kHz tone switched on for the middle second.
  for (std::size_t i = n / 2 - 8000; i < n / 2 + 8000; ++i) {
    clean[i] = std::sin(2.0 * std::numbers::pi * 1000.0 * double(i) / 16000.0);
  }
  for (auto& v : noise) v = rng.Gaussian();
  double pc = 0.0, pn = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    pc += clean[i] * clean[i];
    pn += noise[i] * noise[i];
  }
  const double scale = 0.25 / std::sqrt(pc / double(n));
  const double nscale = std::sqrt(pc / pn) * scale;
  std::vector<double> ref(n), mix(n);
  for (std::size_t i = 0; i < n; ++i) {
    ref[i] = scale * clean[i];
    mix[i] = ref[i] + nscale * noise[i];
  }
  GateConfig g;
  g.stationary = true;
  g.prop_decrease = 1.0;
  const AudioBuffer out = SpectralGate(Buffer(mix), g);
  const double before = SnrVsReference(ref, mix);
  const double after = SnrVsReference(ref, out.samples);
  return {after - before >= 3.0,
          StrFormat("input SNR %.2f dB, output SNR %.2f dB, improvement %.2f dB (need >= 3)",
                    before, after, after - before)};
}

// ---- interchange ---------------------------------------------------------

Outcome Interchange() {
  Rng rng(4242);
  testing::TempDir dir("accept_emb");
  int sets = 0, records = 0;
  bool exact = true;
  for (int s = 0; s < 50; ++s) {
    EmbeddingSet set;
    const std::size_t dim = 1 + rng.Below(512);
    const std::size_t count = rng.Below(40);
    for (std::size_t i = 0; i < count; ++i) {
      Embedding e;
      e.utterance_id = StrFormat("spk%llu-utt%llu", (unsigned long long)rng.Below(10),
                                 (unsigned long long)rng.NextU64());
      for (std::size_t d = 0; d < dim; ++d) {
        e.values.push_back(static_cast<float>(rng.Gaussian() * std::exp(6.0 * rng.Gaussian())));
      }
      set.Add(std::move(e));
    }
    const fs::path path = dir / StrFormat("set%d.spkemb", s);
    WriteEmbeddings(set, path);
    const EmbeddingSet back = ReadEmbeddings(path);
    exact = exact && back == set && EncodeEmbeddings(back) == ReadFileBytes(path);
    ++sets;
    records += static_cast<int>(count);
  }

  EmbeddingSet one;
  one.Add({"a", {1.0f, 2.0f}});
  one.Add({"b", {3.0f, 4.0f}});
  const std::string good = EncodeEmbeddings(one);
  std::vector<std::string> corrupt;
  std::string bad_magic = good;
  bad_magic[7] = '2';
  corrupt.push_back(bad_magic);
  corrupt.push_back(good.substr(0, 5));
  corrupt.push_back(good.substr(0, 12));
  std::string big_count = good;
  big_count[12] = 9;
  corrupt.push_back(big_count);
  std::string small_count = good;
  small_count[12] = 1;
  corrupt.push_back(small_count);
  std::string zero_dim = good;
  zero_dim[8] = 0;
  corrupt.push_back(zero_dim);
  std::string big_dim = good;
  big_dim[8] = 3;
  corrupt.push_back(big_dim);
  std::string long_id = good;
  long_id[16] = 0x7f;
  corrupt.push_back(long_id);
  int rejected = 0;
  for (const auto& bytes : corrupt) {
    try {
      DecodeEmbeddings(bytes);
    } catch (const Error& e) {
      rejected += e.kind() == ErrorKind::kFormat;
    }
  }
  return {exact && rejected == int(corrupt.size()),
          StrFormat("%d sets / %d records bit-exact: %s; corrupted headers rejected %d/%zu",
                    sets, records, exact ? "yes" : "no", rejected, corrupt.size())};
}

// ---- pipeline ------------------------------------------------------------

CorpusLayout MiniCorpus(const fs::path& root, std::uint64_t seed) {
  CorpusOptions o;
  o.seed = seed;
  return MakeSyntheticCorpus(root, o);
}

RunConfig MiniConfig(const CorpusLayout& c, const fs::path& work) {
  RunConfig cfg;
  cfg.Set("enroll_dir", c.enroll_dir.string());
  cfg.Set("test_dir", c.test_dir.string());
  cfg.Set("trials", c.trials.string());
  cfg.Set("work_dir", work.string());
  // The mini-corpus noise bed sits near -21 dBFS.
  cfg.Set("threshold_db", "-18");
  return cfg;
}

std::map<std::string, std::string> Snapshot(const fs::path& root) {
  std::map<std::string, std::string> files;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (e.is_regular_file()) files[fs::relative(e.path(), root).string()] = ReadFileBytes(e.path());
  }
  return files;
}

Outcome Determinism() {
  testing::TempDir dir("accept_det");
  const auto c = MiniCorpus(dir / "corpus", 1);
  const fs::path work = dir / "work";
  RunConfig cfg = MiniConfig(c, work);
  cfg.Set("denoise_test", "true");
  cfg.Set("seed", "11");

  cfg.Set("workers", "1");
  RunPipeline(cfg);
  const auto first = Snapshot(work);
  fs::remove_all(work);
  cfg.Set("workers", "8");
  RunPipeline(cfg);
  const auto second = Snapshot(work);

  std::vector<std::string> differ;
  std::set<std::string> names;
  for (const auto& [k, v] : first) names.insert(k);
  for (const auto& [k, v] : second) names.insert(k);
  for (const auto& name : names) {
    auto a = first.find(name), b = second.find(name);
    if (a == first.end() || b == second.end() || a->second != b->second) differ.push_back(name);
  }
  int manifests = 0;
  for (const auto& name : names) manifests += name.find("manifest") != std::string::npos;
  const bool core = first.count("run.manifest") && first.count("eval/scores.tsv") &&
                    first.count("eval/report.txt");
  std::string detail = StrFormat("%zu output files (%d manifests) compared across workers=1 "
                                 "and workers=8: %zu differ",
                                 names.size(), manifests, differ.size());
  for (const auto& d : differ) detail += " " + d;
  return {core && differ.empty(), detail};
}

struct DirectionStats {
  double target_dissimilarity_sum = 0.0;
  std::size_t target_trials = 0;
  double eer_sum = 0.0;
};

void Accumulate(const fs::path& work, const EvalSummary& summary, DirectionStats& st) {
  std::istringstream in(ReadFileBytes(work / "eval/scores.tsv"));
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::string spk, utt, score, label;
    std::getline(ls, spk, '\t');
    std::getline(ls, utt, '\t');
    std::getline(ls, score, '\t');
    std::getline(ls, label, '\t');
    if (label == "target") {
      st.target_dissimilarity_sum += std::stod(score);
      ++st.target_trials;
    }
  }
  st.eer_sum += summary.report.eer;
}

Outcome HypothesisDirection() {
  testing::TempDir dir("accept_hyp");
  DirectionStats clean, aug;
  std::string per_seed;
  int seed_eer_worse = 0;
  for (int seed = 1; seed <= 10; ++seed) {
    const auto c = MiniCorpus(dir / StrFormat("corpus%d", seed), seed);
    RunConfig cfg = MiniConfig(c, dir / StrFormat("clean%d", seed));
    cfg.Set("preset", "none");
    const EvalSummary s_clean = RunPipeline(cfg);
    Accumulate(dir / StrFormat("clean%d", seed), s_clean, clean);

    cfg.Set("work_dir", (dir / StrFormat("aug%d", seed)).string());
    cfg.Set("preset", "aug1");
    cfg.Set("seed", std::to_string(seed));
    const EvalSummary s_aug = RunPipeline(cfg);
    Accumulate(dir / StrFormat("aug%d", seed), s_aug, aug);
    seed_eer_worse += s_aug.report.eer > s_clean.report.eer;
    per_seed += StrFormat(" %d:%.3f/%.3f", seed, s_clean.report.eer, s_aug.report.eer);
  }
  const double d_clean = clean.target_dissimilarity_sum / double(clean.target_trials);
  const double d_aug = aug.target_dissimilarity_sum / double(aug.target_trials);
  const double eer_clean = clean.eer_sum / 10.0, eer_aug = aug.eer_sum / 10.0;
  return {d_aug < d_clean && eer_aug <= eer_clean,
          StrFormat("10 seeds, mean same-speaker dissimilarity clean %.4f vs aug1 %.4f; "
                    "mean EER clean %.4f vs aug1 %.4f (seeds with higher aug1 EER: %d; "
                    "clean/aug1 EER per seed:%s)",
                    d_clean, d_aug, eer_clean, eer_aug, seed_eer_worse, per_seed.c_str())};
}

}  // namespace
}  // namespace ffsv

int main() {
  using namespace ffsv;
  Run("noise-extraction-oracle", 5.0, NoiseExtraction);
  Run("snr-accuracy", 10.0, SnrAccuracy);
  Run("metric-oracles", 0.0, MetricOracles);
  Run("stft-round-trip", 0.0, StftRoundTrip);
  Run("denoise-efficacy", 0.0, DenoiseEfficacy);
  Run("interchange-round-trip", 0.0, Interchange);
  Run("end-to-end-determinism", 0.0, Determinism);
  Run("hypothesis-direction", 0.0, HypothesisDirection);
  std::printf("%s: %d failing criteria\n", g_failures ? "FAIL" : "PASS", g_failures);
  return g_failures ? 1 : 0;
}
