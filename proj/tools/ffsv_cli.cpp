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

// ffsv command-line front end. Every subcommand is a thin wrapper over the
// C API in <ffsv/ffsv.h>; flags override keys of an optional config file.

#include <cstdio>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "ffsv/ffsv.h"

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;

struct ConfigDeleter {
  void operator()(ffsv_config* c) const { ffsv_config_free(c); }
};
using ConfigPtr = std::unique_ptr<ffsv_config, ConfigDeleter>;

// Flag values destined for config keys, in registration order.
struct Overrides {
  std::vector<std::pair<std::string, std::string>> pending;
  std::map<std::string, std::string> storage;
};

int ExitFor(ffsv_status status) {
  if (status == FFSV_OK) return 0;
  std::fprintf(stderr, "ffsv: %s: %s\n", ffsv_status_name(status), ffsv_last_error());
  return status == FFSV_E_INVALID_ARGUMENT ? kExitUsage : kExitData;
}

void Bind(CLI::App* app, Overrides& ov, const std::string& flag,
          const std::string& key, const std::string& help) {
  app->add_option_function<std::string>(
      flag, [&ov, key](const std::string& v) { ov.pending.emplace_back(key, v); },
      help);
}

void BindSwitch(CLI::App* app, Overrides& ov, const std::string& flag,
                const std::string& key, const std::string& value,
                const std::string& help) {
  app->add_flag_callback(
      flag, [&ov, key, value] { ov.pending.emplace_back(key, value); }, help);
}

void BindMel(CLI::App* app, Overrides& ov) {
  Bind(app, ov, "--n-fft", "n_fft", "FFT size of the log-mel front end");
  Bind(app, ov, "--mel-hop", "mel_hop", "Hop of the log-mel front end (samples)");
  Bind(app, ov, "--n-mels", "n_mels", "Number of mel bands");
  Bind(app, ov, "--f-min", "f_min", "Lowest mel edge (Hz)");
  Bind(app, ov, "--f-max", "f_max", "Highest mel edge (Hz, default Nyquist)");
}

void BindMine(CLI::App* app, Overrides& ov) {
  Bind(app, ov, "--threshold-db", "threshold_db", "Voice-activity threshold (dBFS)");
  Bind(app, ov, "--frame-ms", "frame_ms", "Activity frame length (ms)");
  Bind(app, ov, "--hop-ms", "hop_ms", "Activity frame hop (ms)");
  Bind(app, ov, "--min-segment", "min_segment",
       "Shortest kept noise segment in samples (0: one frame)");
}

void BindAugment(CLI::App* app, Overrides& ov) {
  Bind(app, ov, "--preset", "preset", "SNR preset: aug1, aug2, aug3 (or none in pipeline)");
  Bind(app, ov, "--snr-low", "snr_low", "Lower SNR bound (dB), overrides --preset");
  Bind(app, ov, "--snr-high", "snr_high", "Upper SNR bound (dB), overrides --preset");
  Bind(app, ov, "--seed", "seed", "Augmentation seed");
}

void BindGate(CLI::App* app, Overrides& ov) {
  auto* group = app->add_option_group("gate mode");
  BindSwitch(group, ov, "--stationary", "gate_mode", "stationary",
             "Per-frequency threshold from whole-file statistics");
  BindSwitch(group, ov, "--non-stationary", "gate_mode", "non-stationary",
             "Per-cell threshold from a running average");
  group->require_option(0, 1);
  Bind(app, ov, "--prop-decrease", "prop_decrease", "Fraction of gated noise removed");
  Bind(app, ov, "--n-std", "n_std", "Threshold in standard deviations");
}

void BindEval(CLI::App* app, Overrides& ov) {
  Bind(app, ov, "--exclude", "exclude", "Utterance exclusion list");
  Bind(app, ov, "--p-target", "p_target", "DCF target prior");
  Bind(app, ov, "--c-miss", "c_miss", "DCF miss cost");
  Bind(app, ov, "--c-fa", "c_fa", "DCF false-alarm cost");
  Bind(app, ov, "--speaker-delimiter", "speaker_delimiter",
       "Speaker id is the utterance id up to this delimiter");
  BindSwitch(app, ov, "--lenient", "strict", "false",
             "Skip unresolvable trials with a warning");
  BindSwitch(app, ov, "--l2-normalize", "l2_normalize", "true",
             "Normalize embeddings before speaker averaging");
}

void PrintEval(const ffsv_eval_summary& s) {
  std::printf("eer=%.6f\nmin_dcf=%.6f\np_target=%g\nc_miss=%g\nc_fa=%g\n", s.eer,
              s.min_dcf, s.p_target, s.c_miss, s.c_fa);
  std::printf("scored=%zu skipped=%zu excluded=%zu\n", s.scored, s.skipped,
              s.excluded);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ffsv: far-field speaker verification toolkit"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(ffsv_version()));

  std::string config_path;
  std::string workers;
  std::vector<std::string> sets;
  app.add_option("--config", config_path, "key=value configuration file");
  app.add_option("--workers", workers, "Worker threads per stage");
  app.add_option("--set", sets, "Override any config key (key=value)");

  Overrides ov;
  std::string in, out, pool, external, enroll_emb, test_emb, trials;
  std::string channel;

  auto* mine = app.add_subcommand("mine-noise", "Extract noise-only segments into a pool");
  mine->add_option("--in", in, "Directory of far-field WAVs")->required();
  mine->add_option("--out", out, "Noise pool directory")->required();
  mine->add_option("--channel", channel, "Channel to read from multi-channel files");
  BindMine(mine, ov);

  auto* augment = app.add_subcommand("augment", "Mix pool noise into enrollment audio");
  augment->add_option("--in", in, "Enrollment WAV directory")->required();
  augment->add_option("--pool", pool, "Noise pool directory")->required();
  augment->add_option("--out", out, "Output directory")->required();
  augment->add_option("--channel", channel, "Channel to read from multi-channel files");
  BindAugment(augment, ov);

  auto* denoise = app.add_subcommand("denoise", "Spectral-gate every WAV in a directory");
  denoise->add_option("--in", in, "Input WAV directory")->required();
  denoise->add_option("--out", out, "Output directory")->required();
  denoise->add_option("--channel", channel, "Channel to read from multi-channel files");
  BindGate(denoise, ov);

  auto* embed = app.add_subcommand("embed", "Write an SPKEMB01 embedding file for a directory");
  embed->add_option("--in", in, "WAV directory")->required();
  embed->add_option("--out", out, "Output embedding file")->required();
  embed->add_option("--external", external,
                    "Validate and adopt an externally produced embedding file");
  embed->add_option("--channel", channel, "Channel to read from multi-channel files");
  BindMel(embed, ov);

  auto* evaluate = app.add_subcommand("evaluate", "Score trials and report EER / minDCF");
  evaluate->add_option("--enroll", enroll_emb, "Enrollment embeddings")->required();
  evaluate->add_option("--test", test_emb, "Test embeddings")->required();
  evaluate->add_option("--trials", trials, "Trial list TSV")->required();
  evaluate->add_option("--out", out, "Output directory")->required();
  BindEval(evaluate, ov);

  auto* pipeline = app.add_subcommand("pipeline", "Run every stage under a work directory");
  Bind(pipeline, ov, "--enroll-dir", "enroll_dir", "Enrollment WAV directory");
  Bind(pipeline, ov, "--test-dir", "test_dir", "Test WAV directory");
  Bind(pipeline, ov, "--noise-dir", "noise_dir", "Noise source directory (default: test dir)");
  Bind(pipeline, ov, "--trials", "trials", "Trial list TSV");
  Bind(pipeline, ov, "--work-dir", "work_dir", "Output directory");
  Bind(pipeline, ov, "--embedder", "embedder", "baseline or external");
  Bind(pipeline, ov, "--enroll-embeddings", "enroll_embeddings", "External enrollment embeddings");
  Bind(pipeline, ov, "--test-embeddings", "test_embeddings", "External test embeddings");
  BindSwitch(pipeline, ov, "--denoise-test", "denoise_test", "true",
             "Spectral-gate test audio before embedding");
  BindMine(pipeline, ov);
  BindAugment(pipeline, ov);
  BindGate(pipeline, ov);
  BindMel(pipeline, ov);
  BindEval(pipeline, ov);

  std::string corpus_root;
  std::uint64_t corpus_seed = 1;
  int corpus_speakers = 2;
  auto* corpus = app.add_subcommand("make-corpus", "Generate the synthetic mini-corpus");
  corpus->add_option("--out", corpus_root, "Corpus root directory")->required();
  corpus->add_option("--seed", corpus_seed, "Generator seed");
  corpus->add_option("--speakers", corpus_speakers, "Number of speakers");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  if (corpus->parsed()) {
    return ExitFor(ffsv_make_corpus(corpus_root.c_str(), corpus_seed, corpus_speakers));
  }

  ffsv_config* raw = nullptr;
  ffsv_status st = config_path.empty() ? ffsv_config_create(&raw)
                                       : ffsv_config_load(config_path.c_str(), &raw);
  // An unreadable config file is a configuration problem, not a data one.
  if (st != FFSV_OK) return ExitFor(st) == 0 ? 0 : kExitUsage;
  ConfigPtr config(raw);

  auto set = [&](const std::string& key, const std::string& value) {
    return ffsv_config_set(config.get(), key.c_str(), value.c_str());
  };
  for (const auto& [key, value] : ov.pending) {
    if ((st = set(key, value)) != FFSV_OK) return ExitFor(st);
  }
  for (const auto& kv : sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) {
      std::fprintf(stderr, "ffsv: --set expects key=value, got '%s'\n", kv.c_str());
      return kExitUsage;
    }
    if ((st = set(kv.substr(0, eq), kv.substr(eq + 1))) != FFSV_OK) return ExitFor(st);
  }
  if (!workers.empty() && (st = set("workers", workers)) != FFSV_OK) return ExitFor(st);
  if (!channel.empty()) {
    const char* key = mine->parsed() ? "noise_channel"
                      : denoise->parsed() ? "test_channel"
                                          : "enroll_channel";
    if ((st = set(key, channel)) != FFSV_OK) return ExitFor(st);
  }

  if (mine->parsed()) {
    ffsv_pool_summary s{};
    st = ffsv_stage_mine_noise(config.get(), in.c_str(), out.c_str(), &s);
    if (st == FFSV_OK) {
      std::printf("clips=%zu empty_sources=%zu total_samples=%zu duration_s=%.3f\n",
                  s.clips, s.empty_sources, s.total_samples, s.total_duration_s);
    }
  } else if (augment->parsed()) {
    std::size_t n = 0;
    st = ffsv_stage_augment(config.get(), in.c_str(), pool.c_str(), out.c_str(), &n);
    if (st == FFSV_OK) std::printf("augmented=%zu\n", n);
  } else if (denoise->parsed()) {
    std::size_t n = 0;
    st = ffsv_stage_denoise(config.get(), in.c_str(), out.c_str(), &n);
    if (st == FFSV_OK) std::printf("denoised=%zu\n", n);
  } else if (embed->parsed()) {
    ffsv_embed_summary s{};
    st = ffsv_stage_embed(config.get(), in.c_str(), out.c_str(),
                          external.empty() ? nullptr : external.c_str(), &s);
    if (st == FFSV_OK) {
      std::printf("utterances=%zu records=%zu dim=%zu\n", s.utterances, s.records, s.dim);
    }
  } else if (evaluate->parsed()) {
    ffsv_eval_summary s{};
    st = ffsv_stage_evaluate(config.get(), enroll_emb.c_str(), test_emb.c_str(),
                             trials.c_str(), out.c_str(), &s);
    if (st == FFSV_OK) PrintEval(s);
  } else if (pipeline->parsed()) {
    ffsv_eval_summary s{};
    st = ffsv_run_pipeline(config.get(), &s);
    if (st == FFSV_OK) PrintEval(s);
  }
  return ExitFor(st);
}
