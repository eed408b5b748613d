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

#include "ffsv/ffsv.h"

#include <cmath>
#include <exception>
#include <memory>
#include <optional>
#include <new>
#include <string>

#include "ffsv/audio_io.hpp"
#include "ffsv/augmentation.hpp"
#include "ffsv/common.hpp"
#include "ffsv/denoise.hpp"
#include "ffsv/embeddings.hpp"
#include "ffsv/noise_extraction.hpp"
#include "ffsv/pipeline.hpp"
#include "ffsv/scoring.hpp"
#include "ffsv/synth.hpp"

struct ffsv_audio {
  ffsv::AudioBuffer buffer;
};

struct ffsv_embedding_set {
  ffsv::EmbeddingSet set;
  // Index view over the id-ordered map, rebuilt on mutation.
  std::vector<const ffsv::Embedding*> index;

  void Reindex() {
    index.clear();
    for (const auto& [id, e] : set) index.push_back(&e);
  }
};

struct ffsv_config {
  ffsv::RunConfig config;
};

namespace {

thread_local std::string g_last_error;

ffsv_status SetError(ffsv_status status, const char* what) {
  g_last_error = what;
  return status;
}

ffsv_status StatusOf(ffsv::ErrorKind kind) {
  switch (kind) {
    case ffsv::ErrorKind::kInvalidArgument: return FFSV_E_INVALID_ARGUMENT;
    case ffsv::ErrorKind::kIo: return FFSV_E_IO;
    case ffsv::ErrorKind::kFormat: return FFSV_E_FORMAT;
    case ffsv::ErrorKind::kData: return FFSV_E_DATA;
  }
  return FFSV_E_INTERNAL;
}

template <typename Fn>
ffsv_status Guard(Fn&& fn) noexcept {
  try {
    fn();
    return FFSV_OK;
  } catch (const ffsv::Error& e) {
    return SetError(StatusOf(e.kind()), e.what());
  } catch (const std::bad_alloc&) {
    return SetError(FFSV_E_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return SetError(FFSV_E_INTERNAL, e.what());
  } catch (...) {
    return SetError(FFSV_E_INTERNAL, "unknown error");
  }
}

void Require(bool ok, const char* what) {
  if (!ok) ffsv::Fail(ffsv::ErrorKind::kInvalidArgument, what);
}

std::optional<int> ChannelArg(int channel) {
  if (channel < 0) return std::nullopt;
  return channel;
}

ffsv::LabeledScores LabeledFrom(const double* scores, const int* labels,
                                size_t count, int similarity) {
  Require(count == 0 || (scores && labels), "scores and labels are required");
  ffsv::LabeledScores out;
  const double sign = similarity ? 1.0 : -1.0;
  for (size_t i = 0; i < count; ++i) {
    if (!std::isfinite(scores[i])) ffsv::Fail(ffsv::ErrorKind::kData, "non-finite score");
    (labels[i] ? out.target : out.nontarget).push_back(sign * scores[i]);
  }
  return out;
}

}  // namespace

extern "C" {

const char* ffsv_version(void) { return ffsv::kVersion; }

const char* ffsv_last_error(void) { return g_last_error.c_str(); }

const char* ffsv_status_name(ffsv_status status) {
  switch (status) {
    case FFSV_OK: return "ok";
    case FFSV_E_INVALID_ARGUMENT: return "invalid argument";
    case FFSV_E_IO: return "i/o error";
    case FFSV_E_FORMAT: return "format error";
    case FFSV_E_DATA: return "data error";
    case FFSV_E_INTERNAL: return "internal error";
  }
  return "unknown status";
}

ffsv_status ffsv_audio_read_wav(const char* path, int channel, ffsv_audio** out) {
  return Guard([&] {
    Require(path && out, "path and out are required");
    auto audio = std::make_unique<ffsv_audio>();
    audio->buffer = ffsv::ReadWav(path, ChannelArg(channel));
    *out = audio.release();
  });
}

ffsv_status ffsv_audio_from_samples(const double* samples, size_t count,
                                    uint32_t sample_rate_hz, ffsv_audio** out) {
  return Guard([&] {
    Require(out && (samples || count == 0), "samples and out are required");
    auto audio = std::make_unique<ffsv_audio>();
    audio->buffer.samples.assign(samples, samples + count);
    audio->buffer.sample_rate_hz = sample_rate_hz;
    ffsv::ValidateAudio(audio->buffer);
    *out = audio.release();
  });
}

ffsv_status ffsv_audio_write_wav(const ffsv_audio* audio, const char* path) {
  return Guard([&] {
    Require(audio && path, "audio and path are required");
    ffsv::WriteWav(audio->buffer, path);
  });
}

size_t ffsv_audio_length(const ffsv_audio* audio) {
  return audio ? audio->buffer.size() : 0;
}

uint32_t ffsv_audio_sample_rate(const ffsv_audio* audio) {
  return audio ? audio->buffer.sample_rate_hz : 0;
}

const double* ffsv_audio_samples(const ffsv_audio* audio) {
  return audio ? audio->buffer.samples.data() : nullptr;
}

void ffsv_audio_free(ffsv_audio* audio) { delete audio; }

ffsv_status ffsv_detect_activity(const ffsv_audio* audio, double threshold_db,
                                 size_t frame_len, size_t hop, size_t* starts,
                                 size_t* ends, size_t capacity, size_t* count) {
  return Guard([&] {
    Require(audio && count, "audio and count are required");
    const auto intervals =
        ffsv::DetectActivity(audio->buffer, {threshold_db, frame_len, hop});
    *count = intervals.size();
    if (intervals.size() > capacity) {
      if (capacity == 0) return;
      ffsv::Fail(ffsv::ErrorKind::kInvalidArgument, "interval buffer too small");
    }
    Require(intervals.empty() || (starts && ends), "starts and ends are required");
    for (size_t i = 0; i < intervals.size(); ++i) {
      starts[i] = intervals[i].start;
      ends[i] = intervals[i].end;
    }
  });
}

ffsv_status ffsv_mix_at_snr(const ffsv_audio* clean, const ffsv_audio* noise,
                            double target_snr_db, ffsv_audio** out, double* gain,
                            double* rescale) {
  return Guard([&] {
    Require(clean && noise && out, "clean, noise and out are required");
    ffsv::MixResult mix = ffsv::MixAtSnr(clean->buffer, noise->buffer, target_snr_db);
    auto audio = std::make_unique<ffsv_audio>();
    audio->buffer = std::move(mix.mixture);
    if (gain) *gain = mix.gain;
    if (rescale) *rescale = mix.rescale;
    *out = audio.release();
  });
}

void ffsv_gate_options_default(ffsv_gate_options* options) {
  if (!options) return;
  const ffsv::GateConfig d;
  *options = {d.prop_decrease, d.n_std_thresh, d.stationary ? 1 : 0, d.n_fft,
              d.hop, d.smooth_frames, d.smooth_bins, d.ema_coeff};
}

ffsv_status ffsv_spectral_gate(const ffsv_audio* audio,
                               const ffsv_gate_options* options, ffsv_audio** out) {
  return Guard([&] {
    Require(audio && options && out, "audio, options and out are required");
    ffsv::GateConfig g;
    g.prop_decrease = options->prop_decrease;
    g.n_std_thresh = options->n_std_thresh;
    g.stationary = options->stationary != 0;
    g.n_fft = options->n_fft;
    g.hop = options->hop;
    g.smooth_frames = options->smooth_frames;
    g.smooth_bins = options->smooth_bins;
    g.ema_coeff = options->ema_coeff;
    auto result = std::make_unique<ffsv_audio>();
    result->buffer = ffsv::SpectralGate(audio->buffer, g);
    *out = result.release();
  });
}

void ffsv_mel_options_default(ffsv_mel_options* options) {
  if (!options) return;
  const ffsv::MelConfig d;
  *options = {d.n_fft, d.hop, d.n_mels, d.f_min, 0.0, d.log_floor};
}

ffsv_status ffsv_baseline_embed(const ffsv_audio* audio,
                                const ffsv_mel_options* options, float* out,
                                size_t capacity, size_t* dim) {
  return Guard([&] {
    Require(audio && options && dim, "audio, options and dim are required");
    ffsv::MelConfig m;
    m.n_fft = options->n_fft;
    m.hop = options->hop;
    m.n_mels = options->n_mels;
    m.f_min = options->f_min;
    if (options->f_max > 0.0) m.f_max = options->f_max;
    m.log_floor = options->log_floor;
    const ffsv::Embedding e = ffsv::BaselineEmbed(audio->buffer, m);
    *dim = e.dim();
    Require(out && capacity >= e.dim(), "output buffer too small");
    std::copy(e.values.begin(), e.values.end(), out);
  });
}

ffsv_status ffsv_embedding_set_create(size_t dim, ffsv_embedding_set** out) {
  return Guard([&] {
    Require(out != nullptr, "out is required");
    auto s = std::make_unique<ffsv_embedding_set>();
    s->set = ffsv::EmbeddingSet(dim);
    *out = s.release();
  });
}

ffsv_status ffsv_embedding_set_add(ffsv_embedding_set* set, const char* id,
                                   const float* values, size_t dim) {
  return Guard([&] {
    Require(set && id && values, "set, id and values are required");
    Require(*id != '\0', "utterance id must not be empty");
    set->set.Add({id, std::vector<float>(values, values + dim)});
    set->Reindex();
  });
}

ffsv_status ffsv_embedding_set_read(const char* path, ffsv_embedding_set** out) {
  return Guard([&] {
    Require(path && out, "path and out are required");
    auto s = std::make_unique<ffsv_embedding_set>();
    s->set = ffsv::ReadEmbeddings(path);
    s->Reindex();
    *out = s.release();
  });
}

ffsv_status ffsv_embedding_set_write(const ffsv_embedding_set* set,
                                     const char* path) {
  return Guard([&] {
    Require(set && path, "set and path are required");
    ffsv::WriteEmbeddings(set->set, path);
  });
}

size_t ffsv_embedding_set_size(const ffsv_embedding_set* set) {
  return set ? set->set.size() : 0;
}

size_t ffsv_embedding_set_dim(const ffsv_embedding_set* set) {
  return set ? set->set.dim() : 0;
}

const char* ffsv_embedding_set_id(const ffsv_embedding_set* set, size_t index) {
  if (!set || index >= set->index.size()) return nullptr;
  return set->index[index]->utterance_id.c_str();
}

const float* ffsv_embedding_set_values(const ffsv_embedding_set* set,
                                       size_t index) {
  if (!set || index >= set->index.size()) return nullptr;
  return set->index[index]->values.data();
}

const float* ffsv_embedding_set_find(const ffsv_embedding_set* set,
                                     const char* utterance_id) {
  if (!set || !utterance_id) return nullptr;
  const ffsv::Embedding* e = set->set.Find(utterance_id);
  return e ? e->values.data() : nullptr;
}

void ffsv_embedding_set_free(ffsv_embedding_set* set) { delete set; }

ffsv_status ffsv_cosine_dissimilarity(const float* a, const float* b, size_t dim,
                                      double* out) {
  return Guard([&] {
    Require(a && b && out, "a, b and out are required");
    *out = ffsv::CosineDissimilarity(std::span(a, dim), std::span(b, dim));
  });
}

ffsv_status ffsv_compute_eer(const double* scores, const int* labels,
                             size_t count, int similarity, double* eer) {
  return Guard([&] {
    Require(eer != nullptr, "eer is required");
    *eer = ffsv::EqualErrorRate(
        ffsv::ComputeDetPoints(LabeledFrom(scores, labels, count, similarity)));
  });
}

ffsv_status ffsv_compute_min_dcf(const double* scores, const int* labels,
                                 size_t count, int similarity, double p_target,
                                 double c_miss, double c_fa, double* min_dcf) {
  return Guard([&] {
    Require(min_dcf != nullptr, "min_dcf is required");
    const ffsv::DcfParams params{p_target, c_miss, c_fa};
    ffsv::ValidateDcfParams(params);
    *min_dcf = ffsv::MinDcf(
        ffsv::ComputeDetPoints(LabeledFrom(scores, labels, count, similarity)),
        params);
  });
}

ffsv_status ffsv_config_create(ffsv_config** out) {
  return Guard([&] {
    Require(out != nullptr, "out is required");
    *out = new ffsv_config();
  });
}

ffsv_status ffsv_config_load(const char* path, ffsv_config** out) {
  return Guard([&] {
    Require(path && out, "path and out are required");
    auto c = std::make_unique<ffsv_config>();
    c->config = ffsv::RunConfig::Load(path);
    *out = c.release();
  });
}

ffsv_status ffsv_config_set(ffsv_config* config, const char* key,
                            const char* value) {
  return Guard([&] {
    Require(config && key && value, "config, key and value are required");
    config->config.Set(key, value);
  });
}

const char* ffsv_config_get(const ffsv_config* config, const char* key) {
  if (!config || !key) return nullptr;
  const auto& defaults = ffsv::RunConfig::Defaults();
  if (!defaults.contains(key)) return nullptr;
  return config->config.Get(key).c_str();
}

void ffsv_config_free(ffsv_config* config) { delete config; }

namespace {

void FillEval(const ffsv::EvalSummary& s, ffsv_eval_summary* out) {
  if (!out) return;
  out->eer = s.report.eer;
  out->min_dcf = s.report.min_dcf;
  out->p_target = s.report.dcf.p_target;
  out->c_miss = s.report.dcf.c_miss;
  out->c_fa = s.report.dcf.c_fa;
  out->n_target = s.report.n_target;
  out->n_nontarget = s.report.n_nontarget;
  out->scored = s.scored;
  out->skipped = s.skipped;
  out->excluded = s.excluded;
}

}  // namespace

ffsv_status ffsv_stage_mine_noise(const ffsv_config* config, const char* in_dir,
                                  const char* out_dir, ffsv_pool_summary* summary) {
  return Guard([&] {
    Require(config && in_dir && out_dir, "config, in_dir and out_dir are required");
    const ffsv::NoisePool pool = ffsv::StageMineNoise(config->config, in_dir, out_dir);
    if (summary) {
      summary->clips = pool.clips.size();
      summary->empty_sources = pool.empty_sources.size();
      summary->total_samples = pool.total_samples();
      summary->total_duration_s = pool.total_duration_s();
      summary->sample_rate_hz = pool.sample_rate_hz;
    }
  });
}

ffsv_status ffsv_stage_augment(const ffsv_config* config, const char* enroll_dir,
                               const char* pool_dir, const char* out_dir,
                               size_t* files) {
  return Guard([&] {
    Require(config && enroll_dir && pool_dir && out_dir,
            "config, enroll_dir, pool_dir and out_dir are required");
    const auto records =
        ffsv::StageAugment(config->config, enroll_dir, pool_dir, out_dir);
    if (files) *files = records.size();
  });
}

ffsv_status ffsv_stage_denoise(const ffsv_config* config, const char* in_dir,
                               const char* out_dir, size_t* files) {
  return Guard([&] {
    Require(config && in_dir && out_dir, "config, in_dir and out_dir are required");
    const size_t n = ffsv::StageDenoise(config->config, in_dir, out_dir);
    if (files) *files = n;
  });
}

ffsv_status ffsv_stage_embed(const ffsv_config* config, const char* in_dir,
                             const char* out_file, const char* external,
                             ffsv_embed_summary* summary) {
  return Guard([&] {
    Require(config && in_dir && out_file, "config, in_dir and out_file are required");
    const ffsv::EmbedSummary s = ffsv::StageEmbed(
        config->config, in_dir, out_file,
        external ? std::filesystem::path(external) : std::filesystem::path());
    if (summary) *summary = {s.utterances, s.records, s.dim};
  });
}

ffsv_status ffsv_stage_evaluate(const ffsv_config* config,
                                const char* enroll_embeddings,
                                const char* test_embeddings, const char* trials,
                                const char* out_dir, ffsv_eval_summary* summary) {
  return Guard([&] {
    Require(config && enroll_embeddings && test_embeddings && trials && out_dir,
            "config, embeddings, trials and out_dir are required");
    FillEval(ffsv::StageEvaluate(config->config, enroll_embeddings,
                                 test_embeddings, trials, out_dir),
             summary);
  });
}

ffsv_status ffsv_run_pipeline(const ffsv_config* config, ffsv_eval_summary* summary) {
  return Guard([&] {
    Require(config != nullptr, "config is required");
    FillEval(ffsv::RunPipeline(config->config), summary);
  });
}

ffsv_status ffsv_make_corpus(const char* root, uint64_t seed, int speakers) {
  return Guard([&] {
    Require(root != nullptr, "root is required");
    ffsv::CorpusOptions o;
    o.seed = seed;
    o.speakers = speakers;
    ffsv::MakeSyntheticCorpus(root, o);
  });
}

}  // extern "C"
