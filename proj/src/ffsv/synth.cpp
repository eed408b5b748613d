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

#include "ffsv/synth.hpp"

#include <cmath>
#include <numbers>

namespace ffsv {

namespace fs = std::filesystem;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

struct Voice {
  double f0;
  double formants[3];
  double bandwidths[3];
};

Voice VoiceFor(int speaker) {
  // Spread pitch and formants so that speakers differ in spectral envelope.
  const double k = static_cast<double>(speaker);
  Voice v;
  v.f0 = 110.0 + 37.0 * std::fmod(k * 1.7, 5.0);
  v.formants[0] = 450.0 + 90.0 * std::fmod(k * 2.3, 4.0);
  v.formants[1] = 1200.0 + 260.0 * std::fmod(k * 3.1, 5.0);
  v.formants[2] = 2500.0 + 300.0 * std::fmod(k * 1.3, 3.0);
  v.bandwidths[0] = 90.0;
  v.bandwidths[1] = 140.0;
  v.bandwidths[2] = 220.0;
  return v;
}

void Normalize(std::vector<double>& x, double target_rms) {
  double sum = 0.0;
  for (double v : x) sum += v * v;
  if (sum <= 0.0) return;
  const double g = target_rms / std::sqrt(sum / static_cast<double>(x.size()));
  for (double& v : x) v *= g;
}

}  // namespace

std::vector<double> SynthSpeech(int speaker, std::size_t length,
                                std::uint32_t sample_rate_hz, Rng& rng) {
  const Voice voice = VoiceFor(speaker);
  const double sr = sample_rate_hz;
  const double nyquist = sr / 2.0;
  std::vector<double> out(length, 0.0);

  // Syllable envelope: 120-260 ms bursts separated by 40-110 ms pauses.
  std::vector<double> env(length, 0.0);
  std::size_t pos = static_cast<std::size_t>(sr * 0.02);
  while (pos < length) {
    const auto syl = static_cast<std::size_t>(sr * (0.12 + 0.14 * rng.Uniform()));
    const auto gap = static_cast<std::size_t>(sr * (0.04 + 0.07 * rng.Uniform()));
    for (std::size_t i = 0; i < syl && pos + i < length; ++i) {
      env[pos + i] = std::sin(std::numbers::pi * static_cast<double>(i) /
                              static_cast<double>(syl));
    }
    pos += syl + gap;
  }

  const double f0 = voice.f0 * (1.0 + 0.03 * (rng.Uniform() - 0.5));
  const double vibrato_hz = 4.0 + 2.0 * rng.Uniform();
  const int harmonics = static_cast<int>(nyquist * 0.9 / f0);
  std::vector<double> amp(harmonics + 1, 0.0);
  std::vector<double> phase(harmonics + 1, 0.0);
  for (int h = 1; h <= harmonics; ++h) {
    const double f = h * f0;
    double a = 0.0;
    for (int k = 0; k < 3; ++k) {
      const double d = (f - voice.formants[k]) / voice.bandwidths[k];
      a += std::exp(-0.5 * d * d) / (1.0 + k);
    }
    amp[h] = a / std::sqrt(static_cast<double>(h));
    phase[h] = kTwoPi * rng.Uniform();
  }
  double theta = 0.0;
  for (std::size_t i = 0; i < length; ++i) {
    const double t = static_cast<double>(i) / sr;
    const double inst_f0 = f0 * (1.0 + 0.01 * std::sin(kTwoPi * vibrato_hz * t));
    theta += kTwoPi * inst_f0 / sr;
    double s = 0.0;
    for (int h = 1; h <= harmonics; ++h) s += amp[h] * std::sin(h * theta + phase[h]);
    out[i] = s * env[i];
  }
  Normalize(out, 1.0);
  return out;
}

std::vector<double> SynthFarFieldNoise(std::size_t length,
                                       std::uint32_t sample_rate_hz, Rng& rng) {
  const double sr = sample_rate_hz;
  std::vector<double> out(length, 0.0);
  // Low-frequency rumble: white noise through two one-pole low-pass stages.
  const double a = std::exp(-kTwoPi * 250.0 / sr);
  double y1 = 0.0, y2 = 0.0;
  // Motor hum with a few harmonics.
  const double hum = 95.0 + 10.0 * rng.Uniform();
  const double hum_phase = kTwoPi * rng.Uniform();
  for (std::size_t i = 0; i < length; ++i) {
    y1 = a * y1 + (1.0 - a) * rng.Gaussian();
    y2 = a * y2 + (1.0 - a) * y1;
    const double t = static_cast<double>(i) / sr;
    const double h = std::sin(kTwoPi * hum * t + hum_phase) +
                     0.5 * std::sin(2.0 * (kTwoPi * hum * t + hum_phase)) +
                     0.25 * std::sin(3.0 * (kTwoPi * hum * t + hum_phase));
    out[i] = 40.0 * y2 + 0.15 * h;
  }
  Normalize(out, 1.0);
  return out;
}

CorpusLayout MakeSyntheticCorpus(const fs::path& root, const CorpusOptions& o) {
  if (o.speakers < 1 || o.enroll_per_speaker < 1 || o.test_per_speaker < 1) {
    Fail(ErrorKind::kInvalidArgument, "corpus needs at least one file per role");
  }
  CorpusLayout layout{root / "enroll", root / "test", root / "trials.tsv"};
  std::error_code ec;
  fs::create_directories(layout.enroll_dir, ec);
  fs::create_directories(layout.test_dir, ec);
  if (ec) Fail(ErrorKind::kIo, "cannot create corpus under " + root.string());

  const double sr = o.sample_rate_hz;
  std::vector<std::string> test_ids;
  std::vector<int> test_speaker;
  for (int s = 1; s <= o.speakers; ++s) {
    for (int e = 0; e < o.enroll_per_speaker; ++e) {
      const std::string id = StrFormat("spk_%d-enroll_%d", s, e);
      Rng rng(Hash64(o.seed, id));
      const auto n = static_cast<std::size_t>(sr * o.enroll_seconds);
      AudioBuffer b;
      b.sample_rate_hz = o.sample_rate_hz;
      b.samples = SynthSpeech(s, n, o.sample_rate_hz, rng);
      for (double& v : b.samples) v = v * o.speech_rms + o.close_noise_rms * rng.Gaussian();
      WriteWav(b, layout.enroll_dir / (id + ".wav"));
    }
    for (int t = 0; t < o.test_per_speaker; ++t) {
      const std::string id = StrFormat("spk_%d-test_%d", s, t);
      Rng rng(Hash64(o.seed, id));
      const auto pad = static_cast<std::size_t>(sr * o.test_pad_seconds);
      const auto speech_n = static_cast<std::size_t>(sr * o.test_speech_seconds);
      const std::size_t n = 2 * pad + speech_n;
      const auto speech = SynthSpeech(s, speech_n, o.sample_rate_hz, rng);
      const auto noise = SynthFarFieldNoise(n, o.sample_rate_hz, rng);
      AudioBuffer b;
      b.sample_rate_hz = o.sample_rate_hz;
      b.samples.resize(n);
      for (std::size_t i = 0; i < n; ++i) {
        double v = o.far_noise_rms * noise[i];
        if (i >= pad && i < pad + speech_n) {
          v += o.speech_rms * o.far_speech_gain * speech[i - pad];
        }
        b.samples[i] = v;
      }
      WriteWav(b, layout.test_dir / (id + ".wav"));
      test_ids.push_back(id);
      test_speaker.push_back(s);
    }
  }

  std::string trials;
  for (int s = 1; s <= o.speakers; ++s) {
    for (std::size_t t = 0; t < test_ids.size(); ++t) {
      trials += StrFormat("spk_%d\t%s\t%s\n", s, test_ids[t].c_str(),
                          test_speaker[t] == s ? "target" : "nontarget");
    }
  }
  WriteFileBytes(layout.trials, trials);
  return layout;
}

}  // namespace ffsv
