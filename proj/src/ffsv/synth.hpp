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

#ifndef FFSV_SYNTH_HPP_
#define FFSV_SYNTH_HPP_

#include <cstdint>
#include <filesystem>
#include <vector>

#include "ffsv/audio_io.hpp"
#include "ffsv/common.hpp"

namespace ffsv {

// Desk-scale stand-in for a close-talk / far-field corpus. Each speaker is a
// harmonic source with its own pitch and formant set. Enrollment files are
// clean; test files embed the same kind of speech, attenuated, in a
// continuous far-field noise bed with noise-only lead-in and tail.
struct CorpusOptions {
  std::uint64_t seed = 1;
  std::uint32_t sample_rate_hz = 16000;
  int speakers = 2;
  int enroll_per_speaker = 3;
  int test_per_speaker = 4;
  double enroll_seconds = 1.5;
  double test_speech_seconds = 1.5;
  double test_pad_seconds = 0.5;
  double speech_rms = 0.1;
  double far_speech_gain = 0.5;
  double far_noise_rms = 0.09;
  double close_noise_rms = 3e-4;
};

struct CorpusLayout {
  std::filesystem::path enroll_dir;
  std::filesystem::path test_dir;
  std::filesystem::path trials;
};

// Writes <root>/enroll/*.wav, <root>/test/*.wav and <root>/trials.tsv (every
// speaker against every test file, labeled). File stems follow
// spk_<n>-<kind>_<index>.
CorpusLayout MakeSyntheticCorpus(const std::filesystem::path& root,
                                 const CorpusOptions& options);

// Building blocks, exposed for tests.
std::vector<double> SynthSpeech(int speaker, std::size_t length,
                                std::uint32_t sample_rate_hz, Rng& rng);
std::vector<double> SynthFarFieldNoise(std::size_t length,
                                       std::uint32_t sample_rate_hz, Rng& rng);

}  // namespace ffsv

#endif  // FFSV_SYNTH_HPP_
