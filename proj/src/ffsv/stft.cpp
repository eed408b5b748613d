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

#include "ffsv/stft.hpp"

#include <fftw3.h>

#include <cmath>
#include <cstring>
#include <mutex>
#include <numbers>

#include "ffsv/common.hpp"

namespace ffsv {

namespace {

// FFTW's planner is not thread-safe; execution on distinct plans is.
std::mutex& PlannerMutex() {
  static std::mutex m;
  return m;
}

class RealFft {
 public:
  explicit RealFft(std::size_t n) : n_(n) {
    real_ = fftw_alloc_real(n);
    complex_ = fftw_alloc_complex(n / 2 + 1);
    std::lock_guard lock(PlannerMutex());
    const int len = static_cast<int>(n);
    forward_ = fftw_plan_dft_r2c_1d(len, real_, complex_, FFTW_ESTIMATE);
    inverse_ = fftw_plan_dft_c2r_1d(len, complex_, real_, FFTW_ESTIMATE);
  }
  ~RealFft() {
    {
      std::lock_guard lock(PlannerMutex());
      fftw_destroy_plan(forward_);
      fftw_destroy_plan(inverse_);
    }
    fftw_free(real_);
    fftw_free(complex_);
  }
  RealFft(const RealFft&) = delete;
  RealFft& operator=(const RealFft&) = delete;

  double* time() { return real_; }
  std::complex<double>* freq() {
    return reinterpret_cast<std::complex<double>*>(complex_);
  }
  void Forward() { fftw_execute(forward_); }
  // Unnormalized: the result is scaled by n.
  void Inverse() { fftw_execute(inverse_); }

 private:
  std::size_t n_;
  double* real_ = nullptr;
  fftw_complex* complex_ = nullptr;
  fftw_plan forward_ = nullptr;
  fftw_plan inverse_ = nullptr;
};

std::size_t ReflectIndex(std::ptrdiff_t i, std::size_t len) {
  if (len == 1) return 0;
  const auto n = static_cast<std::ptrdiff_t>(len);
  while (i < 0 || i >= n) {
    if (i < 0) i = -i;
    if (i >= n) i = 2 * (n - 1) - i;
  }
  return static_cast<std::size_t>(i);
}

void CheckGeometry(std::size_t n_fft, std::size_t hop) {
  if (n_fft < 2 || !IsPowerOfTwo(n_fft)) {
    Fail(ErrorKind::kInvalidArgument,
         StrFormat("n_fft must be a power of two >= 2 (got %zu)", n_fft));
  }
  if (hop < 1 || hop > n_fft) {
    Fail(ErrorKind::kInvalidArgument,
         StrFormat("hop must be in [1, n_fft] (got %zu)", hop));
  }
}

}  // namespace

bool IsPowerOfTwo(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

std::vector<double> HannWindow(std::size_t n) {
  std::vector<double> w(n);
  for (std::size_t k = 0; k < n; ++k) {
    w[k] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(k) /
                                static_cast<double>(n));
  }
  return w;
}

Spectrogram Stft(const AudioBuffer& buffer, std::size_t n_fft, std::size_t hop) {
  CheckGeometry(n_fft, hop);
  if (buffer.empty()) Fail(ErrorKind::kData, "STFT of an empty buffer");
  const std::size_t len = buffer.size();
  const auto pad = static_cast<std::ptrdiff_t>(n_fft / 2);

  Spectrogram spec;
  spec.n_fft = n_fft;
  spec.hop = hop;
  spec.bins = n_fft / 2 + 1;
  spec.frames = (len + hop - 1) / hop;
  spec.signal_length = len;
  spec.sample_rate_hz = buffer.sample_rate_hz;
  spec.data.resize(spec.frames * spec.bins);

  const auto window = HannWindow(n_fft);
  RealFft fft(n_fft);
  for (std::size_t t = 0; t < spec.frames; ++t) {
    const auto origin = static_cast<std::ptrdiff_t>(t * hop) - pad;
    double* frame = fft.time();
    for (std::size_t k = 0; k < n_fft; ++k) {
      const std::size_t src =
          ReflectIndex(origin + static_cast<std::ptrdiff_t>(k), len);
      frame[k] = buffer.samples[src] * window[k];
    }
    fft.Forward();
    std::memcpy(&spec.data[t * spec.bins], fft.freq(),
                spec.bins * sizeof(std::complex<double>));
  }
  return spec;
}

AudioBuffer Istft(const Spectrogram& spec) {
  CheckGeometry(spec.n_fft, spec.hop);
  const std::size_t n_fft = spec.n_fft;
  const std::size_t hop = spec.hop;
  if (spec.bins != n_fft / 2 + 1 ||
      spec.frames != (spec.signal_length + hop - 1) / hop ||
      spec.data.size() != spec.frames * spec.bins || spec.signal_length == 0) {
    Fail(ErrorKind::kInvalidArgument, "spectrogram shape does not match its geometry");
  }
  const std::size_t pad = n_fft / 2;
  const std::size_t padded = spec.signal_length + n_fft;
  std::vector<double> acc(padded, 0.0);
  std::vector<double> norm(padded, 0.0);
  const auto window = HannWindow(n_fft);
  const double scale = 1.0 / static_cast<double>(n_fft);

  RealFft fft(n_fft);
  for (std::size_t t = 0; t < spec.frames; ++t) {
    std::memcpy(fft.freq(), &spec.data[t * spec.bins],
                spec.bins * sizeof(std::complex<double>));
    // c2r ignores the imaginary parts of DC and Nyquist; zero them so the
    // result does not depend on them.
    fft.freq()[0].imag(0.0);
    fft.freq()[spec.bins - 1].imag(0.0);
    fft.Inverse();
    const double* frame = fft.time();
    const std::size_t base = t * hop;
    for (std::size_t k = 0; k < n_fft; ++k) {
      acc[base + k] += frame[k] * scale * window[k];
      norm[base + k] += window[k] * window[k];
    }
  }

  AudioBuffer out;
  out.sample_rate_hz = spec.sample_rate_hz;
  out.samples.resize(spec.signal_length);
  for (std::size_t i = 0; i < spec.signal_length; ++i) {
    const double w = norm[i + pad];
    out.samples[i] = w > 1e-10 ? acc[i + pad] / w : 0.0;
  }
  return out;
}

}  // namespace ffsv
