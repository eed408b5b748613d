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

#ifndef FFSV_COMMON_HPP_
#define FFSV_COMMON_HPP_

#include <cstdint>
#include <filesystem>
#include <functional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace ffsv {

inline constexpr const char* kVersion = "0.1.0";

enum class ErrorKind {
  kInvalidArgument,  // bad options or configuration
  kIo,               // file system failures
  kFormat,           // malformed file contents
  kData,             // well-formed inputs that cannot be processed
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void Fail(ErrorKind kind, const std::string& what) {
  throw Error(kind, what);
}

// 64-bit FNV-1a.
std::uint64_t Fnv1a64(std::string_view bytes,
                      std::uint64_t basis = 0xcbf29ce484222325ULL);

// Stable seed mixing used for per-file generators.
std::uint64_t Hash64(std::uint64_t seed, std::string_view key);

// Deterministic generator; the output stream is fixed across platforms.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}
  std::uint64_t NextU64();
  // Uniform in [0, 1).
  double Uniform();
  // Uniform integer in [0, n).
  std::uint64_t Below(std::uint64_t n);
  double Gaussian();

 private:
  std::uint64_t state_;
};

// Runs fn(i) for i in [0, n) on up to `workers` threads. Exceptions are
// collected and the one with the lowest index rethrown.
void ParallelFor(std::size_t n, int workers,
                 const std::function<void(std::size_t)>& fn);

// Sorted list of *.wav files (case-insensitive extension) in a directory.
std::vector<std::filesystem::path> ListWavFiles(
    const std::filesystem::path& dir);

std::string ReadFileBytes(const std::filesystem::path& path);
// Writes to a temporary sibling and renames over the destination.
void WriteFileBytes(const std::filesystem::path& path, std::string_view bytes);

std::string Hex64(std::uint64_t v);

// printf-style formatting into std::string.
std::string StrFormat(const char* fmt, ...)
    __attribute__((format(printf, 1, 2)));

}  // namespace ffsv

#endif  // FFSV_COMMON_HPP_
