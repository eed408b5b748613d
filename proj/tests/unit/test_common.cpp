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

#include <atomic>
#include <cmath>
#include <set>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "ffsv/common.hpp"
#include "support/test_util.hpp"

namespace ffsv {
namespace {

TEST_CASE("Fnv1a64 matches published test vectors") {
  CHECK(Fnv1a64("") == 0xcbf29ce484222325ULL);
  CHECK(Fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
  CHECK(Fnv1a64("foobar") == 0x85944171f73967e8ULL);
}

TEST_CASE("Hash64 separates seeds and keys") {
  CHECK(Hash64(0, "a") == Hash64(0, "a"));
  CHECK(Hash64(0, "a") != Hash64(1, "a"));
  CHECK(Hash64(0, "a") != Hash64(0, "b"));
}

TEST_CASE("Rng streams are reproducible and in range") {
  Rng a(42), b(42), c(43);
  bool differs = false;
  for (int i = 0; i < 1000; ++i) {
    const auto x = a.NextU64();
    CHECK(x == b.NextU64());
    differs = differs || x != c.NextU64();
  }
  CHECK(differs);

  Rng r(7);
  std::vector<int> hist(5, 0);
  for (int i = 0; i < 5000; ++i) {
    const double u = r.Uniform();
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
    const auto k = r.Below(5);
    REQUIRE(k < 5);
    ++hist[k];
  }
  for (int h : hist) CHECK(h > 800);
  CHECK(r.Below(1) == 0);
}

TEST_CASE("Rng Gaussian has roughly unit moments") {
  Rng r(3);
  double sum = 0.0, sq = 0.0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    const double g = r.Gaussian();
    sum += g;
    sq += g * g;
  }
  CHECK(std::abs(sum / n) < 0.05);
  CHECK(std::abs(sq / n - 1.0) < 0.05);
}

TEST_CASE("ParallelFor visits every index once") {
  for (int workers : {1, 3, 8}) {
    std::vector<std::atomic<int>> seen(97);
    ParallelFor(seen.size(), workers, [&](std::size_t i) { seen[i]++; });
    for (auto& s : seen) CHECK(s.load() == 1);
  }
  ParallelFor(0, 4, [](std::size_t) { FAIL("called on empty range"); });
}

TEST_CASE("ParallelFor rethrows the lowest failing index") {
  for (int workers : {1, 4}) {
    try {
      ParallelFor(50, workers, [](std::size_t i) {
        if (i == 31 || i == 12 || i == 40) throw std::runtime_error(std::to_string(i));
      });
      FAIL("expected an exception");
    } catch (const std::runtime_error& e) {
      CHECK(std::string(e.what()) == "12");
    }
  }
}

TEST_CASE("file helpers round-trip and list WAVs in order") {
  testing::TempDir dir("common");
  WriteFileBytes(dir / "b.WAV", std::string("x\0y", 3));
  WriteFileBytes(dir / "a.wav", "1");
  WriteFileBytes(dir / "c.txt", "2");
  std::filesystem::create_directory(dir / "d.wav");
  CHECK(ReadFileBytes(dir / "b.WAV") == std::string("x\0y", 3));
  const auto files = ListWavFiles(dir.path());
  REQUIRE(files.size() == 2);
  CHECK(files[0].filename() == "a.wav");
  CHECK(files[1].filename() == "b.WAV");
  CHECK_THROWS_AS(ReadFileBytes(dir / "missing"), Error);
  CHECK_THROWS_AS(ListWavFiles(dir / "missing"), Error);
}

TEST_CASE("formatting helpers") {
  CHECK(Hex64(0xabcULL) == "0000000000000abc");
  CHECK(StrFormat("%d-%s-%.2f", 3, "x", 1.5) == "3-x-1.50");
  CHECK(StrFormat("%s", std::string(500, 'q').c_str()).size() == 500);
}

}  // namespace
}  // namespace ffsv
