// Copyright 2026 The kacpru Authors.
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

#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace kacpru {

// splitmix64: used only to expand a (master seed, stream id) pair into an
// engine seed, so that independent streams never share state.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// Deterministic random stream.  The engine is std::mt19937_64; all
// distributions are implemented here (Lemire bounded ints, Box-Muller
// normals) so that a given (seed, stream, call sequence) produces the same
// values regardless of the standard library's distribution internals.
// Parallel work derives one stream per task via child(), a counter-based
// split: stream k of seed s is seeded with splitmix64 applied to s twice,
// mixed with k.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : engine_(splitmix64(splitmix64(seed))) {}

  static RngStream child(std::uint64_t master_seed, std::uint64_t stream_id) {
    return RngStream(splitmix64(master_seed) ^ splitmix64(stream_id * 0xA24BAED4963EE407ULL + 1));
  }

  std::uint64_t next_u64() { return engine_(); }

  // Uniform in [0, bound). Lemire's multiply-shift rejection method.
  std::uint64_t uniform_below(std::uint64_t bound) {
    if (bound == 0) return 0;
    while (true) {
      std::uint64_t x = next_u64();
      __uint128_t m = static_cast<__uint128_t>(x) * bound;
      auto lo = static_cast<std::uint64_t>(m);
      if (lo >= bound || lo >= (-bound) % bound) return static_cast<std::uint64_t>(m >> 64);
    }
  }

  // Uniform double in [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // k uniform random bits packed little-endian into a u64, k <= 64.
  std::uint64_t bits(unsigned k) {
    if (k == 0) return 0;
    return next_u64() >> (64 - k);
  }

  // Standard normal via Box-Muller; the spare value is cached.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = 0.0;
    while (u1 == 0.0) u1 = uniform01();
    double u2 = uniform01();
    double r = std::sqrt(-2.0 * std::log(u1));
    spare_ = r * std::sin(6.283185307179586476925287 * u2);
    has_spare_ = true;
    return r * std::cos(6.283185307179586476925287 * u2);
  }

  // In-place Fisher-Yates shuffle; exactly uniform over permutations.
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(uniform_below(i));
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace kacpru
