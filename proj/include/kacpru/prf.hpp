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
//
// Toy keyed stand-ins for the random function table and random permutation
// of each walk step.  These are statistical mixers, NOT cryptographically
// secure primitives; they exist to exercise the keyed-substitution plumbing
// with a deterministic, reproducible walk.

#pragma once

#include <array>
#include <cstdint>
#include <string>

#include "kacpru/kacwalk.hpp"

namespace kacpru::prf {

struct ToyKey {
  std::array<std::uint64_t, 2> words{0, 0};

  static ToyKey from_hex(const std::string& hex);
  std::string to_hex() const;
};

// Deterministic keyed mixing function: 3d output bits for a given
// (suffix, step) input.  Built from iterated 64-bit integer mixing of the
// key words with the inputs.
std::uint64_t keyed_prf(const ToyKey& key, std::uint64_t suffix, std::uint64_t step, unsigned d);

// 4-round Feistel permutation on n-bit strings (near-balanced halves for
// odd n), with keyed_prf round functions.  Exact inverse.
std::uint64_t feistel_prp(const ToyKey& key, std::uint64_t x, std::uint64_t step, unsigned n,
                          bool inverse);

// Same shape as the uniformly sampled walk, but every step's table and
// permutation are derived from the key.
kacwalk::WalkUnitary sample_pseudorandom_walk(const kacwalk::KacParams& params, const ToyKey& key);

}  // namespace kacpru::prf
