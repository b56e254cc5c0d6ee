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

#include "kacpru/prf.hpp"

#include <sstream>

#include "kacpru/rng.hpp"

namespace kacpru::prf {

ToyKey ToyKey::from_hex(const std::string& hex) {
  if (hex.size() > 32) throw usage_error("ToyKey: hex key longer than 128 bits");
  std::string padded(32 - hex.size(), '0');
  padded += hex;
  ToyKey k;
  k.words[0] = std::stoull(padded.substr(0, 16), nullptr, 16);
  k.words[1] = std::stoull(padded.substr(16, 16), nullptr, 16);
  return k;
}

std::string ToyKey::to_hex() const {
  std::ostringstream os;
  os << std::hex;
  os.width(16);
  os.fill('0');
  os << words[0];
  os.width(16);
  os.fill('0');
  os << words[1];
  return os.str();
}

namespace {
// two rounds of splitmix-style mixing keyed by both key words
std::uint64_t mix(const ToyKey& key, std::uint64_t a, std::uint64_t b, std::uint64_t c) {
  std::uint64_t h = key.words[0];
  h = splitmix64(h ^ (a * 0x9E3779B97F4A7C15ULL));
  h = splitmix64(h ^ (b * 0xC2B2AE3D27D4EB4FULL));
  h = splitmix64(h ^ (c * 0x165667B19E3779F9ULL));
  h = splitmix64(h ^ key.words[1]);
  return h;
}
}  // namespace

std::uint64_t keyed_prf(const ToyKey& key, std::uint64_t suffix, std::uint64_t step, unsigned d) {
  const unsigned bits = 3 * d;
  if (bits > 63) throw usage_error("keyed_prf: 3d must fit in 63 bits");
  std::uint64_t out = mix(key, suffix, step, 0x5F);
  return out >> (64 - bits);
}

std::uint64_t feistel_prp(const ToyKey& key, std::uint64_t x, std::uint64_t step, unsigned n,
                          bool inverse) {
  if (n < 2) throw usage_error("feistel_prp: n must be >= 2");
  const unsigned rounds = 4;
  // near-balanced halves; half sizes alternate each round, restoring after
  // an even number of rounds
  unsigned a_bits = (n + 1) / 2, b_bits = n / 2;
  std::uint64_t left = x >> b_bits;
  std::uint64_t right = x & ((std::uint64_t(1) << b_bits) - 1);
  if (!inverse) {
    for (unsigned round = 0; round < rounds; ++round) {
      std::uint64_t f = mix(key, right, step * 8 + round, 0xFE) & ((std::uint64_t(1) << a_bits) - 1);
      std::uint64_t new_left = right;
      std::uint64_t new_right = left ^ f;
      left = new_left;
      right = new_right;
      std::swap(a_bits, b_bits);
    }
  } else {
    for (unsigned round = rounds; round-- > 0;) {
      std::swap(a_bits, b_bits);
      // undo (L, R) -> (R, L ^ F(R)): old R = L', old L = R' ^ F(L')
      std::uint64_t f = mix(key, left, step * 8 + round, 0xFE) & ((std::uint64_t(1) << a_bits) - 1);
      std::uint64_t old_left = right ^ f;
      std::uint64_t old_right = left;
      left = old_left;
      right = old_right;
    }
  }
  return (left << b_bits) | right;
}

kacwalk::WalkUnitary sample_pseudorandom_walk(const kacwalk::KacParams& params, const ToyKey& key) {
  params.validate();
  kacwalk::WalkUnitary w;
  w.n = params.n;
  w.d = params.d;
  const std::uint64_t suffixes = std::uint64_t(1) << (params.n - 1);
  const std::uint64_t N = std::uint64_t(1) << params.n;
  for (unsigned step = 0; step < params.T; ++step) {
    kacwalk::FunctionTable f;
    f.n = params.n;
    f.d = params.d;
    for (std::uint64_t s = 0; s < suffixes; ++s)
      f.table.push_back(keyed_prf(key, s, step, params.d));
    kacwalk::Permutation sigma;
    sigma.image.resize(static_cast<std::size_t>(N));
    for (std::uint64_t x = 0; x < N; ++x)
      sigma.image[x] = static_cast<std::uint32_t>(feistel_prp(key, x, step, params.n, false));
    if (!sigma.is_bijection()) throw contract_violation("pseudorandom walk: sigma not a bijection");
    w.steps.emplace_back(std::move(f), std::move(sigma));
  }
  return w;
}

}  // namespace kacpru::prf
