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
// One step of the parallel Kac's walk pairs all N basis states by suffix
// (after a uniformly random basis permutation) and applies an independent
// 2x2 rotation to every pair.  Index convention is big-endian throughout:
// the bit string b1..bn maps to sum b_i 2^(n-i), so flipping the first bit
// toggles N/2 and a block {0y, 1y} occupies indices {y, y + N/2}.

#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "kacpru/numerics.hpp"
#include "kacpru/rng.hpp"

#include <nlohmann/json_fwd.hpp>

namespace kacpru::kacwalk {

using numerics::Mat;
using numerics::Vec;

// ---- bit-string utilities (on packed big-endian indices) ----

// val("b1..bk") = sum 2^-i b_i, first bit most significant.
double val_bits(const std::string& bits);
// val of the low `k` bits of x, read as a k-bit big-endian string.
double val_index(std::uint64_t x, unsigned k);

inline std::uint64_t flip_first_bit(std::uint64_t x, unsigned n) {
  return x ^ (std::uint64_t(1) << (n - 1));
}
inline std::uint64_t suffix_of(std::uint64_t x, unsigned n) {
  return x & ((std::uint64_t(1) << (n - 1)) - 1);
}
inline bool same_block(std::uint64_t x, std::uint64_t z, unsigned n) {
  return suffix_of(x, n) == suffix_of(z, n);
}

std::string to_bits(std::uint64_t x, unsigned n);
std::uint64_t from_bits(const std::string& bits);

// ---- domain types ----

// f : {0,1}^(n-1) -> {0,1}^(3d), stored as packed 3d-bit entries indexed by
// suffix.  Entry layout: alpha bits, then beta bits, then theta bits, most
// significant first.
struct FunctionTable {
  unsigned n = 0;
  unsigned d = 0;
  std::vector<std::uint64_t> table;  // size 2^(n-1), entries < 2^(3d)

  std::uint64_t entry(std::uint64_t suffix) const { return table[suffix]; }
};

struct Permutation {
  std::vector<std::uint32_t> image;  // image[x] = sigma(x)

  bool is_bijection() const;
  Permutation inverse() const;
  std::size_t size() const { return image.size(); }
};

struct KacParams {
  unsigned n = 2;
  unsigned d = 2;
  unsigned T = 0;

  void validate() const;
  // d = min(5n, 8) keeps function tables small at desk scale.
  static unsigned default_walk_d(unsigned n) { return std::min(5u * n, 8u); }
};

// An ordered list of (f, sigma) steps; step i applies P_sigma_i then H_f_i.
struct WalkUnitary {
  unsigned n = 0;
  unsigned d = 0;
  std::vector<std::pair<FunctionTable, Permutation>> steps;

  unsigned T() const { return static_cast<unsigned>(steps.size()); }
};

struct Angles {
  double alpha = 0.0;
  double beta = 0.0;
  double theta = 0.0;
};

// ---- operations ----

// Parses a 3d-bit entry as f_alpha || f_beta || f_theta and returns
// theta = arcsin(sqrt(val(f_theta))), alpha = 2 pi val(f_alpha),
// beta = 2 pi val(f_beta).
Angles angles_from_entry(std::uint64_t entry, unsigned d);

// [[e^{ia} cos t, -e^{ib} sin t], [e^{-ib} sin t, e^{-ia} cos t]]
Mat rotation_u(double alpha, double beta, double theta);

// Applies H_f in place: for each suffix y the 2x2 rotation acts on the
// amplitude pair (0y, 1y).  O(N).
void apply_hf(Vec& state, const FunctionTable& f);
// Applies P_sigma (amplitude at sigma(x) = input amplitude at x), or its
// inverse.  O(N).
void apply_perm(Vec& state, const Permutation& sigma, bool inverse);

// Applies the full walk (or its adjoint, which reverses the steps and
// inverts each one).
void apply_walk(Vec& state, const WalkUnitary& walk, bool adjoint = false);

FunctionTable sample_function(unsigned n, unsigned d, RngStream& rng);
Permutation sample_permutation(unsigned n, RngStream& rng);
WalkUnitary sample_walk(const KacParams& params, RngStream& rng);

// Dense N x N matrix of the composed walk; refuses N beyond the cap.
Mat compose_dense(const WalkUnitary& walk, std::int64_t dense_cap = 256);
Mat dense_hf(const FunctionTable& f);
Mat dense_perm(const Permutation& sigma);

// JSON round-trip: {n, d, T, steps: [{f: [hex...], sigma: [ints]}]}.
nlohmann::json walk_to_json(const WalkUnitary& walk);
WalkUnitary walk_from_json(const nlohmann::json& j);

}  // namespace kacpru::kacwalk
