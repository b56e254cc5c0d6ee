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
// Relations are multisets of (input, output) n-bit-string pairs.  A
// relation of size t is encoded on a register (C^N)^t (x) (C^N)^t as the
// normalized sum of all simultaneous permutations of its pair list; states
// of distinct relations are orthonormal.  Registers of varying relation
// size live in a direct sum of (l, r) sectors truncated at a maximum total
// size.

#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "kacpru/common.hpp"
#include "kacpru/kacwalk.hpp"

#include <nlohmann/json_fwd.hpp>

namespace kacpru::relations {

enum class RelationClass { ALL, yDB, DB };

// Canonicalized multiset of (x, y) pairs; pairs kept sorted.
class Relation {
 public:
  Relation() = default;
  Relation(unsigned n, std::vector<std::pair<std::uint32_t, std::uint32_t>> pairs);

  unsigned n() const { return n_; }
  std::size_t size() const { return pairs_.size(); }
  const std::vector<std::pair<std::uint32_t, std::uint32_t>>& pairs() const { return pairs_; }

  // Sorted sets of first / second coordinates and their block closures
  // (a block closure also contains the flipped-first-bit partner of every
  // member).
  const std::vector<std::uint32_t>& dom() const { return dom_; }
  const std::vector<std::uint32_t>& im() const { return im_; }
  const std::vector<std::uint32_t>& bdom() const { return bdom_; }
  const std::vector<std::uint32_t>& bim() const { return bim_; }

  bool dom_contains(std::uint32_t x) const;
  bool im_contains(std::uint32_t y) const;
  bool bdom_contains(std::uint32_t x) const;
  bool bim_contains(std::uint32_t y) const;

  bool x_side_distinct_blocks() const;
  bool y_side_distinct_blocks() const;
  bool in_class(RelationClass c) const;

  Relation with_pair(std::uint32_t x, std::uint32_t y) const;
  static Relation multiset_union(const Relation& a, const Relation& b);

  // Number of times (x, y) occurs.
  std::size_t multiplicity(std::uint32_t x, std::uint32_t y) const;

  bool operator==(const Relation& o) const { return n_ == o.n_ && pairs_ == o.pairs_; }
  bool operator<(const Relation& o) const { return pairs_ < o.pairs_; }

 private:
  unsigned n_ = 0;
  std::vector<std::pair<std::uint32_t, std::uint32_t>> pairs_;
  std::vector<std::uint32_t> dom_, im_, bdom_, bim_;
};

// True iff all suffixes in the tuple are pairwise distinct.
bool is_distinct_blocks(const std::vector<std::uint32_t>& tuple, unsigned n);

// The constant making <R|R> = 1: sqrt(t! * prod over distinct pairs of
// multiplicity!).
double gamma_norm(const Relation& r);

// All canonical relations of size t over {0,1}^n x {0,1}^n in the given
// class.  Guarded: throws resource_error if the count would exceed budget.
std::vector<Relation> enumerate_relations(unsigned n, unsigned t, RelationClass cls,
                                          std::size_t budget = 2'000'000);

// Direct sum of (l, r) relation-register sectors.  Sector (l, r) carries
// the computational space (C^N)^l (x) (C^N)^l (x) (C^N)^r (x) (C^N)^r with
// basis index (((xL * N^l + yL) * N^r + xR) * N^r + yR), tuples big-endian.
// A forward-only register uses sectors (t, 0).
class VarLenLayout {
 public:
  VarLenLayout() = default;
  // All sectors with l + r <= t_max (two-sided), or sectors (t, 0) only
  // (forward).
  VarLenLayout(unsigned n, unsigned t_max, bool forward_only);

  unsigned n() const { return n_; }
  unsigned t_max() const { return t_max_; }
  std::int64_t N() const { return std::int64_t(1) << n_; }
  std::int64_t total_dim() const { return total_dim_; }
  std::size_t sector_count() const { return sectors_.size(); }

  struct Sector {
    unsigned l = 0, r = 0;
    std::int64_t dim = 0;
    std::int64_t offset = 0;
  };
  const std::vector<Sector>& sectors() const { return sectors_; }
  const Sector& sector(unsigned l, unsigned r) const;
  bool has_sector(unsigned l, unsigned r) const;

  // Writes the four tuples of the sector-local index (sizes l, l, r, r).
  void decompose(const Sector& s, std::int64_t local, std::vector<std::uint32_t>& xl,
                 std::vector<std::uint32_t>& yl, std::vector<std::uint32_t>& xr,
                 std::vector<std::uint32_t>& yr) const;
  std::int64_t compose(const Sector& s, const std::vector<std::uint32_t>& xl,
                       const std::vector<std::uint32_t>& yl, const std::vector<std::uint32_t>& xr,
                       const std::vector<std::uint32_t>& yr) const;

 private:
  unsigned n_ = 0, t_max_ = 0;
  bool forward_only_ = false;
  std::int64_t total_dim_ = 0;
  std::vector<Sector> sectors_;
  std::map<std::pair<unsigned, unsigned>, std::size_t> index_;
};

// Sparse vector: list of (global layout index, coefficient).
using SparseVec = std::vector<std::pair<std::int64_t, cxd>>;

// |L> (x) |R> as a sparse vector in the layout; both relation states are
// symmetrized and normalized.
SparseVec relation_pair_state(const VarLenLayout& layout, const Relation& L, const Relation& R);

// Convenience for forward registers: |R> in sector (|R|, 0).
SparseVec relation_state(const VarLenLayout& layout, const Relation& R);

// Diagonal 0/1 mask of the distinct-block projector on the x-tuples of a
// forward register sector t: keeps basis states whose x-tuple is in DB_t.
// Returns the mask over the sector's local indices.
std::vector<bool> db_projector_x_mask(const VarLenLayout& layout, unsigned t);

nlohmann::json relation_to_json(const Relation& r);
Relation relation_from_json(unsigned n, const nlohmann::json& j);

}  // namespace kacpru::relations
