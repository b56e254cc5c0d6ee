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
// The purified oracle keeps the sampled function table and permutation in
// superposition on environment registers H and P instead of sampling them.
// Its environment states after a sequence of recorded queries live on the
// span of a family of vectors indexed by pairs of relations; a partial
// isometry maps that family onto symbolic relation registers.  Everything
// here is enumerated exactly at small n and d.

#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "kacpru/kacwalk.hpp"
#include "kacpru/numerics.hpp"
#include "kacpru/oracles.hpp"
#include "kacpru/relations.hpp"

namespace kacpru::purified {

using numerics::Mat;
using numerics::Vec;
using relations::Relation;
using relations::VarLenLayout;

// Full enumeration of (f, sigma) pairs.  Basis index = f_index * N! +
// perm_index; the f index packs the 2^(n-1) table entries little-endian in
// blocks of 3d bits (entry for suffix 0 in the lowest bits).
class PurifiedBasis {
 public:
  PurifiedBasis(unsigned n, unsigned d, std::int64_t cap = std::int64_t(1) << 20);

  unsigned n() const { return n_; }
  unsigned d() const { return d_; }
  std::int64_t N() const { return std::int64_t(1) << n_; }
  std::int64_t num_functions() const { return num_functions_; }
  std::int64_t num_perms() const { return static_cast<std::int64_t>(perms_.size()); }
  std::int64_t dim() const { return num_functions_ * num_perms(); }

  const kacwalk::Permutation& perm(std::int64_t p) const { return perms_[static_cast<std::size_t>(p)]; }
  kacwalk::FunctionTable function(std::int64_t f) const;

  // <y| H_f |z>; nonzero only within a block.
  cxd hf_element(std::int64_t f, std::uint32_t y, std::uint32_t z) const;
  // The 2x2 block of H_f on suffix s: rows/cols ordered (0s, 1s).
  const Mat& hf_block(std::int64_t f, std::uint64_t suffix) const;

 private:
  unsigned n_ = 0, d_ = 0;
  std::int64_t num_functions_ = 0;
  std::vector<kacwalk::Permutation> perms_;
  std::vector<Mat> hf_blocks_;  // [f * 2^(n-1) + suffix]
};

// Environment state for recorded forward queries L and inverse queries R:
// amplitude at (f, sigma) is the product over L of <y|H_f|sigma(x)> and
// over R of conj(<y'|H_f|sigma(x')>), normalized by
// 1/sqrt(#functions * (N-l-r)!).
struct PhiState {
  Relation L, R;
  Vec amplitudes;
};
PhiState build_phi(const PurifiedBasis& basis, const Relation& L, const Relation& R);
// Forward-only variant (R empty).
PhiState build_phi_forward(const PurifiedBasis& basis, const Relation& R);

// The enumerated family {phi_(L,R) : L u R distinct-block, |L u R| <= t_max},
// with amplitude vectors cached.
struct PhiFamily {
  std::shared_ptr<const PurifiedBasis> basis;
  unsigned t_max = 0;
  std::vector<std::pair<Relation, Relation>> members;
  std::vector<Vec> vectors;

  std::int64_t index_of(const Relation& L, const Relation& R) const;  // -1 if absent
};
PhiFamily enumerate_phi_family(std::shared_ptr<const PurifiedBasis> basis, unsigned t_max,
                               bool forward_only, std::size_t memory_budget_bytes = std::size_t(512) << 20);

// Applies the purified oracle (or its inverse) on a state over
// A (x) ancilla (x) basis, index ((a * 2^m + anc) * dim + (f, sigma)).
// Block-diagonal over (f, sigma): each slice gets H_f P_sigma on A.
void apply_hpo(Vec& state, const PurifiedBasis& basis, unsigned m_anc, bool inverse);

// Runs a query adversary against the purified oracle, optionally with a
// fixed unitary G on A composed before each (forward) query.  The initial
// environment is the uniform superposition.  State index as in apply_hpo.
Vec run_hpo_adversary(const PurifiedBasis& basis, const oracles::AdversarySpec& spec,
                      const Mat* g_on_a = nullptr);

// Residual of the recorded-query action identity:
//   HPO |x> phi_(L,R)   = 1/sqrt(N-l-r) sum_y |y> phi_(L+(x,y), R)
//   HPO† |y> phi_(L,R)  = 1/sqrt(N-l-r) sum_x |x> phi_(L, R+(x,y))
double check_hpo_action(const PurifiedBasis& basis, const Relation& L, const Relation& R,
                        std::uint32_t queried, bool inverse);

// Partial isometry from the environment onto relation registers:
// sum over the family of |L>|R><phi_(L,R)|.
struct CompressMap {
  std::shared_ptr<const VarLenLayout> layout;  // target relation registers
  PhiFamily family;
  std::vector<relations::SparseVec> targets;  // |L>(x)|R> per member

  // w[ab, lr] = sum_k <phi_k | v_slice(ab)> target_k; v over AB (x) basis.
  Vec apply(const Vec& v, unsigned m_anc) const;
  // v[ab, fs] = sum_k <target_k | w_slice(ab)> phi_k.
  Vec adjoint_apply(const Vec& w, unsigned m_anc) const;
};
CompressMap build_compress(std::shared_ptr<const PurifiedBasis> basis,
                           std::shared_ptr<const VarLenLayout> layout, bool forward_only,
                           unsigned t_max);

struct CompressScalingReport {
  double residual = 0.0;        // || rhs - ratio_formula * lhs ||
  double measured_ratio = 0.0;  // Re <lhs|rhs> / <lhs|lhs>
  double formula_ratio = 0.0;   // sqrt(prod (N-i)/(N-2i))
};
// lhs = Compress . (projector onto size-t family span) . |HPO G run>,
// rhs = (distinct-block x-mask) . |recording-oracle G run>; the runs are
// exactly parallel with rhs = ratio * lhs.
CompressScalingReport check_compress_scaling(const PurifiedBasis& basis,
                                             const oracles::AdversarySpec& spec, const Mat& g_on_a);

struct WHpoReport {
  double norm_gap = 0.0;     // || W_t - Compress HPO Compress† Pi_dom Pi_<=t ||
  double adjoint_gap = 0.0;  // adjoint-side analogue
  double bound = 0.0;        // 2t/(N-t)
  // Amplitude mismatch on the shared recorded-pair support for a fresh
  // input above one recorded pair: 1 - sqrt(1 - k/(N-k)) at k = 1.
  double sector1_coeff_gap = 0.0;
  // Full norm of the same difference column.  Beyond the coefficient gap it
  // carries the cross-direction interference of the environment family
  // (zero only in the continuous-angle limit).
  double sector1_column_norm = 0.0;
};
WHpoReport check_w_hpo_closeness(std::shared_ptr<const PurifiedBasis> basis,
                                 std::shared_ptr<const VarLenLayout> layout, unsigned t);

// Exact single-block moment sums over all 2^(3d) values of one table entry.
struct HfMoments {
  cxd diag;            // E[<x|H|x>]            (top-left element)
  cxd offdiag;         // E[<x|H|xbar>]
  cxd cross;           // E[conj<x|H|x> <x|H|xbar>]
  cxd phase_diag;      // E[conj<x|H|x> <xbar|H|xbar>]
  cxd phase_offdiag;   // E[conj<x|H|xbar> <xbar|H|x>]
};
HfMoments hf_block_moments(unsigned d);

struct DomImReport {
  double dom_residual = 0.0;  // max over sectors of || W†W - decomposition ||_max
  double im_residual = 0.0;
  double ubound_min_eig = 0.0;  // min over sectors of min eig of (RHS - LHS)
};
DomImReport build_dom_im_projectors(std::shared_ptr<const VarLenLayout> layout, unsigned t_max);

// Dense per-sector helpers shared with the experiments module.  `reg` is a
// register position within the sector (0-based over X^l Y^l X^r Y^r).
Mat pairwise_eq_projector(const VarLenLayout& layout, unsigned l, unsigned r, unsigned reg);
Mat pairwise_ffb_projector(const VarLenLayout& layout, unsigned l, unsigned r, unsigned reg);
Mat epr_projector(const VarLenLayout& layout, unsigned l, unsigned r, unsigned reg);

}  // namespace kacpru::purified
