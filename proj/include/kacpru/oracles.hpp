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
// Recording oracles answer a query on register A while appending the
// (input, output) pair to a relation register.  They are stored as sparse
// matrices over A (x) (direct sum of relation sectors), assembled column by
// column from their action on relation-state basis vectors.  An operator
// built with input cap t contains exactly the columns for inputs in
// sectors of total size <= t, so products and adjoints of capped operators
// are exact on the truncation.

#pragma once

#include <Eigen/SparseCore>
#include <cstdint>
#include <functional>
#include <memory>
#include <vector>

#include "kacpru/numerics.hpp"
#include "kacpru/relations.hpp"

namespace kacpru::oracles {

using numerics::Mat;
using numerics::Vec;
using relations::Relation;
using relations::RelationClass;
using relations::VarLenLayout;
using SpMat = Eigen::SparseMatrix<cxd>;

enum class OracleKind { PR, V, VL, VR, W, WL, WR, EL, ER };

struct OracleOperator {
  OracleKind kind;
  std::shared_ptr<const VarLenLayout> layout;
  unsigned input_cap = 0;  // columns present for sector totals <= input_cap
  SpMat m;                 // (N * layout dim) square

  std::int64_t dim() const { return m.rows(); }
};

// ---- projectors and helpers (sparse, exact) ----

// Diagonal projector onto sectors with l + r <= t, on A (x) layout.
SpMat sector_le_projector(const VarLenLayout& layout, unsigned t, bool with_A);
// Diagonal projector onto one sector.
SpMat sector_projector(const VarLenLayout& layout, unsigned l, unsigned r, bool with_A);

// Sum of |L>(x)|R> <L|(x)<R| over relation pairs passing `filter`, sectors
// l + r <= t_cap.  On the layout alone (no A factor).
SpMat relation_pair_projector(const VarLenLayout& layout, unsigned t_cap,
                              const std::function<bool(const Relation&, const Relation&)>& filter);

// Projector with both-sides-distinct-blocks unions: Pi^DB.
SpMat pi_db(const VarLenLayout& layout, unsigned t_cap);
// Projector onto the span of all relation pairs: Pi^(R^2).
SpMat pi_rr2(const VarLenLayout& layout, unsigned t_cap);
// Computational-basis diagonal: joint x-tuples and joint y-tuples each in
// the distinct-block set.
SpMat pi_db_computational(const VarLenLayout& layout, bool with_A);
// Sum over relation pairs and basis x with x not in BDom(L u R) (resp.
// y not in BIm), on A (x) layout.
SpMat pi_not_dom(const VarLenLayout& layout, unsigned t_cap);
SpMat pi_not_im(const VarLenLayout& layout, unsigned t_cap);

SpMat identity_sp(std::int64_t dim);
double frobenius(const SpMat& m);
// I_N (x) m, lifting a layout-space operator to A (x) layout.
SpMat lift_identity_a_public(std::int64_t N, const SpMat& m);
// Dense A (x) sector block of an operator on A (x) layout.
Mat sector_block_with_a(const SpMat& m, const VarLenLayout& lay, unsigned l, unsigned r);

// ---- oracle builders ----

// Path-recording oracle on a forward register.  Nonzero on |x>|R> for R
// with distinct output blocks (any input side); adds (x, y) with amplitude
// 1/sqrt(N - 2|R|) over the y in fresh blocks.  Zero elsewhere.
OracleOperator build_pr(std::shared_ptr<const VarLenLayout> layout, unsigned input_cap);

// Two-sided recording oracles on an (l, r) register.
OracleOperator build_vl(std::shared_ptr<const VarLenLayout> layout, unsigned input_cap);
OracleOperator build_vr(std::shared_ptr<const VarLenLayout> layout, unsigned input_cap);
// V restricted to inputs of total size <= cap, assembled from its two
// branches; requires cap + 1 <= layout t_max.
OracleOperator build_v(std::shared_ptr<const VarLenLayout> layout, unsigned cap);

struct WOperators {
  OracleOperator W;   // W restricted to inputs <= cap
  OracleOperator WL;  // W^L with columns <= cap
  OracleOperator WR;  // W^R with columns <= cap
};
WOperators build_w(std::shared_ptr<const VarLenLayout> layout, unsigned cap);

OracleOperator build_el(std::shared_ptr<const VarLenLayout> layout, unsigned input_cap);
OracleOperator build_er(std::shared_ptr<const VarLenLayout> layout, unsigned input_cap);

// ---- adversary harness ----

struct AdversarySpec {
  unsigned t = 0;                  // query count
  unsigned m = 2;                  // ancilla qubits
  std::vector<std::uint8_t> b;     // direction bits (0 forward, 1 inverse); empty = all forward
  std::uint64_t seed = 1;          // A_i are Haar on A (x) B from child streams of this seed
  std::vector<Mat> explicit_a;     // optional override (size t)

  Mat interleaving_unitary(unsigned i, std::int64_t N) const;  // i in [0, t)
  bool forward_only() const;
};

// Runs the adversary against a dense unitary oracle on A.  Returns the
// final AB state (index a * 2^m + anc).
Vec run_adversary_unitary(const Mat& oracle, const AdversarySpec& spec);

// Runs against a recording oracle.  State index ((a * D + rel) * 2^m + anc);
// initial state |0^n 0^m>|{}>|{}>.  G, when given, is applied on A before
// each oracle call (and its adjoint after inverse calls' oracle adjoint --
// i.e. each query applies (O G)^(+-1)).
Vec run_adversary_recording(const OracleOperator& oracle, const AdversarySpec& spec,
                            const Mat* g_on_a = nullptr);

// Closed-form forward-only path-recording state: the sum over input tuples
// and fresh-block output tuples of weighted relation states.  Matches
// run_adversary_recording(PR, ...) exactly.
Vec actofpr_closed_form(const VarLenLayout& layout, const AdversarySpec& spec, const Mat* g_on_a);

// Applies G to each X register of forward sector t (A and ancilla are
// spectators).  Used by the right-invariance identity.
void apply_g_on_x_registers(Vec& state, const VarLenLayout& layout, unsigned t, const Mat& g,
                            unsigned m_anc);

// ---- identity checks ----

struct ResidualReport {
  double value = 0.0;  // residual (norm) of the identity
  double scale = 1.0;  // norm of the checked object, for context
};

// || |A_t^{PR G}> - G^(x)t_X |A_t^{PR}> ||_2
ResidualReport check_right_invariance(const Mat& g_on_a, const AdversarySpec& spec,
                                      std::shared_ptr<const VarLenLayout> layout);

struct WRestrictionReport {
  double w_vs_v_dom = 0.0;    // ||W_t - V_t (W_t† W_t)||_F
  double wdag_vs_v_im = 0.0;  // ||W_t† - V_t† (W_t W_t†)||_F
  double dom_idempotent = 0.0;
};
WRestrictionReport check_w_restriction(std::shared_ptr<const VarLenLayout> layout, unsigned t);

struct WdagVReport {
  double forward = 0.0;   // ||W_t† V_t - Pi^dom(W)_t||_F
  double adjoint = 0.0;   // ||V_t† W_t - Pi^dom(W)_t||_F
  double db_split = 0.0;  // residual of the same identity written through Pi^DB
};
WdagVReport check_wdagv_identity(std::shared_ptr<const VarLenLayout> layout, unsigned t);

// Q[C, D]: per L sector apply C to X registers and D^T to Y registers, per
// R sector conj(C) to X and D^dagger to Y.  Acts in place on a layout-dim
// vector (optionally with an A factor as most significant).
void apply_q_cd(Vec& state, const VarLenLayout& layout, const Mat& c, const Mat& d, bool with_A);
// Dense Q[C,D] restricted to one sector (for small sectors).
Mat q_cd_sector_dense(const VarLenLayout& layout, unsigned l, unsigned r, const Mat& c,
                      const Mat& d);

}  // namespace kacpru::oracles
