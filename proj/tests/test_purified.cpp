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

#include <doctest.h>

#include "kacpru/purified.hpp"

using namespace kacpru;
using namespace kacpru::purified;
using kacpru::relations::Relation;
using kacpru::relations::RelationClass;
using kacpru::relations::VarLenLayout;
using numerics::Mat;
using numerics::Vec;

TEST_SUITE_BEGIN("purified");

TEST_CASE("basis enumeration counts and caps") {
  PurifiedBasis basis(2, 1);
  CHECK(basis.num_functions() == 64);
  CHECK(basis.num_perms() == 24);
  CHECK(basis.dim() == 1536);
  CHECK_THROWS_AS(PurifiedBasis(3, 1), resource_error);
}

TEST_CASE("environment state on empty relations is the uniform superposition") {
  PurifiedBasis basis(2, 1);
  Relation empty(2, {});
  auto phi = build_phi(basis, empty, empty);
  const double expect = 1.0 / std::sqrt(static_cast<double>(basis.dim()));
  CHECK(std::abs(phi.amplitudes.norm() - 1.0) < 1e-12);
  for (std::int64_t i = 0; i < basis.dim(); ++i)
    CHECK(std::abs(phi.amplitudes[i] - cxd(expect, 0.0)) < 1e-15);
}

TEST_CASE("environment states are unit vectors on distinct-block unions") {
  PurifiedBasis basis(2, 2);
  for (unsigned l = 0; l <= 1; ++l)
    for (unsigned r = 0; l + r <= 1; ++r)
      for (const auto& L : relations::enumerate_relations(2, l, RelationClass::ALL))
        for (const auto& R : relations::enumerate_relations(2, r, RelationClass::ALL)) {
          if (!Relation::multiset_union(L, R).in_class(RelationClass::DB)) continue;
          auto phi = build_phi(basis, L, R);
          CHECK(std::abs(phi.amplitudes.norm() - 1.0) < 1e-9);
        }
}

TEST_CASE("purified oracle is unitary and block diagonal") {
  PurifiedBasis basis(2, 1);
  RngStream rng(3);
  Vec state(4 * basis.dim());
  for (std::int64_t i = 0; i < state.size(); ++i) state[i] = cxd(rng.normal(), rng.normal());
  state.normalize();
  Vec forward = state;
  apply_hpo(forward, basis, 0, false);
  CHECK(std::abs(forward.norm() - 1.0) < 1e-12);
  apply_hpo(forward, basis, 0, true);
  CHECK((forward - state).norm() < 1e-12);

  // basis slice: |x> |f> |sigma> evolves by the sampled walk step
  const std::int64_t fs = 37 % basis.dim();
  const std::int64_t f = fs / basis.num_perms();
  const std::int64_t p = fs % basis.num_perms();
  Vec slice = Vec::Zero(4 * basis.dim());
  const std::uint32_t x = 3;
  slice[x * basis.dim() + fs] = 1.0;
  apply_hpo(slice, basis, 0, false);
  Vec expected = Vec::Zero(4);
  expected[basis.perm(p).image[x]] = 1.0;
  kacwalk::FunctionTable table = basis.function(f);
  kacwalk::apply_hf(expected, table);
  for (std::int64_t a = 0; a < 4; ++a)
    CHECK(std::abs(slice[a * basis.dim() + fs] - expected[a]) < 1e-13);
}

TEST_CASE("recorded-query action of the purified oracle") {
  PurifiedBasis basis(2, 2);
  Relation empty(2, {});
  for (std::uint32_t x = 0; x < 4; ++x) {
    CHECK(check_hpo_action(basis, empty, empty, x, false) < 1e-9);
    CHECK(check_hpo_action(basis, empty, empty, x, true) < 1e-9);
  }
  Relation one(2, {{1, 2}});
  CHECK(check_hpo_action(basis, one, empty, 0, false) < 1e-9);
  CHECK(check_hpo_action(basis, empty, one, 0, true) < 1e-9);
  // amplitude at one recorded pair is 1/sqrt(N - 1) by the identity itself;
  // the residual check covers it against the reconstructed right-hand side
}

TEST_CASE("querying the sampled step equals querying its purification") {
  // exact enumeration at d = 1: averaging the sampled views reproduces the
  // purified view's reduced state, for a mixed forward/inverse pattern
  PurifiedBasis basis(2, 1);
  oracles::AdversarySpec spec;
  spec.t = 2;
  spec.m = 1;
  spec.seed = 21;
  spec.b = {0, 1};

  const std::int64_t ab = 4 * 2;
  Mat avg = Mat::Zero(ab, ab);
  for (std::int64_t f = 0; f < basis.num_functions(); ++f)
    for (std::int64_t p = 0; p < basis.num_perms(); ++p) {
      Mat u = kacwalk::dense_hf(basis.function(f)) * kacwalk::dense_perm(basis.perm(p));
      Vec v = oracles::run_adversary_unitary(u, spec);
      avg += v * v.adjoint();
    }
  avg /= static_cast<double>(basis.dim());

  Vec psi = run_hpo_adversary(basis, spec, nullptr);
  Mat reduced = Mat::Zero(ab, ab);
  for (std::int64_t i = 0; i < ab; ++i)
    for (std::int64_t j = 0; j < ab; ++j) {
      cxd acc = 0.0;
      for (std::int64_t fs = 0; fs < basis.dim(); ++fs)
        acc += psi[i * basis.dim() + fs] * std::conj(psi[j * basis.dim() + fs]);
      reduced(i, j) = acc;
    }
  CHECK((avg - reduced).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("closed form of the purified run matches the simulation") {
  PurifiedBasis basis(2, 2);
  oracles::AdversarySpec spec;
  spec.t = 2;
  spec.m = 2;
  spec.seed = 31;
  RngStream rng(5);
  Mat g = numerics::haar_unitary(4, rng);

  Vec run = run_hpo_adversary(basis, spec, &g);

  // sum over all input/output tuples of weighted environment states
  const std::int64_t N = 4, anc = 4, dim = basis.dim();
  Mat g_ab = numerics::tensor_product(g, Mat::Identity(anc, anc));
  Mat a1 = g_ab * spec.interleaving_unitary(0, N);
  Mat a2 = g_ab * spec.interleaving_unitary(1, N);
  Vec closed = Vec::Zero(N * anc * dim);
  const double coeff = std::sqrt(1.0 / (4.0 * 3.0));  // (N - t)! / N! at t = 2
  Vec u1 = a1.col(0);
  for (std::int64_t x1 = 0; x1 < N; ++x1)
    for (std::int64_t y1 = 0; y1 < N; ++y1) {
      Vec mid = Vec::Zero(N * anc);
      mid.segment(y1 * anc, anc) = u1.segment(x1 * anc, anc);
      Vec w = a2 * mid;
      for (std::int64_t x2 = 0; x2 < N; ++x2)
        for (std::int64_t y2 = 0; y2 < N; ++y2) {
          Relation r(2, {{static_cast<std::uint32_t>(x1), static_cast<std::uint32_t>(y1)},
                         {static_cast<std::uint32_t>(x2), static_cast<std::uint32_t>(y2)}});
          Vec phi = build_phi_forward(basis, r).amplitudes;
          for (std::int64_t bb = 0; bb < anc; ++bb) {
            cxd amp = coeff * w[x2 * anc + bb];
            if (amp == cxd(0.0, 0.0)) continue;
            for (std::int64_t k = 0; k < dim; ++k)
              closed[(y2 * anc + bb) * dim + k] += amp * phi[k];
          }
        }
    }
  CHECK((run - closed).norm() < 1e-9);
}

TEST_CASE("compression onto relation registers") {
  auto basis = std::make_shared<PurifiedBasis>(2, 2);
  auto layout = std::make_shared<VarLenLayout>(2, 2, false);
  auto compress = build_compress(basis, layout, false, 2);
  // Compress phi_(empty, empty) = |{}>|{}>
  Vec in = Vec::Zero(4 * basis->dim());
  Relation empty(2, {});
  in.segment(0, basis->dim()) = build_phi(*basis, empty, empty).amplitudes;  // a = 0 slice
  Vec out = compress.apply(in, 0);
  CHECK(std::abs(out[0] - cxd(1.0, 0.0)) < 1e-9);
  CHECK(std::abs(out.norm() - 1.0) < 1e-9);

  // round trip through the adjoint is a projection
  Vec back = compress.adjoint_apply(out, 0);
  Vec twice = compress.apply(back, 0);
  CHECK((twice - out).norm() < 1e-9);
}

TEST_CASE("compress-rescaling identity between the two runs") {
  PurifiedBasis basis(2, 2);
  oracles::AdversarySpec spec;
  spec.t = 2;
  spec.m = 2;
  spec.seed = 41;
  RngStream rng(7);
  Mat g = numerics::haar_unitary(4, rng);
  auto rep = check_compress_scaling(basis, spec, g);
  CHECK(rep.residual < 1e-9);
  CHECK(std::abs(rep.formula_ratio - std::sqrt(1.5)) < 1e-12);
  CHECK(std::abs(rep.measured_ratio - rep.formula_ratio) < 1e-9);

  // t = 1: the ratio is exactly 1
  oracles::AdversarySpec spec1;
  spec1.t = 1;
  spec1.m = 2;
  spec1.seed = 42;
  auto rep1 = check_compress_scaling(basis, spec1, g);
  CHECK(rep1.residual < 1e-10);
  CHECK(std::abs(rep1.formula_ratio - 1.0) == 0.0);
}

TEST_CASE("compressed purified oracle tracks the partial recorder") {
  auto basis = std::make_shared<PurifiedBasis>(2, 2);
  auto layout = std::make_shared<VarLenLayout>(2, 3, false);
  auto rep1 = check_w_hpo_closeness(basis, layout, 1);
  CHECK(rep1.norm_gap <= rep1.bound + 1e-12);
  CHECK(rep1.adjoint_gap <= rep1.bound + 1e-12);
  // amplitude mismatch on the shared support is exactly 1 - sqrt(2/3)
  CHECK(std::abs(rep1.sector1_coeff_gap - (1.0 - std::sqrt(2.0 / 3.0))) < 1e-10);
  // the full column also carries the cross-direction interference of the
  // environment family, so it exceeds the pure coefficient gap
  CHECK(rep1.sector1_column_norm >= rep1.sector1_coeff_gap - 1e-12);
  CHECK(rep1.sector1_column_norm <= rep1.bound);

  auto rep2 = check_w_hpo_closeness(basis, layout, 2);
  CHECK(rep2.norm_gap <= rep2.bound + 1e-12);
  CHECK(rep2.adjoint_gap <= rep2.bound + 1e-12);
}

TEST_CASE("single-entry moments vanish per the root-of-unity cancellations") {
  auto m1 = hf_block_moments(1);
  CHECK(std::abs(m1.diag) < 1e-14);
  CHECK(std::abs(m1.offdiag) < 1e-14);
  CHECK(std::abs(m1.cross) < 1e-14);
  CHECK(std::abs(m1.phase_diag) > 0.1);  // recorded, no cancellation at d = 1

  auto m2 = hf_block_moments(2);
  CHECK(std::abs(m2.phase_diag) < 1e-14);
  CHECK(std::abs(m2.phase_offdiag) < 1e-14);
}

TEST_CASE("domain and image projector decompositions with the sector bound") {
  auto layout = std::make_shared<VarLenLayout>(2, 3, false);
  auto rep = build_dom_im_projectors(layout, 2);
  CHECK(rep.dom_residual < 1e-9);
  CHECK(rep.im_residual < 1e-9);
  CHECK(rep.ubound_min_eig >= -1e-8);
}

TEST_CASE("gram of the two-sided environment family: flipped-pair interference") {
  // The family is NOT exactly orthonormal at finite angle precision: a
  // member whose inverse side records (x, y) overlaps a member whose
  // forward side records (x*, ybar) with x* != x.  The overlap is exactly
  // E[cos 2 theta] / (N - 1), and E[cos 2 theta] = 2^-d on the d-bit grid
  // because the grid {k / 2^d} is asymmetric in [0, 1).  Exact
  // orthonormality holds only in the continuous-angle limit.
  for (unsigned d = 1; d <= 2; ++d) {
    auto basis = std::make_shared<PurifiedBasis>(2, d);
    auto family = enumerate_phi_family(basis, 2, false);
    CHECK(family.members.size() == 161);
    Mat g = numerics::gram_matrix(family.vectors);
    Relation empty(2, {});
    Relation r00(2, {{0, 0}});
    Relation l12(2, {{1, 2}});
    auto i = family.index_of(empty, r00);
    auto j = family.index_of(l12, empty);
    REQUIRE(i >= 0);
    REQUIRE(j >= 0);
    const double predicted = std::pow(2.0, -static_cast<double>(d)) / 3.0;
    CHECK(std::abs(g(i, j) - cxd(predicted, 0.0)) < 1e-12);

    // diagonal stays exactly 1 and nothing exceeds the 2^-d scale at d = 2
    for (Eigen::Index k = 0; k < g.rows(); ++k) CHECK(std::abs(g(k, k) - cxd(1, 0)) < 1e-9);
    if (d == 2)
      CHECK((g - Mat::Identity(g.rows(), g.cols())).cwiseAbs().maxCoeff() <=
            std::pow(2.0, -static_cast<double>(d)));
  }
}

TEST_CASE("forward-only and inverse-only subfamilies are orthonormal at d = 2") {
  auto basis = std::make_shared<PurifiedBasis>(2, 2);
  auto fwd = enumerate_phi_family(basis, 2, true);
  Mat g = numerics::gram_matrix(fwd.vectors);
  CHECK((g - Mat::Identity(g.rows(), g.cols())).cwiseAbs().maxCoeff() < 1e-9);

  // inverse-only: mirror members (empty forward side)
  std::vector<numerics::Vec> inv_vectors;
  Relation empty(2, {});
  for (unsigned t = 0; t <= 2; ++t)
    for (const auto& r : relations::enumerate_relations(2, t, RelationClass::DB))
      inv_vectors.push_back(build_phi(*basis, empty, r).amplitudes);
  Mat gi = numerics::gram_matrix(inv_vectors);
  CHECK((gi - Mat::Identity(gi.rows(), gi.cols())).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("at d = 1 all rotations are real, so directions collapse") {
  // every H_f entry is real at d = 1, hence phi_(L, R) = phi_(R, L)
  // whenever the recorded pairs coincide; the family degenerates
  auto basis = std::make_shared<PurifiedBasis>(2, 1);
  Relation empty(2, {});
  Relation r(2, {{1, 3}});
  Vec fwd = build_phi(*basis, r, empty).amplitudes;
  Vec inv = build_phi(*basis, empty, r).amplitudes;
  CHECK((fwd - inv).norm() < 1e-12);
}

TEST_SUITE_END();
