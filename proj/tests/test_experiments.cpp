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

#include "kacpru/experiments.hpp"

using namespace kacpru;
using namespace kacpru::experiments;
using oracles::AdversarySpec;
using numerics::Mat;
using numerics::Vec;

TEST_SUITE_BEGIN("experiments");

TEST_CASE("batched scalar driver is thread-count independent") {
  McConfig one;
  one.seed = 99;
  one.trials = 500;
  one.batches = 16;
  one.threads = 1;
  McConfig four = one;
  four.threads = 4;
  auto trial = [](RngStream& rng) { return rng.uniform01(); };
  auto a = run_scalar_mc(one, trial);
  auto b = run_scalar_mc(four, trial);
  CHECK(a.mean == b.mean);  // bit-identical
  CHECK(a.stderr_mean == b.stderr_mean);
  CHECK(std::abs(a.mean - 0.5) < 5 * a.stderr_mean + 0.02);
}

TEST_CASE("walk application on the A factor matches the dense oracle") {
  RngStream rng(5);
  kacwalk::KacParams params{3, 2, 3};
  auto walk = kacwalk::sample_walk(params, rng);
  Mat dense = kacwalk::compose_dense(walk);
  const std::int64_t anc = 4;
  Vec ab(8 * anc);
  for (std::int64_t i = 0; i < ab.size(); ++i) ab[i] = cxd(rng.normal(), rng.normal());
  ab.normalize();
  Vec by_kernel = ab;
  apply_walk_on_a(by_kernel, walk, anc, false);
  Vec by_dense = ab;
  apply_dense_on_a(by_dense, dense, anc);
  CHECK((by_kernel - by_dense).norm() < 1e-12);

  Vec round = by_kernel;
  apply_walk_on_a(round, walk, anc, true);
  CHECK((round - ab).norm() < 1e-12);
}

TEST_CASE("distinct-block projection weight") {
  AdversarySpec spec;
  spec.t = 1;
  spec.m = 2;
  spec.seed = 3;
  McConfig mc;
  mc.seed = 7;
  mc.trials = 10;
  mc.threads = 1;
  auto est1 = dbproj_experiment(3, 2, 5, 1, spec, mc);
  CHECK(est1.mean == 1.0);  // every singleton tuple has distinct blocks

  AdversarySpec spec2;
  spec2.t = 2;
  spec2.m = 2;
  spec2.seed = 3;
  mc.trials = 200;
  mc.threads = 2;
  auto est2 = dbproj_experiment(3, 2, 30, 2, spec2, mc);
  CHECK(est2.mean > 0.5);
  CHECK(est2.mean <= 1.0 + 1e-12);

  double control = dbproj_identity_control(3, 2, spec2);
  CHECK(control < 0.95);  // repeated blocks keep weight away from 1
}

TEST_CASE("haar twirl of the equality projector converges to its fixed form") {
  McConfig mc;
  mc.seed = 11;
  mc.trials = 4000;
  mc.threads = 2;
  auto rep = twirl_epr_estimate(4, mc);
  CHECK(rep.epr_invariance_residual < 1e-10);
  CHECK(rep.max_deviation_over_se <= 5.0);
  // sanity: the target at N = 2 has the advertised closed form
  auto rep2 = twirl_epr_estimate(2, mc);
  Mat epr = Mat::Zero(4, 4);
  for (int z = 0; z < 2; ++z)
    for (int w = 0; w < 2; ++w) epr(z * 2 + z, w * 2 + w) = 0.5;
  Mat expect = epr + (Mat::Identity(4, 4) - epr) / 3.0;
  CHECK((rep2.target - expect).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("exact permutation twirl at two qubits") {
  auto rep = perm_twirl_checks(2);
  CHECK(std::abs(rep.coeff - 1.0 / 12.0) < 1e-15);
  CHECK(rep.coeff_error < 1e-15);
  CHECK(std::abs(rep.summed_norm - 1.0 / 3.0) < 1e-15);
  CHECK(rep.x_independence < 1e-15);
  CHECK(rep.eq_invariance == 0.0);
}

TEST_CASE("two-sided invariance identity is exact at zero recorded pairs") {
  CHECK(invariance_t0_residual(2, 5, 17) < 1e-10);
  CHECK(invariance_t0_residual(3, 3, 18) < 1e-10);
}

TEST_CASE("fresh-block recorder is close to the counted recorder in norm") {
  auto rep = v_vs_e_norm(3);
  CHECK(rep.bound == std::sqrt(1.0));  // 8/N = 1 at N = 8
  CHECK(rep.vl_gap <= rep.bound + 1e-9);
  CHECK(rep.vr_gap <= rep.bound + 1e-9);
  CHECK(rep.vl_gap > 0.01);  // genuinely different operators
}

TEST_CASE("twirl-bound estimate stays under the trivial cap and is flagged vacuous") {
  McConfig mc;
  mc.seed = 23;
  mc.trials = 200;
  mc.threads = 2;
  auto rep = twirl_bound_experiment(2, 1, TwirlDist::haar_pair, mc);
  CHECK(rep.bound_vacuous);  // 16 sqrt(2/4) = 11.3 at n = 2
  CHECK(rep.norm_of_mean <= 1.0 + 1e-9);
  // t = 0: the difference operator is empty
  auto rep0 = twirl_bound_experiment(2, 0, TwirlDist::haar_pair, mc);
  CHECK(rep0.norm_of_mean < 1e-12);
}

TEST_CASE("exact forward recording view matches the truncated register run") {
  AdversarySpec spec;
  spec.t = 2;
  spec.m = 2;
  spec.seed = 29;
  Mat closed = pr_exact_view_density(3, spec);
  CHECK(std::abs(closed.trace() - cxd(1.0, 0.0)) < 1e-10);

  // independent oracle: run the recording simulation and trace out
  auto layout = std::make_shared<relations::VarLenLayout>(3, 2, true);
  auto pr = oracles::build_pr(layout, 1);
  Vec psi = oracles::run_adversary_recording(pr, spec, nullptr);
  const std::int64_t D = layout->total_dim(), anc = 4, N = 8;
  Mat reduced = Mat::Zero(N * anc, N * anc);
  for (std::int64_t a = 0; a < N; ++a)
    for (std::int64_t a2 = 0; a2 < N; ++a2)
      for (std::int64_t bb = 0; bb < anc; ++bb)
        for (std::int64_t bb2 = 0; bb2 < anc; ++bb2) {
          cxd acc = 0.0;
          for (std::int64_t rel = 0; rel < D; ++rel)
            acc += psi[(a * D + rel) * anc + bb] * std::conj(psi[(a2 * D + rel) * anc + bb2]);
          reduced(a * anc + bb, a2 * anc + bb2) = acc;
        }
  CHECK((closed - reduced).cwiseAbs().maxCoeff() < 1e-11);
}

TEST_CASE("two-sided exact view runs under the cap and is guarded above it") {
  AdversarySpec spec;
  spec.t = 2;
  spec.m = 1;
  spec.seed = 31;
  spec.b = {0, 1};
  Mat rho = v_exact_view_density(2, spec, std::int64_t(1) << 24);
  CHECK(rho.rows() == 8);
  CHECK(std::real(rho.trace()) <= 1.0 + 1e-10);
  CHECK_THROWS_AS(v_exact_view_density(2, spec, 100), resource_error);
}

TEST_CASE("same family at two seeds stays within the noise floor") {
  AdversarySpec spec;
  spec.t = 2;
  spec.m = 2;
  spec.seed = 37;
  FamilyParams params;
  params.n = 3;
  params.d = 2;
  params.steps = 10;
  McConfig mc;
  mc.trials = 2000;
  mc.threads = 2;
  mc.seed = 41;
  auto a = family_view(Family::hpc, params, spec, mc);
  mc.seed = 43;
  auto b = family_view(Family::hpc, params, spec, mc);
  auto rep = distinguish_pair(a, b, 47, 200);
  CHECK(rep.td <= 3.0 * rep.noise_floor);
}

TEST_CASE("walk views approach the exact recording view") {
  AdversarySpec spec;
  spec.t = 2;
  spec.m = 2;
  spec.seed = 53;
  FamilyParams params;
  params.n = 4;
  params.d = 8;
  params.steps = 30 * 4 + 1;
  McConfig mc;
  mc.trials = 3000;
  mc.threads = 2;
  mc.seed = 59;
  auto walk = family_view(Family::hpc, params, spec, mc);
  auto exact = family_view(Family::pr_exact, params, spec, mc);
  auto rep = distinguish_pair(walk, exact, 61, 200);
  // generous: the scaling bound with slack 8 at N = 16 is 8 * 4 / 16 = 2
  CHECK(rep.td <= 8.0 * 4.0 / 16.0 + 3.0 * rep.noise_floor);
  CHECK(rep.td < 1.0);  // informative sanity ceiling well below the trivial cap
}

TEST_CASE("mixing curve falls toward the scrambled moment") {
  McConfig mc;
  mc.trials = 1500;
  mc.threads = 2;
  mc.seed = 67;
  auto rep = mixing_experiment(3, 2, {0, 2, 10, 30}, 1, mc);
  REQUIRE(rep.curve.size() == 4);
  // T = 0: td(|0><0|, I/N) = 2 (1 - 1/N) exactly, no sampling noise
  CHECK(std::abs(rep.curve[0].td - 2.0 * (1.0 - 1.0 / 8.0)) < 1e-9);
  CHECK(rep.monotone_ok);
  CHECK(rep.curve.back().td < rep.curve.front().td);

  auto rep2 = mixing_experiment(3, 2, {0, 30}, 2, mc);
  CHECK(rep2.curve.back().td < rep2.curve.front().td);
}

TEST_CASE("helper identities hold on random instances") {
  auto rep = helper_lemma_checks(71, 300);
  CHECK(rep.projdist_residual < 1e-9);
  CHECK(rep.gentle_violation < 1e-10);
}

TEST_SUITE_END();
