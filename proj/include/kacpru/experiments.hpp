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
// Statistical experiments.  Every estimate is produced by a fixed batch
// decomposition: trials are split into `batches` contiguous index ranges,
// batch b consumes the stream child(seed, b), and batch results are
// combined in batch order.  The thread count only decides which worker
// runs which batch, so results are bit-identical across thread counts.
// Standard errors come from batch means; confidence intervals and noise
// floors from bootstrap resampling of batch means (child stream 0xB007).

#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "kacpru/kacwalk.hpp"
#include "kacpru/numerics.hpp"
#include "kacpru/oracles.hpp"
#include "kacpru/prf.hpp"

namespace kacpru::experiments {

using numerics::Mat;
using numerics::Vec;

struct McConfig {
  std::uint64_t seed = 1;
  std::int64_t trials = 1000;
  unsigned batches = 50;
  unsigned threads = 1;
  int bootstrap_resamples = 200;
};

struct ScalarEstimate {
  double mean = 0.0;
  double stderr_mean = 0.0;
  std::int64_t samples = 0;
  std::uint64_t seed = 0;
  std::vector<double> batch_means;
};

struct MatrixEstimate {
  Mat mean;
  double max_entry_se = 0.0;
  std::int64_t samples = 0;
  std::uint64_t seed = 0;
  std::vector<Mat> batch_means;

  // per-entry standard error (from batch means), as a dense real matrix
  Eigen::MatrixXd entry_se() const;
};

// Generic batched scalar / matrix Monte Carlo drivers.
ScalarEstimate run_scalar_mc(const McConfig& mc,
                             const std::function<double(RngStream&)>& trial);
MatrixEstimate run_matrix_mc(const McConfig& mc, std::int64_t dim,
                             const std::function<void(RngStream&, Mat&)>& accumulate_trial);

// ---- walk application on the A factor of an AB state ----

void apply_dense_on_a(Vec& ab, const Mat& u, std::int64_t anc);
void apply_walk_on_a(Vec& ab, const kacwalk::WalkUnitary& walk, std::int64_t anc, bool adjoint);

// Runs the adversary where the oracle is an arbitrary callback acting on
// the A factor of the AB state (true = apply the adjoint).
Vec run_adversary_callback(std::int64_t N, const oracles::AdversarySpec& spec,
                           const std::function<void(Vec&, bool)>& oracle_apply);

// ---- experiments ----

// Mean of ||Pi_X^(t) |A_t^(PR . P K)>||^2 over sampled walks K and uniform
// permutations P.  t <= 2.
ScalarEstimate dbproj_experiment(unsigned n, unsigned d, unsigned T, unsigned t,
                                 const oracles::AdversarySpec& spec, const McConfig& mc);
// Негative control: same estimator with the oracle G forced to identity and
// an adversary that re-queries its answer (expected strictly below 1).
double dbproj_identity_control(unsigned n, unsigned t, const oracles::AdversarySpec& spec);

// E[(U (x) conj(U))† Pi_eq (U (x) conj(U))] vs Pi_EPR + (Id-Pi_EPR)/(N+1).
struct TwirlEprReport {
  MatrixEstimate estimate;
  Mat target;
  double max_deviation = 0.0;
  double max_deviation_over_se = 0.0;  // max over entries of |dev| / se
  double epr_invariance_residual = 0.0;
};
TwirlEprReport twirl_epr_estimate(std::int64_t N, const McConfig& mc);

// Exact permutation twirl over all N! permutations (N <= 5): the twirl of
// |x, xbar><x, xbar| is uniform over ordered distinct pairs, and the sum
// over x has operator norm 1/(N-1).
struct PermTwirlReport {
  double coeff = 0.0;            // measured off-diagonal-pair coefficient
  double coeff_error = 0.0;      // max deviation from 1/(N(N-1))
  double summed_norm = 0.0;      // ||sum_x twirl_x||
  double eq_invariance = 0.0;    // max residual of per-P invariance of Pi_eq
  double x_independence = 0.0;   // max difference between twirls at two x
};
PermTwirlReport perm_twirl_checks(unsigned n);

// t = 0 exactness of the two-sided invariance identity, over `pairs`
// Haar (C, D) pairs.  Returns the worst residual.
double invariance_t0_residual(unsigned n, int pairs, std::uint64_t seed);

struct VENormReport {
  double vl_gap = 0.0;
  double vr_gap = 0.0;
  double bound = 0.0;  // sqrt(4 t (t+1) / N) at t = 1
};
VENormReport v_vs_e_norm(unsigned n);

enum class TwirlDist { haar_pair, walk_pair };

// || E[(C (x) Q[C,D])† (Pi_DB - Pi_dom(W))_{<=t} (C (x) Q[C,D])] || estimated
// per sector; returns the max over sectors, with the stated scaling bound.
struct TwirlBoundReport {
  ScalarEstimate estimate;  // mean of per-sample per-sector norms is NOT used;
                            // mean matrices are accumulated and normed at the end
  double norm_of_mean = 0.0;
  double bound = 0.0;  // 16 t sqrt(2t/N)
  bool bound_vacuous = true;
};
TwirlBoundReport twirl_bound_experiment(unsigned n, unsigned t, TwirlDist dist,
                                        const McConfig& mc, unsigned walk_T = 0, unsigned walk_d = 0);

// ---- distinguishability ----

enum class Family {
  hpc,            // walk with `steps` steps, applied per query
  haar,           // one Haar unitary per trial
  sandwich_haar,  // D . (one walk step) . C with Haar C, D
  sandwich_walk,  // D . (one walk step) . P C' with walk C', D and uniform P
  pr_exact,       // closed-form recording-oracle view (forward-only)
  v_exact         // recording-oracle view on the truncated register (any b)
};
std::string family_name(Family f);

struct FamilyView {
  Mat mean;                      // AB density matrix
  std::vector<Mat> batch_means;  // empty for exact families
  bool exact = false;
};

struct FamilyParams {
  unsigned n = 2;
  unsigned d = 2;
  unsigned steps = 0;       // walk length for hpc / sandwich families
  std::int64_t dense_cap = std::int64_t(1) << 24;  // guard for v_exact
};

FamilyView family_view(Family family, const FamilyParams& params,
                       const oracles::AdversarySpec& spec, const McConfig& mc);

Mat pr_exact_view_density(unsigned n, const oracles::AdversarySpec& spec);
Mat v_exact_view_density(unsigned n, const oracles::AdversarySpec& spec, std::int64_t dense_cap);

struct DistinguishReport {
  double td = 0.0;
  double se_td = 0.0;        // bootstrap standard error of the distance
  double noise_floor = 0.0;  // combined self-distance scale of the two means
  double nf_a = 0.0, nf_b = 0.0;
};
DistinguishReport distinguish_pair(const FamilyView& a, const FamilyView& b, std::uint64_t seed,
                                   int resamples);

// ---- mixing ----

struct MixingPoint {
  unsigned T = 0;
  double td = 0.0;
  double se = 0.0;
  double noise_floor = 0.0;
};
struct MixingReport {
  std::vector<MixingPoint> curve;
  bool monotone_ok = true;  // each step down within 1.645 combined se
};
MixingReport mixing_experiment(unsigned n, unsigned d, const std::vector<unsigned>& T_list,
                               unsigned copies, const McConfig& mc);

// ---- helper identities on random instances ----

struct HelperReport {
  double projdist_residual = 0.0;   // worst |lhs - rhs| of the partial-trace identity
  double gentle_violation = 0.0;    // worst (lhs - rhs) of the measurement inequality
  int instances = 0;
};
HelperReport helper_lemma_checks(std::uint64_t seed, int instances);

}  // namespace kacpru::experiments
