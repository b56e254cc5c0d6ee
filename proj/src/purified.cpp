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

#include "kacpru/purified.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

namespace kacpru::purified {

using kacwalk::flip_first_bit;
using kacwalk::suffix_of;
using relations::RelationClass;
using relations::SparseVec;

PurifiedBasis::PurifiedBasis(unsigned n, unsigned d, std::int64_t cap) : n_(n), d_(d) {
  const std::int64_t N = std::int64_t(1) << n;
  const unsigned suffixes = 1u << (n - 1);
  const unsigned fbits = 3 * d * suffixes;
  if (fbits > 40) throw resource_error("PurifiedBasis: function space too large");
  num_functions_ = std::int64_t(1) << fbits;
  std::int64_t nfact = 1;
  for (std::int64_t i = 2; i <= N; ++i) nfact *= i;
  if (num_functions_ * nfact > cap)
    throw resource_error("PurifiedBasis: enumeration exceeds cap");

  std::vector<std::uint32_t> image(static_cast<std::size_t>(N));
  std::iota(image.begin(), image.end(), 0u);
  do {
    kacwalk::Permutation p;
    p.image = image;
    perms_.push_back(std::move(p));
  } while (std::next_permutation(image.begin(), image.end()));

  hf_blocks_.resize(static_cast<std::size_t>(num_functions_) * suffixes);
  const std::uint64_t entry_mask = (std::uint64_t(1) << (3 * d)) - 1;
  for (std::int64_t f = 0; f < num_functions_; ++f)
    for (unsigned s = 0; s < suffixes; ++s) {
      std::uint64_t entry = (static_cast<std::uint64_t>(f) >> (3 * d * s)) & entry_mask;
      auto a = kacwalk::angles_from_entry(entry, d);
      hf_blocks_[static_cast<std::size_t>(f) * suffixes + s] =
          kacwalk::rotation_u(a.alpha, a.beta, a.theta);
    }
}

kacwalk::FunctionTable PurifiedBasis::function(std::int64_t f) const {
  kacwalk::FunctionTable t;
  t.n = n_;
  t.d = d_;
  const unsigned suffixes = 1u << (n_ - 1);
  const std::uint64_t entry_mask = (std::uint64_t(1) << (3 * d_)) - 1;
  for (unsigned s = 0; s < suffixes; ++s)
    t.table.push_back((static_cast<std::uint64_t>(f) >> (3 * d_ * s)) & entry_mask);
  return t;
}

const Mat& PurifiedBasis::hf_block(std::int64_t f, std::uint64_t suffix) const {
  return hf_blocks_[static_cast<std::size_t>(f) * (std::size_t(1) << (n_ - 1)) + suffix];
}

cxd PurifiedBasis::hf_element(std::int64_t f, std::uint32_t y, std::uint32_t z) const {
  if (suffix_of(y, n_) != suffix_of(z, n_)) return 0.0;
  const Mat& b = hf_block(f, suffix_of(y, n_));
  const unsigned ry = static_cast<unsigned>(y >> (n_ - 1));
  const unsigned rz = static_cast<unsigned>(z >> (n_ - 1));
  return b(ry, rz);
}

namespace {
double falling_factorial_full(std::int64_t from) {
  double v = 1.0;
  for (std::int64_t i = 2; i <= from; ++i) v *= static_cast<double>(i);
  return v;
}
}  // namespace

PhiState build_phi(const PurifiedBasis& basis, const Relation& L, const Relation& R) {
  const std::int64_t N = basis.N();
  const std::int64_t lr = static_cast<std::int64_t>(L.size() + R.size());
  if (lr > N) throw contract_violation("build_phi: |L| + |R| > N");
  PhiState phi;
  phi.L = L;
  phi.R = R;
  phi.amplitudes = Vec::Zero(basis.dim());
  const double norm =
      1.0 / std::sqrt(static_cast<double>(basis.num_functions()) * falling_factorial_full(N - lr));
  const std::int64_t nperms = basis.num_perms();
  for (std::int64_t f = 0; f < basis.num_functions(); ++f) {
    for (std::int64_t p = 0; p < nperms; ++p) {
      const auto& sigma = basis.perm(p).image;
      cxd amp = norm;
      for (auto [x, y] : L.pairs()) {
        amp *= basis.hf_element(f, y, sigma[x]);
        if (amp == cxd(0.0, 0.0)) break;
      }
      if (amp != cxd(0.0, 0.0)) {
        for (auto [x, y] : R.pairs()) {
          amp *= std::conj(basis.hf_element(f, y, sigma[x]));
          if (amp == cxd(0.0, 0.0)) break;
        }
      }
      if (amp != cxd(0.0, 0.0)) phi.amplitudes[f * nperms + p] = amp;
    }
  }
  return phi;
}

PhiState build_phi_forward(const PurifiedBasis& basis, const Relation& R) {
  return build_phi(basis, R, Relation(basis.n(), {}));
}

std::int64_t PhiFamily::index_of(const Relation& L, const Relation& R) const {
  for (std::size_t k = 0; k < members.size(); ++k)
    if (members[k].first == L && members[k].second == R) return static_cast<std::int64_t>(k);
  return -1;
}

PhiFamily enumerate_phi_family(std::shared_ptr<const PurifiedBasis> basis, unsigned t_max,
                               bool forward_only, std::size_t memory_budget_bytes) {
  PhiFamily fam;
  fam.basis = basis;
  fam.t_max = t_max;
  const unsigned n = basis->n();
  std::vector<std::vector<Relation>> panels;
  for (unsigned t = 0; t <= t_max; ++t)
    panels.push_back(relations::enumerate_relations(n, t, RelationClass::ALL));
  for (unsigned total = 0; total <= t_max; ++total)
    for (unsigned l = 0; l <= total; ++l) {
      unsigned r = total - l;
      if (forward_only && r != 0) continue;
      for (const auto& L : panels[l])
        for (const auto& R : panels[r])
          if (Relation::multiset_union(L, R).in_class(RelationClass::DB))
            fam.members.emplace_back(L, R);
    }
  const std::size_t bytes =
      fam.members.size() * static_cast<std::size_t>(basis->dim()) * sizeof(cxd);
  if (bytes > memory_budget_bytes)
    throw resource_error("enumerate_phi_family: memory budget exceeded");
  fam.vectors.reserve(fam.members.size());
  for (const auto& [L, R] : fam.members) fam.vectors.push_back(build_phi(*basis, L, R).amplitudes);
  return fam;
}

void apply_hpo(Vec& state, const PurifiedBasis& basis, unsigned m_anc, bool inverse) {
  const std::int64_t N = basis.N();
  const std::int64_t anc = std::int64_t(1) << m_anc;
  const std::int64_t dim = basis.dim();
  const std::int64_t nperms = basis.num_perms();
  if (state.size() != N * anc * dim) throw contract_violation("apply_hpo: dimension mismatch");
  const unsigned n = basis.n();
  const std::int64_t half = N / 2;
  Vec buf(N), tmp(N);
  for (std::int64_t f = 0; f < basis.num_functions(); ++f)
    for (std::int64_t p = 0; p < nperms; ++p) {
      const std::int64_t fs = f * nperms + p;
      const auto& sigma = basis.perm(p).image;
      for (std::int64_t bb = 0; bb < anc; ++bb) {
        for (std::int64_t a = 0; a < N; ++a) buf[a] = state[(a * anc + bb) * dim + fs];
        if (!inverse) {
          // H_f P_sigma
          for (std::int64_t x = 0; x < N; ++x) tmp[sigma[static_cast<std::size_t>(x)]] = buf[x];
          for (std::int64_t s = 0; s < half; ++s) {
            const Mat& u = basis.hf_block(f, static_cast<std::uint64_t>(s));
            cxd a0 = tmp[s], a1 = tmp[s + half];
            tmp[s] = u(0, 0) * a0 + u(0, 1) * a1;
            tmp[s + half] = u(1, 0) * a0 + u(1, 1) * a1;
          }
        } else {
          // (H_f P_sigma)† = P_sigma† H_f†
          for (std::int64_t s = 0; s < half; ++s) {
            const Mat& u = basis.hf_block(f, static_cast<std::uint64_t>(s));
            cxd a0 = buf[s], a1 = buf[s + half];
            buf[s] = std::conj(u(0, 0)) * a0 + std::conj(u(1, 0)) * a1;
            buf[s + half] = std::conj(u(0, 1)) * a0 + std::conj(u(1, 1)) * a1;
          }
          for (std::int64_t x = 0; x < N; ++x) tmp[x] = buf[sigma[static_cast<std::size_t>(x)]];
        }
        for (std::int64_t a = 0; a < N; ++a) state[(a * anc + bb) * dim + fs] = tmp[a];
      }
      (void)n;
    }
}

Vec run_hpo_adversary(const PurifiedBasis& basis, const oracles::AdversarySpec& spec,
                      const Mat* g_on_a) {
  const std::int64_t N = basis.N();
  const std::int64_t anc = std::int64_t(1) << spec.m;
  const std::int64_t dim = basis.dim();
  Vec state = Vec::Zero(N * anc * dim);
  const double init = 1.0 / std::sqrt(static_cast<double>(dim));
  for (std::int64_t fs = 0; fs < dim; ++fs) state[fs] = init;  // a = 0, anc = 0 slice

  Mat g_ab, g_ab_dag;
  if (g_on_a) {
    g_ab = numerics::tensor_product(*g_on_a, Mat::Identity(anc, anc));
    g_ab_dag = g_ab.adjoint();
  }

  Eigen::VectorXcd slice(N * anc), res(N * anc);
  for (unsigned i = 0; i < spec.t; ++i) {
    const bool inverse = i < spec.b.size() && spec.b[i];
    Mat a_i = spec.interleaving_unitary(i, N);
    if (g_on_a && !inverse) a_i = g_ab * a_i;  // forward query applies HPO . G . A_i
    for (std::int64_t fs = 0; fs < dim; ++fs) {
      for (std::int64_t ab = 0; ab < N * anc; ++ab) slice[ab] = state[ab * dim + fs];
      res.noalias() = a_i * slice;
      for (std::int64_t ab = 0; ab < N * anc; ++ab) state[ab * dim + fs] = res[ab];
    }
    apply_hpo(state, basis, spec.m, inverse);
    if (g_on_a && inverse) {
      // inverse query applies (HPO . G)† = G† . HPO†
      for (std::int64_t fs = 0; fs < dim; ++fs) {
        for (std::int64_t ab = 0; ab < N * anc; ++ab) slice[ab] = state[ab * dim + fs];
        res.noalias() = g_ab_dag * slice;
        for (std::int64_t ab = 0; ab < N * anc; ++ab) state[ab * dim + fs] = res[ab];
      }
    }
  }
  return state;
}

double check_hpo_action(const PurifiedBasis& basis, const Relation& L, const Relation& R,
                        std::uint32_t queried, bool inverse) {
  const std::int64_t N = basis.N();
  const std::int64_t dim = basis.dim();
  const std::int64_t lr = static_cast<std::int64_t>(L.size() + R.size());
  PhiState phi = build_phi(basis, L, R);
  Vec lhs = Vec::Zero(N * dim);
  lhs.segment(queried * dim, dim) = phi.amplitudes;
  apply_hpo(lhs, basis, 0, inverse);

  Vec rhs = Vec::Zero(N * dim);
  const double amp = 1.0 / std::sqrt(static_cast<double>(N - lr));
  for (std::uint32_t partner = 0; partner < static_cast<std::uint32_t>(N); ++partner) {
    PhiState grown = inverse ? build_phi(basis, L, R.with_pair(partner, queried))
                             : build_phi(basis, L.with_pair(queried, partner), R);
    rhs.segment(partner * dim, dim) += amp * grown.amplitudes;
  }
  return (lhs - rhs).norm();
}

Vec CompressMap::apply(const Vec& v, unsigned m_anc) const {
  const std::int64_t N = family.basis->N();
  const std::int64_t anc = std::int64_t(1) << m_anc;
  const std::int64_t dim = family.basis->dim();
  const std::int64_t D = layout->total_dim();
  if (v.size() != N * anc * dim) throw contract_violation("CompressMap::apply: dimension mismatch");
  Vec out = Vec::Zero(N * D * anc);
  for (std::size_t k = 0; k < family.members.size(); ++k) {
    const Vec& phi = family.vectors[k];
    for (std::int64_t a = 0; a < N; ++a)
      for (std::int64_t bb = 0; bb < anc; ++bb) {
        cxd c = phi.dot(v.segment((a * anc + bb) * dim, dim));
        if (std::abs(c) == 0.0) continue;
        for (auto& [idx, coeff] : targets[k]) out[(a * D + idx) * anc + bb] += c * coeff;
      }
  }
  return out;
}

Vec CompressMap::adjoint_apply(const Vec& w, unsigned m_anc) const {
  const std::int64_t N = family.basis->N();
  const std::int64_t anc = std::int64_t(1) << m_anc;
  const std::int64_t dim = family.basis->dim();
  const std::int64_t D = layout->total_dim();
  if (w.size() != N * D * anc)
    throw contract_violation("CompressMap::adjoint_apply: dimension mismatch");
  Vec out = Vec::Zero(N * anc * dim);
  for (std::size_t k = 0; k < family.members.size(); ++k) {
    const Vec& phi = family.vectors[k];
    for (std::int64_t a = 0; a < N; ++a)
      for (std::int64_t bb = 0; bb < anc; ++bb) {
        cxd c = 0.0;
        for (auto& [idx, coeff] : targets[k]) c += std::conj(coeff) * w[(a * D + idx) * anc + bb];
        if (std::abs(c) == 0.0) continue;
        out.segment((a * anc + bb) * dim, dim) += c * phi;
      }
  }
  return out;
}

CompressMap build_compress(std::shared_ptr<const PurifiedBasis> basis,
                           std::shared_ptr<const VarLenLayout> layout, bool forward_only,
                           unsigned t_max) {
  CompressMap c;
  c.layout = layout;
  c.family = enumerate_phi_family(basis, t_max, forward_only);
  c.targets.reserve(c.family.members.size());
  for (const auto& [L, R] : c.family.members)
    c.targets.push_back(relations::relation_pair_state(*layout, L, R));
  return c;
}

CompressScalingReport check_compress_scaling(const PurifiedBasis& basis,
                                             const oracles::AdversarySpec& spec, const Mat& g_on_a) {
  if (!spec.forward_only())
    throw contract_violation("check_compress_scaling: forward-only specs only");
  const unsigned n = basis.n();
  const unsigned t = spec.t;
  const std::int64_t N = basis.N();
  const std::int64_t anc = std::int64_t(1) << spec.m;
  const std::int64_t dim = basis.dim();

  Vec psi = run_hpo_adversary(basis, spec, &g_on_a);

  auto layout = std::make_shared<VarLenLayout>(n, t, true);
  const std::int64_t D = layout->total_dim();

  // Compress . (size-t family projector): only size-t members contribute.
  auto rels_t = relations::enumerate_relations(n, t, RelationClass::DB);
  Vec lhs = Vec::Zero(N * D * anc);
  for (const auto& R : rels_t) {
    Vec phi = build_phi_forward(basis, R).amplitudes;
    auto target = relations::relation_state(*layout, R);
    for (std::int64_t a = 0; a < N; ++a)
      for (std::int64_t bb = 0; bb < anc; ++bb) {
        cxd c = phi.dot(psi.segment((a * anc + bb) * dim, dim));
        for (auto& [idx, coeff] : target) lhs[(a * D + idx) * anc + bb] += c * coeff;
      }
  }

  auto pr = oracles::build_pr(layout, t > 0 ? t - 1 : 0);
  Vec rhs = oracles::run_adversary_recording(pr, spec, &g_on_a);
  // distinct-block projector on the x side of sector t
  const auto& sect = layout->sector(t, 0);
  auto mask = relations::db_projector_x_mask(*layout, t);
  for (std::int64_t a = 0; a < N; ++a)
    for (std::int64_t i = 0; i < sect.dim; ++i)
      if (!mask[static_cast<std::size_t>(i)])
        for (std::int64_t bb = 0; bb < anc; ++bb) rhs[(a * D + sect.offset + i) * anc + bb] = 0.0;
  for (std::int64_t a = 0; a < N; ++a)
    for (const auto& s : layout->sectors()) {
      if (s.l == t) continue;
      for (std::int64_t i = 0; i < s.dim; ++i)
        for (std::int64_t bb = 0; bb < anc; ++bb) rhs[(a * D + s.offset + i) * anc + bb] = 0.0;
    }

  CompressScalingReport rep;
  double ratio = 1.0;
  for (unsigned i = 0; i < t; ++i)
    ratio *= static_cast<double>(N - i) / static_cast<double>(N - 2 * i);
  rep.formula_ratio = std::sqrt(ratio);
  // The two runs produce exactly parallel vectors; the constant relating
  // them is sqrt(prod (N - i) / (N - 2i)) when written as
  //   masked recording run = ratio * compressed purified run.
  const double lhs_sq = lhs.squaredNorm();
  rep.measured_ratio = lhs_sq > 0 ? std::real(lhs.dot(rhs)) / lhs_sq : 0.0;
  rep.residual = (rhs - rep.formula_ratio * lhs).norm();
  return rep;
}

namespace {

// Orthonormal basis vectors (dense) of dom(W) within sectors <= t, plus the
// matching basis of im(W) within sectors <= t.
struct WSupport {
  std::vector<Vec> dom;  // |x>|L,R> with x fresh, plus images of W^R
  std::vector<Vec> im;   // images of W^L from <= t-1, plus |y>|L,R> with y fresh
};

Vec dense_from_sparse(const SparseVec& sv, std::int64_t dim) {
  Vec v = Vec::Zero(dim);
  for (auto& [i, c] : sv) v[i] += c;
  return v;
}

// dom(W) restricted to sectors <= t is spanned by the fresh-input basis
// vectors together with the W^R images of fresh-output vectors one level
// down; im(W) symmetrically.  Both families are orthonormal.
WSupport w_support_bases(const VarLenLayout& layout, const oracles::WOperators& w, unsigned t) {
  WSupport out;
  const std::int64_t N = layout.N();
  const std::int64_t D = layout.total_dim();
  const unsigned n = layout.n();
  std::vector<std::vector<Relation>> panels;
  for (unsigned s = 0; s <= t; ++s)
    panels.push_back(relations::enumerate_relations(n, s, RelationClass::ALL));
  for (unsigned l = 0; l <= t; ++l)
    for (unsigned r = 0; l + r <= t; ++r) {
      for (const auto& L : panels[l])
        for (const auto& R : panels[r]) {
          Relation u = Relation::multiset_union(L, R);
          if (!u.in_class(RelationClass::DB)) continue;
          auto ps = relations::relation_pair_state(layout, L, R);
          for (std::int64_t a = 0; a < N; ++a) {
            const auto av = static_cast<std::uint32_t>(a);
            SparseVec lifted;
            lifted.reserve(ps.size());
            for (auto& [idx, c] : ps) lifted.emplace_back(a * D + idx, c);
            if (!u.bdom_contains(av)) {
              Vec v = dense_from_sparse(lifted, N * D);
              if (l + r + 1 <= t) out.im.push_back(w.WL.m * v);
              out.dom.push_back(std::move(v));
            }
            if (!u.bim_contains(av)) {
              Vec v = dense_from_sparse(lifted, N * D);
              if (l + r + 1 <= t) out.dom.push_back(w.WR.m * v);
              out.im.push_back(std::move(v));
            }
          }
        }
    }
  return out;
}

}  // namespace

WHpoReport check_w_hpo_closeness(std::shared_ptr<const PurifiedBasis> basis,
                                 std::shared_ptr<const VarLenLayout> layout, unsigned t) {
  const auto& lay = *layout;
  const std::int64_t N = lay.N();
  const std::int64_t D = lay.total_dim();
  auto w = oracles::build_w(layout, t);
  auto compress = build_compress(basis, layout, false, std::min(t + 1, lay.t_max()));

  // dom(W) and im(W) orthonormal bases within sectors <= t
  WSupport support = w_support_bases(lay, w, t);

  auto x_column = [&](const Vec& u, bool inverse) {
    Vec e = compress.adjoint_apply(u, 0);
    apply_hpo(e, *basis, 0, inverse);
    return compress.apply(e, 0);
  };

  WHpoReport rep;
  rep.bound = 2.0 * static_cast<double>(t) / static_cast<double>(N - t);

  {
    const auto K = static_cast<std::int64_t>(support.dom.size());
    Mat diff(N * D, K);
    for (std::int64_t k = 0; k < K; ++k)
      diff.col(k) = Vec(w.W.m * support.dom[static_cast<std::size_t>(k)]) -
                    x_column(support.dom[static_cast<std::size_t>(k)], false);
    Eigen::SelfAdjointEigenSolver<Mat> es(diff.adjoint() * diff, Eigen::EigenvaluesOnly);
    rep.norm_gap = K > 0 ? std::sqrt(std::max(0.0, es.eigenvalues().maxCoeff())) : 0.0;
  }
  {
    // W† restricted to inputs of total size <= t is W^L† plus the W^R
    // columns up to t (note: not the adjoint of the capped W, whose W^R
    // branch stops one level lower)
    oracles::SpMat wdag = oracles::SpMat(w.WL.m.adjoint()) + w.WR.m;
    const auto K = static_cast<std::int64_t>(support.im.size());
    Mat diff(N * D, K);
    for (std::int64_t k = 0; k < K; ++k)
      diff.col(k) = Vec(wdag * support.im[static_cast<std::size_t>(k)]) -
                    x_column(support.im[static_cast<std::size_t>(k)], true);
    Eigen::SelfAdjointEigenSolver<Mat> es(diff.adjoint() * diff, Eigen::EigenvaluesOnly);
    rep.adjoint_gap = K > 0 ? std::sqrt(std::max(0.0, es.eigenvalues().maxCoeff())) : 0.0;
  }

  if (t >= 1) {
    // a fresh input above one recorded pair
    Relation l1(lay.n(), {{0, 0}});
    Relation empty(lay.n(), {});
    auto ps = relations::relation_pair_state(lay, l1, empty);
    std::uint32_t x = 1;  // distinct block from 0 at any n >= 2
    while (kacwalk::same_block(x, 0, lay.n())) ++x;
    SparseVec lifted;
    for (auto& [idx, c] : ps) lifted.emplace_back(static_cast<std::int64_t>(x) * D + idx, c);
    Vec u = dense_from_sparse(lifted, N * D);
    Vec diff = Vec(w.W.m * u) - x_column(u, false);
    rep.sector1_column_norm = diff.norm();
    // amplitude mismatch on the recorded-pair support: project the
    // difference onto the target relation states the partial recorder
    // actually reaches
    double proj_sq = 0.0;
    for (std::uint32_t y = 0; y < static_cast<std::uint32_t>(N); ++y) {
      Relation u1 = Relation::multiset_union(l1, empty);
      if (u1.bim_contains(y)) continue;
      auto tgt = relations::relation_pair_state(lay, l1.with_pair(x, y), empty);
      SparseVec tgt_l;
      for (auto& [idx, c] : tgt) tgt_l.emplace_back(static_cast<std::int64_t>(y) * D + idx, c);
      cxd overlap = 0.0;
      for (auto& [idx, c] : tgt_l) overlap += std::conj(c) * diff[idx];
      proj_sq += std::norm(overlap);
    }
    rep.sector1_coeff_gap = std::sqrt(proj_sq);
  }
  return rep;
}

HfMoments hf_block_moments(unsigned d) {
  if (d > 10) throw contract_violation("hf_block_moments: d too large");
  const std::int64_t count = std::int64_t(1) << (3 * d);
  HfMoments m{};
  for (std::int64_t e = 0; e < count; ++e) {
    auto a = kacwalk::angles_from_entry(static_cast<std::uint64_t>(e), d);
    const double c = std::cos(a.theta), s = std::sin(a.theta);
    cxd h00 = std::polar(c, a.alpha);
    cxd h01 = -std::polar(s, a.beta);
    cxd h10 = std::polar(s, -a.beta);
    cxd h11 = std::polar(c, -a.alpha);
    m.diag += h00;
    m.offdiag += h01;
    m.cross += std::conj(h00) * h01;
    m.phase_diag += std::conj(h00) * h11;
    m.phase_offdiag += std::conj(h01) * h10;
  }
  const double inv = 1.0 / static_cast<double>(count);
  m.diag *= inv;
  m.offdiag *= inv;
  m.cross *= inv;
  m.phase_diag *= inv;
  m.phase_offdiag *= inv;
  return m;
}

namespace {
unsigned reg_digit_count(const VarLenLayout::Sector& s) { return 2 * (s.l + s.r); }

std::int64_t digit_of(const VarLenLayout& lay, const VarLenLayout::Sector& s, std::int64_t local,
                      unsigned reg) {
  const std::int64_t N = lay.N();
  const unsigned digits = reg_digit_count(s);
  std::int64_t div = 1;
  for (unsigned k = reg + 1; k < digits; ++k) div *= N;
  return (local / div) % N;
}
}  // namespace

Mat pairwise_eq_projector(const VarLenLayout& layout, unsigned l, unsigned r, unsigned reg) {
  const auto& s = layout.sector(l, r);
  const std::int64_t N = layout.N();
  Mat out = Mat::Zero(N * s.dim, N * s.dim);
  for (std::int64_t a = 0; a < N; ++a)
    for (std::int64_t i = 0; i < s.dim; ++i)
      if (digit_of(layout, s, i, reg) == a) out(a * s.dim + i, a * s.dim + i) = 1.0;
  return out;
}

Mat pairwise_ffb_projector(const VarLenLayout& layout, unsigned l, unsigned r, unsigned reg) {
  const auto& s = layout.sector(l, r);
  const std::int64_t N = layout.N();
  const unsigned n = layout.n();
  Mat out = Mat::Zero(N * s.dim, N * s.dim);
  for (std::int64_t a = 0; a < N; ++a)
    for (std::int64_t i = 0; i < s.dim; ++i)
      if (digit_of(layout, s, i, reg) ==
          static_cast<std::int64_t>(flip_first_bit(static_cast<std::uint64_t>(a), n)))
        out(a * s.dim + i, a * s.dim + i) = 1.0;
  return out;
}

Mat epr_projector(const VarLenLayout& layout, unsigned l, unsigned r, unsigned reg) {
  const auto& s = layout.sector(l, r);
  const std::int64_t N = layout.N();
  const unsigned digits = reg_digit_count(s);
  std::int64_t div = 1;
  for (unsigned k = reg + 1; k < digits; ++k) div *= N;
  Mat out = Mat::Zero(N * s.dim, N * s.dim);
  // (1/N) sum_{z,w} |z, z><w, w| between A and the chosen register
  for (std::int64_t rest_hi = 0; rest_hi < s.dim / (div * N); ++rest_hi)
    for (std::int64_t rest_lo = 0; rest_lo < div; ++rest_lo)
      for (std::int64_t z = 0; z < N; ++z)
        for (std::int64_t w = 0; w < N; ++w) {
          std::int64_t row_local = (rest_hi * N + z) * div + rest_lo;
          std::int64_t col_local = (rest_hi * N + w) * div + rest_lo;
          out(z * s.dim + row_local, w * s.dim + col_local) += 1.0 / static_cast<double>(N);
        }
  return out;
}

namespace {
Mat dense_block(const oracles::SpMat& m, std::int64_t row0, std::int64_t rows, std::int64_t col0,
                std::int64_t cols) {
  Mat out = Mat::Zero(rows, cols);
  for (int k = 0; k < m.outerSize(); ++k)
    for (oracles::SpMat::InnerIterator it(m, k); it; ++it)
      if (it.row() >= row0 && it.row() < row0 + rows && it.col() >= col0 && it.col() < col0 + cols)
        out(it.row() - row0, it.col() - col0) = it.value();
  return out;
}
using oracles::sector_block_with_a;
}  // namespace

DomImReport build_dom_im_projectors(std::shared_ptr<const VarLenLayout> layout, unsigned t_max) {
  const auto& lay = *layout;
  const std::int64_t N = lay.N();
  auto w = oracles::build_w(layout, t_max);
  oracles::SpMat wdag = oracles::SpMat(w.W.m.adjoint());
  oracles::SpMat dom = oracles::SpMat(wdag * w.W.m);
  oracles::SpMat im = oracles::SpMat(w.W.m * wdag);
  oracles::SpMat not_dom = oracles::pi_not_dom(lay, t_max);
  oracles::SpMat not_im = oracles::pi_not_im(lay, t_max);
  oracles::SpMat db = oracles::pi_db(lay, t_max);

  DomImReport rep;
  rep.ubound_min_eig = 1.0;
  for (const auto& s : lay.sectors()) {
    if (s.l + s.r > t_max) continue;
    Mat db_s = Mat::Zero(N * s.dim, N * s.dim);
    {
      Mat db_lr = dense_block(db, s.offset, s.dim, s.offset, s.dim);
      for (std::int64_t a = 0; a < N; ++a)
        db_s.block(a * s.dim, a * s.dim, s.dim, s.dim) = db_lr;
    }

    // dom side: DB ( notDom + coeff * sum_i EPR(A, R_X,i) ) DB
    {
      Mat inner = sector_block_with_a(not_dom, lay, s.l, s.r);
      if (s.r >= 1 && N - 2 * static_cast<std::int64_t>(s.l) - 2 * static_cast<std::int64_t>(s.r) + 2 > 0) {
        const double coeff = static_cast<double>(N) /
                             static_cast<double>(N - 2 * static_cast<std::int64_t>(s.l) -
                                                 2 * static_cast<std::int64_t>(s.r) + 2);
        for (unsigned i = 0; i < s.r; ++i)
          inner += coeff * epr_projector(lay, s.l, s.r, 2 * s.l + i);
      }
      Mat rhs = db_s * inner * db_s;
      Mat lhs = sector_block_with_a(dom, lay, s.l, s.r);
      rep.dom_residual = std::max(rep.dom_residual, (lhs - rhs).cwiseAbs().maxCoeff());
    }

    // image side: DB ( notIm + coeff * sum_i EPR(A, L_Y,i) ) DB
    {
      Mat inner = sector_block_with_a(not_im, lay, s.l, s.r);
      if (s.l >= 1 && N - 2 * static_cast<std::int64_t>(s.l) - 2 * static_cast<std::int64_t>(s.r) + 2 > 0) {
        const double coeff = static_cast<double>(N) /
                             static_cast<double>(N - 2 * static_cast<std::int64_t>(s.l) -
                                                 2 * static_cast<std::int64_t>(s.r) + 2);
        for (unsigned i = 0; i < s.l; ++i)
          inner += coeff * epr_projector(lay, s.l, s.r, s.l + i);
      }
      Mat rhs = db_s * inner * db_s;
      Mat lhs = sector_block_with_a(im, lay, s.l, s.r);
      rep.im_residual = std::max(rep.im_residual, (lhs - rhs).cwiseAbs().maxCoeff());
    }

    // PSD bound per sector (skip the empty sector where both sides are 0)
    if (s.l + s.r >= 1) {
      const double coeff = static_cast<double>(N) /
                           static_cast<double>(N - 2 * static_cast<std::int64_t>(s.l) -
                                               2 * static_cast<std::int64_t>(s.r) + 2);
      Mat db_comp = Mat::Zero(N * s.dim, N * s.dim);
      {
        oracles::SpMat dbc = oracles::pi_db_computational(lay, false);
        Mat dbc_lr = dense_block(dbc, s.offset, s.dim, s.offset, s.dim);
        for (std::int64_t a = 0; a < N; ++a)
          db_comp.block(a * s.dim, a * s.dim, s.dim, s.dim) = dbc_lr;
      }
      Mat inner = sector_block_with_a(not_dom, lay, s.l, s.r);
      if (s.r >= 1)
        for (unsigned i = 0; i < s.r; ++i)
          inner += coeff * epr_projector(lay, s.l, s.r, 2 * s.l + i);
      Mat j_dom = db_comp * inner * db_comp;
      Mat lhs = db_comp - j_dom;

      Mat rhs = Mat::Zero(N * s.dim, N * s.dim);
      for (unsigned i = 0; i < s.l; ++i) {
        rhs += pairwise_eq_projector(lay, s.l, s.r, i);
        rhs += pairwise_ffb_projector(lay, s.l, s.r, i);
      }
      for (unsigned i = 0; i < s.r; ++i)
        rhs += pairwise_ffb_projector(lay, s.l, s.r, 2 * s.l + i);
      if (s.r >= 1) {
        Mat id = Mat::Identity(N * s.dim, N * s.dim);
        const double slack =
            2.0 * std::sqrt(2.0 * static_cast<double>(s.l + s.r) / static_cast<double>(N));
        for (unsigned i = 0; i < s.r; ++i)
          rhs += coeff * (pairwise_eq_projector(lay, s.l, s.r, 2 * s.l + i) -
                          epr_projector(lay, s.l, s.r, 2 * s.l + i) + slack * id);
      }
      auto order = numerics::psd_order_check(lhs, rhs);
      rep.ubound_min_eig = std::min(rep.ubound_min_eig, order.min_eigenvalue);
    }
  }
  return rep;
}

}  // namespace kacpru::purified
