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

#include "kacpru/relations.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include <nlohmann/json.hpp>

namespace kacpru::relations {

using kacwalk::flip_first_bit;
using kacwalk::suffix_of;

Relation::Relation(unsigned n, std::vector<std::pair<std::uint32_t, std::uint32_t>> pairs)
    : n_(n), pairs_(std::move(pairs)) {
  const std::uint32_t N = std::uint32_t(1) << n;
  std::sort(pairs_.begin(), pairs_.end());
  std::set<std::uint32_t> dom, im, bdom, bim;
  for (auto [x, y] : pairs_) {
    if (x >= N || y >= N) throw contract_violation("Relation: pair out of range");
    dom.insert(x);
    im.insert(y);
    bdom.insert(x);
    bdom.insert(static_cast<std::uint32_t>(flip_first_bit(x, n)));
    bim.insert(y);
    bim.insert(static_cast<std::uint32_t>(flip_first_bit(y, n)));
  }
  dom_.assign(dom.begin(), dom.end());
  im_.assign(im.begin(), im.end());
  bdom_.assign(bdom.begin(), bdom.end());
  bim_.assign(bim.begin(), bim.end());
}

namespace {
bool sorted_contains(const std::vector<std::uint32_t>& v, std::uint32_t x) {
  return std::binary_search(v.begin(), v.end(), x);
}
}  // namespace

bool Relation::dom_contains(std::uint32_t x) const { return sorted_contains(dom_, x); }
bool Relation::im_contains(std::uint32_t y) const { return sorted_contains(im_, y); }
bool Relation::bdom_contains(std::uint32_t x) const { return sorted_contains(bdom_, x); }
bool Relation::bim_contains(std::uint32_t y) const { return sorted_contains(bim_, y); }

bool Relation::x_side_distinct_blocks() const {
  std::set<std::uint64_t> suffixes;
  for (auto [x, y] : pairs_)
    if (!suffixes.insert(suffix_of(x, n_)).second) return false;
  return true;
}

bool Relation::y_side_distinct_blocks() const {
  std::set<std::uint64_t> suffixes;
  for (auto [x, y] : pairs_)
    if (!suffixes.insert(suffix_of(y, n_)).second) return false;
  return true;
}

bool Relation::in_class(RelationClass c) const {
  switch (c) {
    case RelationClass::ALL:
      return true;
    case RelationClass::yDB:
      return y_side_distinct_blocks();
    case RelationClass::DB:
      return x_side_distinct_blocks() && y_side_distinct_blocks();
  }
  return false;
}

Relation Relation::with_pair(std::uint32_t x, std::uint32_t y) const {
  auto p = pairs_;
  p.emplace_back(x, y);
  return Relation(n_, std::move(p));
}

Relation Relation::multiset_union(const Relation& a, const Relation& b) {
  if (a.n_ != b.n_ && a.size() != 0 && b.size() != 0)
    throw contract_violation("multiset_union: mismatched n");
  auto p = a.pairs_;
  p.insert(p.end(), b.pairs_.begin(), b.pairs_.end());
  return Relation(a.size() ? a.n_ : b.n_, std::move(p));
}

std::size_t Relation::multiplicity(std::uint32_t x, std::uint32_t y) const {
  auto range = std::equal_range(pairs_.begin(), pairs_.end(), std::make_pair(x, y));
  return static_cast<std::size_t>(range.second - range.first);
}

bool is_distinct_blocks(const std::vector<std::uint32_t>& tuple, unsigned n) {
  for (std::size_t i = 0; i < tuple.size(); ++i)
    for (std::size_t j = i + 1; j < tuple.size(); ++j)
      if (suffix_of(tuple[i], n) == suffix_of(tuple[j], n)) return false;
  return true;
}

double gamma_norm(const Relation& r) {
  if (r.size() > (std::size_t(1) << r.n())) throw contract_violation("gamma_norm: |R| > N");
  double t_factorial = 1.0;
  for (std::size_t i = 2; i <= r.size(); ++i) t_factorial *= static_cast<double>(i);
  double mult_product = 1.0;
  std::size_t i = 0;
  const auto& p = r.pairs();
  while (i < p.size()) {
    std::size_t j = i;
    while (j < p.size() && p[j] == p[i]) ++j;
    double f = 1.0;
    for (std::size_t k = 2; k <= j - i; ++k) f *= static_cast<double>(k);
    mult_product *= f;
    i = j;
  }
  return std::sqrt(t_factorial * mult_product);
}

namespace {
void enumerate_rec(unsigned n, unsigned t, RelationClass cls, std::uint64_t min_pair,
                   std::vector<std::pair<std::uint32_t, std::uint32_t>>& acc,
                   std::vector<Relation>& out, std::size_t budget) {
  if (acc.size() == t) {
    Relation r(n, acc);
    if (r.in_class(cls)) {
      if (out.size() >= budget) throw resource_error("enumerate_relations: budget exceeded");
      out.push_back(std::move(r));
    }
    return;
  }
  const std::uint64_t N = std::uint64_t(1) << n;
  for (std::uint64_t code = min_pair; code < N * N; ++code) {
    auto x = static_cast<std::uint32_t>(code >> n);
    auto y = static_cast<std::uint32_t>(code & (N - 1));
    // prune: repeated y-blocks can never enter a yDB/DB relation
    if (cls != RelationClass::ALL) {
      bool clash = false;
      for (auto [px, py] : acc) {
        if (suffix_of(py, n) == suffix_of(y, n)) clash = true;
        if (cls == RelationClass::DB && suffix_of(px, n) == suffix_of(x, n)) clash = true;
      }
      if (clash) continue;
    }
    acc.emplace_back(x, y);
    enumerate_rec(n, t, cls, code, acc, out, budget);
    acc.pop_back();
  }
}
}  // namespace

std::vector<Relation> enumerate_relations(unsigned n, unsigned t, RelationClass cls,
                                          std::size_t budget) {
  const double N2 = std::pow(2.0, 2.0 * n);
  double estimate = 1.0;
  for (unsigned i = 0; i < t; ++i) estimate *= N2;  // loose upper bound on the walk
  if (estimate > 1e12) throw resource_error("enumerate_relations: enumeration infeasible");
  std::vector<Relation> out;
  std::vector<std::pair<std::uint32_t, std::uint32_t>> acc;
  enumerate_rec(n, t, cls, 0, acc, out, budget);
  return out;
}

VarLenLayout::VarLenLayout(unsigned n, unsigned t_max, bool forward_only)
    : n_(n), t_max_(t_max), forward_only_(forward_only) {
  const std::int64_t N = std::int64_t(1) << n;
  std::int64_t offset = 0;
  auto add_sector = [&](unsigned l, unsigned r) {
    Sector s;
    s.l = l;
    s.r = r;
    s.dim = 1;
    for (unsigned i = 0; i < 2 * (l + r); ++i) s.dim *= N;
    s.offset = offset;
    offset += s.dim;
    index_[{l, r}] = sectors_.size();
    sectors_.push_back(s);
  };
  if (forward_only) {
    for (unsigned t = 0; t <= t_max; ++t) add_sector(t, 0);
  } else {
    for (unsigned total = 0; total <= t_max; ++total)
      for (unsigned l = 0; l <= total; ++l) add_sector(l, total - l);
  }
  total_dim_ = offset;
}

const VarLenLayout::Sector& VarLenLayout::sector(unsigned l, unsigned r) const {
  auto it = index_.find({l, r});
  if (it == index_.end()) throw contract_violation("VarLenLayout: no such sector");
  return sectors_[it->second];
}

bool VarLenLayout::has_sector(unsigned l, unsigned r) const {
  return index_.count({l, r}) != 0;
}

void VarLenLayout::decompose(const Sector& s, std::int64_t local, std::vector<std::uint32_t>& xl,
                             std::vector<std::uint32_t>& yl, std::vector<std::uint32_t>& xr,
                             std::vector<std::uint32_t>& yr) const {
  const std::int64_t N = std::int64_t(1) << n_;
  xl.resize(s.l);
  yl.resize(s.l);
  xr.resize(s.r);
  yr.resize(s.r);
  auto take = [&](std::vector<std::uint32_t>& v) {
    for (std::size_t i = v.size(); i-- > 0;) {
      v[i] = static_cast<std::uint32_t>(local % N);
      local /= N;
    }
  };
  take(yr);
  take(xr);
  take(yl);
  take(xl);
}

std::int64_t VarLenLayout::compose(const Sector& s, const std::vector<std::uint32_t>& xl,
                                   const std::vector<std::uint32_t>& yl,
                                   const std::vector<std::uint32_t>& xr,
                                   const std::vector<std::uint32_t>& yr) const {
  const std::int64_t N = std::int64_t(1) << n_;
  std::int64_t idx = 0;
  auto put = [&](const std::vector<std::uint32_t>& v) {
    for (auto x : v) idx = idx * N + x;
  };
  put(xl);
  put(yl);
  put(xr);
  put(yr);
  (void)s;
  return idx;
}

namespace {

// Symmetrized single relation state as (x-tuple index, y-tuple index,
// coefficient) triples in a t-pair register.
struct TupleTerm {
  std::int64_t x_idx;
  std::int64_t y_idx;
  double coeff;
};

std::vector<TupleTerm> symmetrize(const Relation& R) {
  const std::int64_t N = std::int64_t(1) << R.n();
  const auto& pairs = R.pairs();
  const std::size_t t = pairs.size();
  std::vector<std::size_t> order(t);
  std::iota(order.begin(), order.end(), 0);
  std::map<std::pair<std::int64_t, std::int64_t>, double> terms;
  do {
    std::int64_t xi = 0, yi = 0;
    for (std::size_t slot = 0; slot < t; ++slot) {
      xi = xi * N + pairs[order[slot]].first;
      yi = yi * N + pairs[order[slot]].second;
    }
    terms[{xi, yi}] += 1.0;
  } while (std::next_permutation(order.begin(), order.end()));
  const double gamma = gamma_norm(R);
  std::vector<TupleTerm> out;
  out.reserve(terms.size());
  for (auto& [key, c] : terms) out.push_back({key.first, key.second, c / gamma});
  return out;
}

}  // namespace

SparseVec relation_pair_state(const VarLenLayout& layout, const Relation& L, const Relation& R) {
  const auto& s = layout.sector(static_cast<unsigned>(L.size()), static_cast<unsigned>(R.size()));
  std::int64_t N = layout.N();
  std::int64_t dimYr = 1, dimXr = 1, dimYl = 1;
  for (unsigned i = 0; i < s.r; ++i) dimYr *= N;
  for (unsigned i = 0; i < s.r; ++i) dimXr *= N;
  for (unsigned i = 0; i < s.l; ++i) dimYl *= N;
  auto left = symmetrize(L);
  auto right = symmetrize(R);
  SparseVec out;
  out.reserve(left.size() * right.size());
  for (const auto& a : left)
    for (const auto& b : right) {
      std::int64_t local = ((a.x_idx * dimYl + a.y_idx) * dimXr + b.x_idx) * dimYr + b.y_idx;
      out.emplace_back(s.offset + local, a.coeff * b.coeff);
    }
  return out;
}

SparseVec relation_state(const VarLenLayout& layout, const Relation& R) {
  return relation_pair_state(layout, R, Relation(R.n(), {}));
}

std::vector<bool> db_projector_x_mask(const VarLenLayout& layout, unsigned t) {
  const auto& s = layout.sector(t, 0);
  std::vector<bool> mask(static_cast<std::size_t>(s.dim), false);
  std::vector<std::uint32_t> xl, yl, xr, yr;
  for (std::int64_t local = 0; local < s.dim; ++local) {
    layout.decompose(s, local, xl, yl, xr, yr);
    mask[static_cast<std::size_t>(local)] = is_distinct_blocks(xl, layout.n());
  }
  return mask;
}

nlohmann::json relation_to_json(const Relation& r) {
  nlohmann::json arr = nlohmann::json::array();
  for (auto [x, y] : r.pairs())
    arr.push_back({kacwalk::to_bits(x, r.n()), kacwalk::to_bits(y, r.n())});
  return arr;
}

Relation relation_from_json(unsigned n, const nlohmann::json& j) {
  std::vector<std::pair<std::uint32_t, std::uint32_t>> pairs;
  for (const auto& e : j)
    pairs.emplace_back(static_cast<std::uint32_t>(kacwalk::from_bits(e.at(0).get<std::string>())),
                       static_cast<std::uint32_t>(kacwalk::from_bits(e.at(1).get<std::string>())));
  return Relation(n, std::move(pairs));
}

}  // namespace kacpru::relations
