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

#include <nlohmann/json.hpp>
#include <set>

#include "kacpru/relations.hpp"

using namespace kacpru;
using namespace kacpru::relations;
using kacpru::kacwalk::from_bits;

TEST_SUITE_BEGIN("relations");

TEST_CASE("domain and image sets with block closures") {
  Relation empty(2, {});
  CHECK(empty.dom().empty());
  CHECK(empty.bim().empty());

  Relation r(2, {{from_bits("00"), from_bits("01")}});
  CHECK(r.dom() == std::vector<std::uint32_t>{0});
  CHECK(r.bdom() == std::vector<std::uint32_t>({0, 2}));
  CHECK(r.im() == std::vector<std::uint32_t>{1});
  CHECK(r.bim() == std::vector<std::uint32_t>({1, 3}));
}

TEST_CASE("size-2 distinct-block relations have block image of size 4") {
  auto rels = enumerate_relations(3, 2, RelationClass::DB);
  CHECK(!rels.empty());
  for (const auto& r : rels) {
    CHECK(r.bim().size() == 4);
    CHECK(r.bdom().size() == 4);
  }
}

TEST_CASE("fresh block membership factorizes over the pair") {
  for (unsigned n = 2; n <= 3; ++n) {
    for (unsigned t = 0; t <= 2; ++t) {
      for (const auto& r : enumerate_relations(n, t, RelationClass::DB)) {
        const std::uint32_t N = 1u << n;
        for (std::uint32_t x = 0; x < N; ++x) {
          bool lhs = !r.bdom_contains(x);
          bool rhs = !r.dom_contains(x) &&
                     !r.dom_contains(static_cast<std::uint32_t>(kacwalk::flip_first_bit(x, n)));
          CHECK(lhs == rhs);
        }
      }
    }
  }
}

TEST_CASE("distinct-block tuples") {
  CHECK(is_distinct_blocks({5}, 3));
  CHECK(!is_distinct_blocks({2, static_cast<std::uint32_t>(kacwalk::flip_first_bit(2, 3))}, 3));

  // brute-force count of DB_2 at n = 3
  int count = 0;
  for (std::uint32_t a = 0; a < 8; ++a)
    for (std::uint32_t b = 0; b < 8; ++b)
      if (is_distinct_blocks({a, b}, 3)) ++count;
  CHECK(count == 48);
}

TEST_CASE("normalizer makes relation states unit vectors") {
  Relation single(2, {{0, 1}});
  CHECK(gamma_norm(single) == 1.0);

  Relation two(2, {{0, 1}, {1, 2}});
  CHECK(std::abs(gamma_norm(two) - std::sqrt(2.0)) < 1e-15);

  Relation dupe(2, {{0, 1}, {0, 1}});
  CHECK(std::abs(gamma_norm(dupe) - 2.0) < 1e-15);

  VarLenLayout layout(2, 2, true);
  auto sv = relation_state(layout, dupe);
  REQUIRE(sv.size() == 1);  // |xx>|yy> exactly
  CHECK(std::abs(sv[0].second - cxd(1.0, 0.0)) < 1e-15);

  // unit norm for every enumerated relation
  for (unsigned t = 0; t <= 2; ++t)
    for (const auto& r : enumerate_relations(2, t, RelationClass::ALL)) {
      double sq = 0.0;
      for (auto& [idx, c] : relation_state(layout, r)) sq += std::norm(c);
      CHECK(std::abs(sq - 1.0) < 1e-12);
    }
}

TEST_CASE("relation states of explicit small relations") {
  VarLenLayout layout(2, 2, true);
  Relation single(2, {{2, 1}});
  auto sv = relation_state(layout, single);
  REQUIRE(sv.size() == 1);
  const auto& sector = layout.sector(1, 0);
  CHECK(sv[0].first == sector.offset + 2 * 4 + 1);

  Relation two(2, {{0, 1}, {2, 2}});
  auto sv2 = relation_state(layout, two);
  REQUIRE(sv2.size() == 2);
  for (auto& [idx, c] : sv2) CHECK(std::abs(c - cxd(1.0 / std::sqrt(2.0), 0.0)) < 1e-15);
}

TEST_CASE("relation states do not depend on the listed pair order") {
  VarLenLayout layout(2, 2, true);
  Relation a(2, {{0, 1}, {1, 2}});
  Relation b(2, {{1, 2}, {0, 1}});
  CHECK(a == b);
  auto sa = relation_state(layout, a), sb = relation_state(layout, b);
  REQUIRE(sa.size() == sb.size());
  for (std::size_t i = 0; i < sa.size(); ++i) {
    CHECK(sa[i].first == sb[i].first);
    CHECK(std::abs(sa[i].second - sb[i].second) == 0.0);
  }
}

TEST_CASE("relation states form an orthonormal family") {
  VarLenLayout layout(2, 2, true);
  std::vector<numerics::Vec> states;
  for (unsigned t = 0; t <= 2; ++t)
    for (const auto& r : enumerate_relations(2, t, RelationClass::ALL)) {
      numerics::Vec v = numerics::Vec::Zero(layout.total_dim());
      for (auto& [idx, c] : relation_state(layout, r)) v[idx] += c;
      states.push_back(v);
    }
  numerics::Mat g = numerics::gram_matrix(states);
  numerics::Mat id = numerics::Mat::Identity(g.rows(), g.cols());
  CHECK((g - id).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("enumeration counts") {
  CHECK(enumerate_relations(2, 0, RelationClass::ALL).size() == 1);
  CHECK(enumerate_relations(2, 1, RelationClass::ALL).size() == 16);
  CHECK(enumerate_relations(2, 2, RelationClass::ALL).size() == 136);  // multisets over 16 pairs

  // distinct-block count matches a brute-force ordered filter
  auto db = enumerate_relations(2, 2, RelationClass::DB);
  std::set<std::vector<std::pair<std::uint32_t, std::uint32_t>>> seen;
  for (std::uint32_t x1 = 0; x1 < 4; ++x1)
    for (std::uint32_t y1 = 0; y1 < 4; ++y1)
      for (std::uint32_t x2 = 0; x2 < 4; ++x2)
        for (std::uint32_t y2 = 0; y2 < 4; ++y2) {
          if (!is_distinct_blocks({x1, x2}, 2) || !is_distinct_blocks({y1, y2}, 2)) continue;
          Relation r(2, {{x1, y1}, {x2, y2}});
          seen.insert(r.pairs());
        }
  CHECK(db.size() == seen.size());
  CHECK(db.size() == 32);
  CHECK_THROWS_AS(enumerate_relations(2, 2, RelationClass::ALL, 10), resource_error);
}

TEST_CASE("x-side distinct-block mask on a forward register") {
  VarLenLayout layout(3, 2, true);
  auto mask1 = db_projector_x_mask(layout, 1);
  for (bool b : mask1) CHECK(b);

  auto mask2 = db_projector_x_mask(layout, 2);
  std::int64_t rank = 0;
  for (bool b : mask2) rank += b ? 1 : 0;
  CHECK(rank == 48 * 64);  // 48 x-tuples, free y register
}

TEST_CASE("layout sector arithmetic round-trips") {
  VarLenLayout layout(2, 2, false);
  CHECK(layout.total_dim() == 1 + 2 * 16 + 3 * 256);
  std::vector<std::uint32_t> xl, yl, xr, yr;
  for (const auto& s : layout.sectors())
    for (std::int64_t i = 0; i < s.dim; i += 7) {
      layout.decompose(s, i, xl, yl, xr, yr);
      CHECK(layout.compose(s, xl, yl, xr, yr) == i);
    }
}

TEST_CASE("relation JSON round trip") {
  Relation r(3, {{from_bits("010"), from_bits("001")}, {from_bits("100"), from_bits("111")}});
  auto j = relation_to_json(r);
  Relation back = relation_from_json(3, j);
  CHECK(r == back);
}

TEST_SUITE_END();
