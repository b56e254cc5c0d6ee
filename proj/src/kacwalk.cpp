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

#include "kacpru/kacwalk.hpp"

#include <cmath>
#include <numeric>
#include <sstream>

#include <nlohmann/json.hpp>

namespace kacpru::kacwalk {

namespace {
constexpr double kTwoPi = 6.283185307179586476925287;
}

double val_bits(const std::string& bits) {
  if (bits.empty()) throw contract_violation("val: empty bit string");
  double v = 0.0, w = 0.5;
  for (char c : bits) {
    if (c != '0' && c != '1') throw contract_violation("val: non-binary character");
    if (c == '1') v += w;
    w *= 0.5;
  }
  return v;
}

double val_index(std::uint64_t x, unsigned k) {
  // low k bits of x, first (most significant) bit weighted 1/2
  return static_cast<double>(x & ((std::uint64_t(1) << k) - 1)) / static_cast<double>(std::uint64_t(1) << k);
}

std::string to_bits(std::uint64_t x, unsigned n) {
  std::string s(n, '0');
  for (unsigned i = 0; i < n; ++i)
    if (x >> (n - 1 - i) & 1) s[i] = '1';
  return s;
}

std::uint64_t from_bits(const std::string& bits) {
  std::uint64_t x = 0;
  for (char c : bits) {
    if (c != '0' && c != '1') throw contract_violation("from_bits: non-binary character");
    x = (x << 1) | static_cast<std::uint64_t>(c == '1');
  }
  return x;
}

bool Permutation::is_bijection() const {
  std::vector<bool> seen(image.size(), false);
  for (auto y : image) {
    if (y >= image.size() || seen[y]) return false;
    seen[y] = true;
  }
  return true;
}

Permutation Permutation::inverse() const {
  Permutation inv;
  inv.image.resize(image.size());
  for (std::uint32_t x = 0; x < image.size(); ++x) inv.image[image[x]] = x;
  return inv;
}

void KacParams::validate() const {
  if (n < 2) throw usage_error("KacParams: n must be >= 2 (blocks need a nonempty suffix)");
  if (d < 1) throw usage_error("KacParams: d must be >= 1");
  if (3 * d > 63) throw usage_error("KacParams: 3d must fit in 63 bits");
}

Angles angles_from_entry(std::uint64_t entry, unsigned d) {
  std::uint64_t f_alpha = (entry >> (2 * d)) & ((std::uint64_t(1) << d) - 1);
  std::uint64_t f_beta = (entry >> d) & ((std::uint64_t(1) << d) - 1);
  std::uint64_t f_theta = entry & ((std::uint64_t(1) << d) - 1);
  Angles a;
  a.alpha = kTwoPi * val_index(f_alpha, d);
  a.beta = kTwoPi * val_index(f_beta, d);
  a.theta = std::asin(std::sqrt(val_index(f_theta, d)));
  return a;
}

Mat rotation_u(double alpha, double beta, double theta) {
  Mat u(2, 2);
  double c = std::cos(theta), s = std::sin(theta);
  u(0, 0) = std::polar(c, alpha);
  u(0, 1) = -std::polar(s, beta);
  u(1, 0) = std::polar(s, -beta);
  u(1, 1) = std::polar(c, -alpha);
  return u;
}

void apply_hf(Vec& state, const FunctionTable& f) {
  const std::int64_t N = std::int64_t(1) << f.n;
  if (state.size() != N) throw contract_violation("apply_hf: dimension mismatch");
  const std::int64_t half = N / 2;
  for (std::int64_t y = 0; y < half; ++y) {
    Angles a = angles_from_entry(f.table[static_cast<std::size_t>(y)], f.d);
    double c = std::cos(a.theta), s = std::sin(a.theta);
    cxd u00 = std::polar(c, a.alpha);
    cxd u01 = -std::polar(s, a.beta);
    cxd u10 = std::polar(s, -a.beta);
    cxd u11 = std::polar(c, -a.alpha);
    cxd a0 = state[y];         // |0y>
    cxd a1 = state[y + half];  // |1y>
    state[y] = u00 * a0 + u01 * a1;
    state[y + half] = u10 * a0 + u11 * a1;
  }
}

void apply_perm(Vec& state, const Permutation& sigma, bool inverse) {
  const std::int64_t N = static_cast<std::int64_t>(sigma.size());
  if (state.size() != N) throw contract_violation("apply_perm: dimension mismatch");
  Vec out(N);
  if (!inverse) {
    for (std::int64_t x = 0; x < N; ++x) out[sigma.image[static_cast<std::size_t>(x)]] = state[x];
  } else {
    for (std::int64_t x = 0; x < N; ++x) out[x] = state[sigma.image[static_cast<std::size_t>(x)]];
  }
  state.swap(out);
}

void apply_walk(Vec& state, const WalkUnitary& walk, bool adjoint) {
  if (!adjoint) {
    for (const auto& [f, sigma] : walk.steps) {
      apply_perm(state, sigma, false);
      apply_hf(state, f);
    }
  } else {
    for (auto it = walk.steps.rbegin(); it != walk.steps.rend(); ++it) {
      // adjoint of H_f then adjoint of P_sigma
      const std::int64_t N = std::int64_t(1) << it->first.n;
      const std::int64_t half = N / 2;
      for (std::int64_t y = 0; y < half; ++y) {
        Angles a = angles_from_entry(it->first.table[static_cast<std::size_t>(y)], it->first.d);
        double c = std::cos(a.theta), s = std::sin(a.theta);
        // conjugate transpose of rotation_u
        cxd u00 = std::polar(c, -a.alpha);
        cxd u01 = std::polar(s, a.beta);
        cxd u10 = -std::polar(s, -a.beta);
        cxd u11 = std::polar(c, a.alpha);
        cxd a0 = state[y];
        cxd a1 = state[y + half];
        state[y] = u00 * a0 + u01 * a1;
        state[y + half] = u10 * a0 + u11 * a1;
      }
      apply_perm(state, it->second, true);
    }
  }
}

FunctionTable sample_function(unsigned n, unsigned d, RngStream& rng) {
  FunctionTable f;
  f.n = n;
  f.d = d;
  f.table.resize(std::size_t(1) << (n - 1));
  for (auto& e : f.table) e = rng.bits(3 * d);
  return f;
}

Permutation sample_permutation(unsigned n, RngStream& rng) {
  Permutation p;
  p.image.resize(std::size_t(1) << n);
  std::iota(p.image.begin(), p.image.end(), 0u);
  rng.shuffle(p.image);
  return p;
}

WalkUnitary sample_walk(const KacParams& params, RngStream& rng) {
  params.validate();
  WalkUnitary w;
  w.n = params.n;
  w.d = params.d;
  w.steps.reserve(params.T);
  for (unsigned i = 0; i < params.T; ++i) {
    FunctionTable f = sample_function(params.n, params.d, rng);
    Permutation sigma = sample_permutation(params.n, rng);
    w.steps.emplace_back(std::move(f), std::move(sigma));
  }
  return w;
}

Mat dense_hf(const FunctionTable& f) {
  const std::int64_t N = std::int64_t(1) << f.n;
  Mat m = Mat::Zero(N, N);
  const std::int64_t half = N / 2;
  for (std::int64_t y = 0; y < half; ++y) {
    Angles a = angles_from_entry(f.table[static_cast<std::size_t>(y)], f.d);
    Mat u = rotation_u(a.alpha, a.beta, a.theta);
    m(y, y) = u(0, 0);
    m(y, y + half) = u(0, 1);
    m(y + half, y) = u(1, 0);
    m(y + half, y + half) = u(1, 1);
  }
  return m;
}

Mat dense_perm(const Permutation& sigma) {
  const std::int64_t N = static_cast<std::int64_t>(sigma.size());
  Mat m = Mat::Zero(N, N);
  for (std::int64_t x = 0; x < N; ++x) m(sigma.image[static_cast<std::size_t>(x)], x) = 1.0;
  return m;
}

Mat compose_dense(const WalkUnitary& walk, std::int64_t dense_cap) {
  const std::int64_t N = std::int64_t(1) << walk.n;
  if (N > dense_cap) throw resource_error("compose_dense: N exceeds dense cap");
  Mat m = Mat::Identity(N, N);
  for (const auto& [f, sigma] : walk.steps) m = dense_hf(f) * dense_perm(sigma) * m;
  return m;
}

nlohmann::json walk_to_json(const WalkUnitary& walk) {
  nlohmann::json steps = nlohmann::json::array();
  const unsigned hex_digits = (3 * walk.d + 3) / 4;
  for (const auto& [f, sigma] : walk.steps) {
    nlohmann::json fs = nlohmann::json::array();
    for (auto e : f.table) {
      std::ostringstream os;
      os.width(hex_digits);
      os.fill('0');
      os << std::hex << e;
      fs.push_back(os.str());
    }
    steps.push_back({{"f", fs}, {"sigma", sigma.image}});
  }
  return {{"n", walk.n}, {"d", walk.d}, {"T", walk.T()}, {"steps", steps}};
}

WalkUnitary walk_from_json(const nlohmann::json& j) {
  WalkUnitary w;
  w.n = j.at("n").get<unsigned>();
  w.d = j.at("d").get<unsigned>();
  for (const auto& step : j.at("steps")) {
    FunctionTable f;
    f.n = w.n;
    f.d = w.d;
    for (const auto& hex : step.at("f"))
      f.table.push_back(std::stoull(hex.get<std::string>(), nullptr, 16));
    Permutation sigma;
    sigma.image = step.at("sigma").get<std::vector<std::uint32_t>>();
    if (!sigma.is_bijection()) throw contract_violation("walk_from_json: sigma not a bijection");
    w.steps.emplace_back(std::move(f), std::move(sigma));
  }
  return w;
}

}  // namespace kacpru::kacwalk
