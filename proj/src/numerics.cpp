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

#include "kacpru/numerics.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>

namespace kacpru::numerics {

namespace {

void require(bool cond, const char* msg) {
  if (!cond) throw contract_violation(msg);
}

double hermiticity_defect(const Mat& m) {
  return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

}  // namespace

StateVector basis_state(const std::vector<std::int64_t>& dims, std::int64_t index) {
  std::int64_t total = 1;
  for (auto d : dims) total *= d;
  require(index >= 0 && index < total, "basis_state: index out of range");
  StateVector s;
  s.dims = dims;
  s.amplitudes = Vec::Zero(total);
  s.amplitudes[index] = 1.0;
  return s;
}

Operator Operator::dense(Mat m) {
  Operator op;
  op.kind_ = Kind::Dense;
  op.rows_ = m.rows();
  op.cols_ = m.cols();
  op.dense_ = std::move(m);
  return op;
}

Operator Operator::block_diagonal(std::vector<Mat> blocks) {
  Operator op;
  op.kind_ = Kind::BlockDiagonal;
  std::int64_t n = 0;
  for (const auto& b : blocks) {
    require(b.rows() == b.cols(), "block_diagonal: blocks must be square");
    n += b.rows();
  }
  op.rows_ = op.cols_ = n;
  op.blocks_ = std::move(blocks);
  return op;
}

Operator Operator::matrix_free(std::int64_t rows, std::int64_t cols, ApplyFn apply,
                               ApplyFn adjoint_apply) {
  Operator op;
  op.kind_ = Kind::MatrixFree;
  op.rows_ = rows;
  op.cols_ = cols;
  op.apply_ = std::move(apply);
  op.adjoint_apply_ = std::move(adjoint_apply);
  return op;
}

Vec Operator::apply(const Vec& v) const {
  require(v.size() == cols_, "Operator::apply: dimension mismatch");
  switch (kind_) {
    case Kind::Dense:
      return dense_ * v;
    case Kind::BlockDiagonal: {
      Vec out(rows_);
      std::int64_t off = 0;
      for (const auto& b : blocks_) {
        out.segment(off, b.rows()) = b * v.segment(off, b.rows());
        off += b.rows();
      }
      return out;
    }
    case Kind::MatrixFree:
      return apply_(v);
  }
  return Vec();
}

Vec Operator::adjoint_apply(const Vec& v) const {
  require(v.size() == rows_, "Operator::adjoint_apply: dimension mismatch");
  switch (kind_) {
    case Kind::Dense:
      return dense_.adjoint() * v;
    case Kind::BlockDiagonal: {
      Vec out(cols_);
      std::int64_t off = 0;
      for (const auto& b : blocks_) {
        out.segment(off, b.rows()) = b.adjoint() * v.segment(off, b.rows());
        off += b.rows();
      }
      return out;
    }
    case Kind::MatrixFree:
      return adjoint_apply_(v);
  }
  return Vec();
}

Mat Operator::to_dense(std::int64_t element_budget) const {
  if (kind_ == Kind::Dense) return dense_;
  if (rows_ * cols_ > element_budget)
    throw resource_error("Operator::to_dense: exceeds element budget");
  Mat out = Mat::Zero(rows_, cols_);
  if (kind_ == Kind::BlockDiagonal) {
    std::int64_t off = 0;
    for (const auto& b : blocks_) {
      out.block(off, off, b.rows(), b.cols()) = b;
      off += b.rows();
    }
    return out;
  }
  Vec e = Vec::Zero(cols_);
  for (std::int64_t j = 0; j < cols_; ++j) {
    e[j] = 1.0;
    out.col(j) = apply_(e);
    e[j] = 0.0;
  }
  return out;
}

double Operator::adjoint_consistency(RngStream& rng, int probes) const {
  double worst = 0.0;
  for (int p = 0; p < probes; ++p) {
    Vec u(rows_), v(cols_);
    for (std::int64_t i = 0; i < rows_; ++i) u[i] = cxd(rng.normal(), rng.normal());
    for (std::int64_t i = 0; i < cols_; ++i) v[i] = cxd(rng.normal(), rng.normal());
    u.normalize();
    v.normalize();
    cxd lhs = u.dot(apply(v));                        // <u|A v>
    cxd rhs = std::conj(v.dot(adjoint_apply(u)));     // conj(<v|A† u>)
    worst = std::max(worst, std::abs(lhs - rhs));
  }
  return worst;
}

DensityMatrix make_density(Mat m) {
  require(m.rows() == m.cols(), "make_density: must be square");
  require(hermiticity_defect(m) <= 1e-10, "make_density: not Hermitian");
  require(std::abs(m.trace() - cxd(1.0, 0.0)) <= 1e-8, "make_density: trace != 1");
  Eigen::SelfAdjointEigenSolver<Mat> es(m, Eigen::EigenvaluesOnly);
  require(es.eigenvalues().minCoeff() >= -1e-8, "make_density: negative eigenvalue");
  return DensityMatrix{std::move(m)};
}

Mat tensor_product(const Mat& a, const Mat& b, std::int64_t element_budget) {
  std::int64_t rows = a.rows() * b.rows();
  std::int64_t cols = a.cols() * b.cols();
  if (rows * cols > element_budget)
    throw resource_error("tensor_product: exceeds element budget");
  Mat out(rows, cols);
  for (std::int64_t i = 0; i < a.rows(); ++i)
    for (std::int64_t j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

StateVector tensor_product(const StateVector& a, const StateVector& b,
                           std::int64_t element_budget) {
  std::int64_t n = a.dim() * b.dim();
  if (n > element_budget) throw resource_error("tensor_product: exceeds element budget");
  StateVector out;
  out.dims = a.dims;
  out.dims.insert(out.dims.end(), b.dims.begin(), b.dims.end());
  out.amplitudes.resize(n);
  for (std::int64_t i = 0; i < a.dim(); ++i)
    out.amplitudes.segment(i * b.dim(), b.dim()) = a.amplitudes[i] * b.amplitudes;
  return out;
}

Mat partial_trace(const Mat& rho, const std::vector<std::int64_t>& dims,
                  const std::vector<int>& keep) {
  std::int64_t total = 1;
  for (auto d : dims) total *= d;
  require(rho.rows() == total && rho.cols() == total,
          "partial_trace: layout inconsistent with matrix dimension");

  std::vector<bool> kept(dims.size(), false);
  for (int k : keep) {
    require(k >= 0 && static_cast<std::size_t>(k) < dims.size(), "partial_trace: bad keep index");
    kept[static_cast<std::size_t>(k)] = true;
  }
  std::int64_t keep_dim = 1, trace_dim = 1;
  for (std::size_t r = 0; r < dims.size(); ++r) (kept[r] ? keep_dim : trace_dim) *= dims[r];

  // strides of each register in the big-endian flattening
  std::vector<std::int64_t> stride(dims.size());
  std::int64_t s = 1;
  for (std::size_t r = dims.size(); r-- > 0;) {
    stride[r] = s;
    s *= dims[r];
  }

  // enumerate (keep multi-index, trace multi-index) -> flat index
  auto flat = [&](std::int64_t keep_idx, std::int64_t trace_idx) {
    std::int64_t f = 0;
    std::int64_t kq = keep_idx, tq = trace_idx;
    // consume digits from least significant register upward
    for (std::size_t r = dims.size(); r-- > 0;) {
      std::int64_t d = dims[r];
      if (kept[r]) {
        f += (kq % d) * stride[r];
        kq /= d;
      } else {
        f += (tq % d) * stride[r];
        tq /= d;
      }
    }
    return f;
  };

  Mat out = Mat::Zero(keep_dim, keep_dim);
  for (std::int64_t i = 0; i < keep_dim; ++i)
    for (std::int64_t j = 0; j < keep_dim; ++j) {
      cxd acc = 0.0;
      for (std::int64_t t = 0; t < trace_dim; ++t) acc += rho(flat(i, t), flat(j, t));
      out(i, j) = acc;
    }
  return out;
}

double hermitian_one_norm(const Mat& m) {
  require(m.rows() == m.cols(), "hermitian_one_norm: must be square");
  require(hermiticity_defect(m) <= 1e-10, "hermitian_one_norm: not Hermitian");
  Eigen::SelfAdjointEigenSolver<Mat> es(m, Eigen::EigenvaluesOnly);
  return es.eigenvalues().cwiseAbs().sum();
}

double trace_distance(const Mat& rho, const Mat& eta) {
  require(rho.rows() == eta.rows() && rho.cols() == eta.cols(),
          "trace_distance: dimension mismatch");
  require(hermiticity_defect(rho) <= 1e-10 && hermiticity_defect(eta) <= 1e-10,
          "trace_distance: inputs must be Hermitian");
  return hermitian_one_norm(rho - eta);
}

NormResult operator_norm_info(const Operator& op, std::uint64_t seed, double tol, int max_iter) {
  NormResult best;
  if (op.rows() == 0 || op.cols() == 0) return best;

  if (op.is_dense() && std::max(op.rows(), op.cols()) <= 4096) {
    Mat a = op.to_dense();
    Mat gram = a.adjoint() * a;
    Eigen::SelfAdjointEigenSolver<Mat> es(gram, Eigen::EigenvaluesOnly);
    double lam = std::max(0.0, es.eigenvalues().maxCoeff());
    best.value = best.lower = best.upper = std::sqrt(lam);
    best.converged = true;
    return best;
  }

  // Power iteration on A†A with randomized restarts.
  RngStream rng(seed);
  const int restarts = 3;
  for (int r = 0; r < restarts; ++r) {
    Vec v(op.cols());
    for (std::int64_t i = 0; i < op.cols(); ++i) v[i] = cxd(rng.normal(), rng.normal());
    v.normalize();
    double rho = 0.0, res = 0.0;
    int it = 0;
    for (; it < max_iter; ++it) {
      Vec w = op.adjoint_apply(op.apply(v));
      rho = std::real(v.dot(w));
      res = (w - rho * v).norm();
      if (res <= tol * std::max(1.0, rho)) break;
      double nw = w.norm();
      if (nw == 0.0) {
        rho = 0.0;
        res = 0.0;
        break;
      }
      v = w / nw;
    }
    NormResult cur;
    cur.value = std::sqrt(std::max(0.0, rho));
    cur.lower = cur.value;
    cur.upper = std::sqrt(std::max(0.0, rho + res));
    cur.residual = res;
    cur.iterations = it;
    cur.converged = res <= tol * std::max(1.0, rho);
    if (cur.value > best.value || r == 0) {
      bool keep_convergence = best.converged && cur.value <= best.value;
      best = cur;
      best.converged = cur.converged || keep_convergence;
    }
  }
  return best;
}

double operator_norm(const Operator& op, std::uint64_t seed) {
  return operator_norm_info(op, seed).value;
}

double operator_norm(const Mat& m) { return operator_norm(Operator::dense(m)); }

PsdOrder psd_order_check(const Mat& a, const Mat& b, double tol) {
  require(a.rows() == a.cols() && b.rows() == b.cols() && a.rows() == b.rows(),
          "psd_order_check: dimension mismatch");
  Mat diff = b - a;
  require(hermiticity_defect(a) <= 1e-10 && hermiticity_defect(b) <= 1e-10,
          "psd_order_check: inputs must be Hermitian");
  Eigen::SelfAdjointEigenSolver<Mat> es(diff, Eigen::EigenvaluesOnly);
  double mineig = es.eigenvalues().minCoeff();
  return PsdOrder{mineig >= -tol, mineig};
}

Mat haar_unitary(std::int64_t n, RngStream& rng) {
  Mat g(n, n);
  for (std::int64_t i = 0; i < n; ++i)
    for (std::int64_t j = 0; j < n; ++j) g(i, j) = cxd(rng.normal(), rng.normal());
  Eigen::HouseholderQR<Mat> qr(g);
  Mat q = qr.householderQ();
  Mat r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (std::int64_t i = 0; i < n; ++i) {
    cxd d = r(i, i);
    cxd phase = (std::abs(d) == 0.0) ? cxd(1.0, 0.0) : d / std::abs(d);
    q.col(i) *= phase;
  }
  return q;
}

Vec haar_state(std::int64_t n, RngStream& rng) {
  Vec v(n);
  for (std::int64_t i = 0; i < n; ++i) v[i] = cxd(rng.normal(), rng.normal());
  v.normalize();
  return v;
}

Mat gram_matrix(const std::vector<Vec>& vectors) {
  std::size_t n = vectors.size();
  Mat g(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) g(i, j) = vectors[i].dot(vectors[j]);
  return g;
}

Mat random_density(std::int64_t n, int rank, RngStream& rng) {
  Mat rho = Mat::Zero(n, n);
  double total = 0.0;
  std::vector<double> w(static_cast<std::size_t>(rank));
  for (auto& x : w) {
    x = rng.uniform01() + 1e-3;
    total += x;
  }
  for (int k = 0; k < rank; ++k) {
    Vec psi = haar_state(n, rng);
    rho += (w[static_cast<std::size_t>(k)] / total) * (psi * psi.adjoint());
  }
  return rho;
}

}  // namespace kacpru::numerics
