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

#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <vector>

#include "kacpru/common.hpp"
#include "kacpru/rng.hpp"

namespace kacpru::numerics {

using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;

// Dimension above which tensor_product refuses to materialize the result.
inline constexpr std::int64_t kDefaultElementBudget = std::int64_t(1) << 28;

// A ket with an ordered register layout (big-endian: the first register is
// the most significant index factor).
struct StateVector {
  Vec amplitudes;
  std::vector<std::int64_t> dims;

  std::int64_t dim() const { return amplitudes.size(); }
  double norm() const { return amplitudes.norm(); }
};

StateVector basis_state(const std::vector<std::int64_t>& dims, std::int64_t index);

// An operator in one of three representations: a dense matrix, a
// block-diagonal family over an index set, or a matrix-free apply/adjoint
// pair.  The block-diagonal blocks occupy consecutive index ranges.
class Operator {
 public:
  using ApplyFn = std::function<Vec(const Vec&)>;

  static Operator dense(Mat m);
  static Operator block_diagonal(std::vector<Mat> blocks);
  static Operator matrix_free(std::int64_t rows, std::int64_t cols, ApplyFn apply, ApplyFn adjoint_apply);

  std::int64_t rows() const { return rows_; }
  std::int64_t cols() const { return cols_; }
  bool is_dense() const { return kind_ == Kind::Dense; }

  Vec apply(const Vec& v) const;
  Vec adjoint_apply(const Vec& v) const;

  // Materializes a dense matrix; guarded by the element budget.
  Mat to_dense(std::int64_t element_budget = kDefaultElementBudget) const;

  // Checks <u|A v> == conj(<v|A† u>) on `probes` random probe pairs.
  // Returns the largest discrepancy found.
  double adjoint_consistency(RngStream& rng, int probes = 8) const;

 private:
  enum class Kind { Dense, BlockDiagonal, MatrixFree };
  Kind kind_ = Kind::Dense;
  std::int64_t rows_ = 0, cols_ = 0;
  Mat dense_;
  std::vector<Mat> blocks_;
  ApplyFn apply_, adjoint_apply_;
};

struct DensityMatrix {
  Mat entries;

  std::int64_t dim() const { return entries.rows(); }
};

// Validates Hermiticity (1e-10), unit trace (1e-8) and spectrum >= -1e-8.
DensityMatrix make_density(Mat m);

// Kronecker products with the big-endian index convention (left factor most
// significant).  Throws resource_error past the element budget.
Mat tensor_product(const Mat& a, const Mat& b, std::int64_t element_budget = kDefaultElementBudget);
StateVector tensor_product(const StateVector& a, const StateVector& b,
                           std::int64_t element_budget = kDefaultElementBudget);

// Partial trace keeping the registers listed in `keep` (indices into
// `dims`), in their original order.  An empty keep-set yields the 1x1 trace.
Mat partial_trace(const Mat& rho, const std::vector<std::int64_t>& dims,
                  const std::vector<int>& keep);

// Trace distance ||rho - eta||_1 (sum of absolute eigenvalues of the
// difference; no 1/2 factor).  Inputs must be Hermitian to 1e-10.
double trace_distance(const Mat& rho, const Mat& eta);

// One-norm of a single Hermitian matrix (sum of |eigenvalues|).
double hermitian_one_norm(const Mat& m);

struct NormResult {
  double value = 0.0;          // best estimate of the largest singular value
  double lower = 0.0;          // certified lower bound (Rayleigh quotient)
  double upper = 0.0;          // lower + residual slack
  double residual = 0.0;       // ||A†A v - rho v|| at the returned vector
  int iterations = 0;
  bool converged = true;
};

// Largest singular value.  Dense inputs of dimension <= 4096 use a dense
// eigensolver of A†A; matrix-free inputs use power iteration on A†A with
// tolerance 1e-8 and 3 randomized restarts.  Non-convergence is reported in
// the result, never silently accepted.
NormResult operator_norm_info(const Operator& op, std::uint64_t seed = 12345,
                              double tol = 1e-8, int max_iter = 10000);
double operator_norm(const Operator& op, std::uint64_t seed = 12345);
double operator_norm(const Mat& m);

// PSD order a <= b: true iff min eigenvalue of (b - a) >= -1e-8.
// Both inputs must be Hermitian.
struct PsdOrder {
  bool holds = false;
  double min_eigenvalue = 0.0;
};
PsdOrder psd_order_check(const Mat& a, const Mat& b, double tol = 1e-8);

// Haar-random unitary: complex Gaussian (Ginibre) matrix, QR decomposition,
// then each column of Q is multiplied by the phase of the matching diagonal
// entry of R.  This is the textbook-exact Haar scheme.
Mat haar_unitary(std::int64_t n, RngStream& rng);

// Haar-random pure state of dimension n.
Vec haar_state(std::int64_t n, RngStream& rng);

// G[i][j] = <v_i | v_j>.
Mat gram_matrix(const std::vector<Vec>& vectors);

// Random density matrix (mixture of Haar kets); test utility.
Mat random_density(std::int64_t n, int rank, RngStream& rng);

}  // namespace kacpru::numerics
