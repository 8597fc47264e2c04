// SPDX-License-Identifier: Apache-2.0
//
// relaybc: joint source/relay precoding for MIMO relaying broadcast channels
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#pragma once

#include <complex>

#include <Eigen/Cholesky>
#include <Eigen/Core>

namespace relaybc {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;

namespace tolerance {
// Largest tolerated |M - M^H| entry, relative to max(1, max|M|).
inline constexpr double kHermitian = 1e-10;
// Relative Frobenius residual expected of solve_hpd.
inline constexpr double kSolveResidual = 1e-10;
}  // namespace tolerance

/// Hermitian part (M + M^H) / 2.
ComplexMatrix hermitian_part(const ComplexMatrix& m);

/// Largest entry of |M - M^H|.
double hermitian_defect(const ComplexMatrix& m);

bool all_finite(const ComplexMatrix& m);

/// A Hermitian positive definite matrix together with its Cholesky factor.
///
/// Construction symmetrizes the input and factorizes it once; every later
/// solve or log-determinant reuses the factor. Instances are immutable.
class HpdMatrix {
 public:
  /// Throws FactorizationFailure when the input is not square, not Hermitian
  /// within tolerance::kHermitian, non-finite, or not positive definite.
  static HpdMatrix from(const ComplexMatrix& m);

  const ComplexMatrix& matrix() const { return matrix_; }
  Eigen::Index size() const { return matrix_.rows(); }

  /// Smallest over largest squared Cholesky pivot; a cheap conditioning probe.
  double pivot_ratio() const;

  ComplexMatrix solve(const ComplexMatrix& rhs) const;
  ComplexMatrix inverse() const;
  double log2_det() const;

 private:
  HpdMatrix(ComplexMatrix m, Eigen::LLT<ComplexMatrix> llt)
      : matrix_(std::move(m)), llt_(std::move(llt)) {}

  ComplexMatrix matrix_;
  Eigen::LLT<ComplexMatrix> llt_;
};

/// X with A X = B. Throws DimensionMismatch when B.rows() != A.size().
ComplexMatrix solve_hpd(const HpdMatrix& a, const ComplexMatrix& b);

/// log2 det(A), from the Cholesky diagonal.
double logdet_hpd(const HpdMatrix& a);

/// Tr(A B) without forming the product. A is m x n, B is n x m.
Complex trace_product(const ComplexMatrix& a, const ComplexMatrix& b);

/// Tr(M M^H) = squared Frobenius norm.
inline double gram_trace(const ComplexMatrix& m) { return m.squaredNorm(); }

}  // namespace relaybc
