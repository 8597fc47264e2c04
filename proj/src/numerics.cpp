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

#include "relaybc/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "relaybc/errors.hpp"

namespace relaybc {

ComplexMatrix hermitian_part(const ComplexMatrix& m) {
  return (m + m.adjoint()) * 0.5;
}

double hermitian_defect(const ComplexMatrix& m) {
  if (m.rows() != m.cols()) return std::numeric_limits<double>::infinity();
  if (m.size() == 0) return 0.0;
  return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

bool all_finite(const ComplexMatrix& m) {
  return m.allFinite();
}

HpdMatrix HpdMatrix::from(const ComplexMatrix& m) {
  if (m.rows() != m.cols() || m.rows() == 0) {
    throw FactorizationFailure("HPD matrix must be square and non-empty, got " +
                               std::to_string(m.rows()) + "x" +
                               std::to_string(m.cols()));
  }
  if (!m.allFinite()) {
    throw FactorizationFailure("HPD matrix has non-finite entries");
  }
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  const double defect = hermitian_defect(m);
  if (defect > tolerance::kHermitian * scale) {
    throw FactorizationFailure("matrix is not Hermitian (defect " +
                               std::to_string(defect) + ")");
  }
  ComplexMatrix sym = hermitian_part(m);
  Eigen::LLT<ComplexMatrix> llt(sym);
  if (llt.info() != Eigen::Success) {
    throw FactorizationFailure("Cholesky factorization failed: matrix is not positive definite");
  }
  const auto diag = llt.matrixLLT().diagonal().real();
  if (!(diag.array() > 0.0).all() || !diag.allFinite()) {
    throw FactorizationFailure("Cholesky factorization produced a non-positive pivot");
  }
  return HpdMatrix(std::move(sym), std::move(llt));
}

double HpdMatrix::pivot_ratio() const {
  const Eigen::VectorXd pivots = llt_.matrixLLT().diagonal().real().cwiseAbs2();
  return pivots.minCoeff() / pivots.maxCoeff();
}

ComplexMatrix HpdMatrix::solve(const ComplexMatrix& rhs) const {
  return llt_.solve(rhs);
}

ComplexMatrix HpdMatrix::inverse() const {
  return hermitian_part(llt_.solve(ComplexMatrix::Identity(size(), size())));
}

double HpdMatrix::log2_det() const {
  double acc = 0.0;
  for (Eigen::Index i = 0; i < size(); ++i) {
    acc += std::log(llt_.matrixLLT()(i, i).real());
  }
  return 2.0 * acc / std::numbers::ln2;
}

ComplexMatrix solve_hpd(const HpdMatrix& a, const ComplexMatrix& b) {
  if (b.rows() != a.size()) {
    throw DimensionMismatch("solve_hpd: A is " + std::to_string(a.size()) +
                            "x" + std::to_string(a.size()) + " but B has " +
                            std::to_string(b.rows()) + " rows");
  }
  return a.solve(b);
}

double logdet_hpd(const HpdMatrix& a) { return a.log2_det(); }

Complex trace_product(const ComplexMatrix& a, const ComplexMatrix& b) {
  if (a.cols() != b.rows() || a.rows() != b.cols()) {
    throw DimensionMismatch("trace_product: shapes " +
                            std::to_string(a.rows()) + "x" +
                            std::to_string(a.cols()) + " and " +
                            std::to_string(b.rows()) + "x" +
                            std::to_string(b.cols()) + " are not transposes");
  }
  return a.cwiseProduct(b.transpose()).sum();
}

}  // namespace relaybc
