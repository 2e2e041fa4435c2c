// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>

#include "nsgda/errors.hpp"
#include "nsgda/rng.hpp"

namespace nsgda {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Largest supported ambient dimension.
inline constexpr int kMaxDim = 64;

/// Condition number above which inversion reports Singular.
inline constexpr double kMaxConditionNumber = 1e12;

/// Throws ConfigError unless 1 <= d <= kMaxDim.
void require_dim(int d);

/// Throws NumericalError naming `what` if any entry is NaN or Inf.
void require_finite(const Mat& m, const char* what);

/*!
 * Dense symmetric matrix. The constructor stores (M + M^T) / 2, so entries
 * (i, j) and (j, i) are bitwise equal.
 */
class SymMat {
 public:
  SymMat() = default;
  explicit SymMat(const Mat& m);

  static SymMat identity(int d);
  static SymMat zero(int d);
  static SymMat diagonal(const Vec& diag);

  [[nodiscard]] const Mat& matrix() const noexcept { return m_; }
  [[nodiscard]] int dim() const noexcept { return static_cast<int>(m_.rows()); }
  [[nodiscard]] double operator()(int i, int j) const { return m_(i, j); }
  [[nodiscard]] double frobenius() const { return m_.norm(); }

 private:
  Mat m_;
};

/// Lower-triangular L with L L^T = S. Throws NotPositiveDefinite.
Mat cholesky(const SymMat& s);

struct LogDet {
  double value = 0.0;  ///< log |det M|
  int sign = 1;        ///< sign of det M
};

/// log |det M| via partial-pivot LU. Throws Singular.
LogDet log_det(const Mat& m);

struct SymEig {
  Vec values;   ///< ascending
  Mat vectors;  ///< orthonormal columns
};

/// Throws ConvergenceFailure if the solver does not converge.
SymEig sym_eig(const SymMat& s);

/// Inverse via LU; throws Singular above kMaxConditionNumber.
Mat inverse(const Mat& m);

/// Reciprocal condition estimate in the 1-norm.
double rcond(const Mat& m);

/// Principal square root / inverse square root of an SPD matrix.
SymMat sym_sqrt(const SymMat& s);
SymMat sym_inv_sqrt(const SymMat& s);

/// i.i.d. N(0, 1) coordinates.
Vec sample_std_normal(RngStream& rng, int d);

/// Fills an existing buffer with N(0, 1) draws (hot loops).
void fill_std_normal(RngStream& rng, double* out, int d) noexcept;

/// Haar-distributed orthogonal matrix (QR of a Gaussian matrix, sign-fixed).
Mat random_orthogonal(RngStream& rng, int d);

}  // namespace nsgda
