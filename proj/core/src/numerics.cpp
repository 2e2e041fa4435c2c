// SPDX-License-Identifier: Apache-2.0
#include "nsgda/numerics.hpp"

#include <cmath>
#include <string>

namespace nsgda {

void require_dim(int d) {
  if (d < 1 || d > kMaxDim) {
    throw ConfigError("dimension " + std::to_string(d) + " outside [1, " +
                      std::to_string(kMaxDim) + "]");
  }
}

void require_finite(const Mat& m, const char* what) {
  if (!m.allFinite()) throw NumericalError(std::string(what) + ": non-finite entry");
}

SymMat::SymMat(const Mat& m) {
  if (m.rows() != m.cols()) throw ConfigError("SymMat: matrix is not square");
  m_ = 0.5 * (m + m.transpose());
}

SymMat SymMat::identity(int d) { return SymMat(Mat::Identity(d, d)); }

SymMat SymMat::zero(int d) { return SymMat(Mat::Zero(d, d)); }

SymMat SymMat::diagonal(const Vec& diag) { return SymMat(Mat(diag.asDiagonal())); }

Mat cholesky(const SymMat& s) {
  Eigen::LLT<Mat> llt(s.matrix());
  if (llt.info() != Eigen::Success) throw NotPositiveDefinite("cholesky: non-positive pivot");
  return llt.matrixL();
}

double rcond(const Mat& m) { return Eigen::PartialPivLU<Mat>(m).rcond(); }

LogDet log_det(const Mat& m) {
  if (m.rows() != m.cols()) throw ConfigError("log_det: matrix is not square");
  Eigen::PartialPivLU<Mat> lu(m);
  if (!(lu.rcond() > 1.0 / kMaxConditionNumber)) throw Singular("log_det: matrix is singular");
  const Mat& packed = lu.matrixLU();
  LogDet out;
  out.sign = static_cast<int>(lu.permutationP().determinant());
  for (Eigen::Index i = 0; i < packed.rows(); ++i) {
    const double u = packed(i, i);
    if (u < 0) out.sign = -out.sign;
    out.value += std::log(std::abs(u));
  }
  return out;
}

SymEig sym_eig(const SymMat& s) {
  Eigen::SelfAdjointEigenSolver<Mat> solver(s.matrix());
  if (solver.info() != Eigen::Success) throw ConvergenceFailure("sym_eig: solver did not converge");
  return SymEig{solver.eigenvalues(), solver.eigenvectors()};
}

Mat inverse(const Mat& m) {
  Eigen::PartialPivLU<Mat> lu(m);
  if (!(lu.rcond() > 1.0 / kMaxConditionNumber)) throw Singular("inverse: condition number above 1e12");
  return lu.inverse();
}

namespace {

SymMat spectral_map(const SymMat& s, double power) {
  const SymEig eig = sym_eig(s);
  if (eig.values(0) <= 0) throw NotPositiveDefinite("matrix function of a non-SPD matrix");
  const Vec mapped = eig.values.array().pow(power).matrix();
  return SymMat(eig.vectors * mapped.asDiagonal() * eig.vectors.transpose());
}

}  // namespace

SymMat sym_sqrt(const SymMat& s) { return spectral_map(s, 0.5); }

SymMat sym_inv_sqrt(const SymMat& s) { return spectral_map(s, -0.5); }

Vec sample_std_normal(RngStream& rng, int d) {
  Vec v(d);
  fill_std_normal(rng, v.data(), d);
  return v;
}

void fill_std_normal(RngStream& rng, double* out, int d) noexcept {
  for (int i = 0; i < d; ++i) out[i] = rng.normal();
}

Mat random_orthogonal(RngStream& rng, int d) {
  Mat g(d, d);
  for (int j = 0; j < d; ++j)
    for (int i = 0; i < d; ++i) g(i, j) = rng.normal();
  Eigen::HouseholderQR<Mat> qr(g);
  Mat q = qr.householderQ();
  const Mat r = qr.matrixQR();
  for (int j = 0; j < d; ++j)
    if (r(j, j) < 0) q.col(j) *= -1.0;
  return q;
}

}  // namespace nsgda
