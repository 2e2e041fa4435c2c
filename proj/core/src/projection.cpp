// SPDX-License-Identifier: Apache-2.0
#include "nsgda/projection.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace nsgda {

ProjectionSets ProjectionSets::from_closeness(double c, int d) {
  if (!(c > 0.0) || !std::isfinite(c)) throw ConfigError("ProjectionSets: c must be positive");
  require_dim(d);
  ProjectionSets ps;
  ps.derived_from_c = c;
  // Sigma*^{1/2} satisfies ||S - I||_F <= c and has spectrum in [1/sqrt(1+c), sqrt(1+c)].
  ps.r_g = c;
  ps.lam_lo = 1.0 / std::sqrt(1.0 + c);
  ps.lam_hi = std::sqrt(1.0 + c);
  // Singular values s_i of W in Q_G obey sum (s_i - 1)^2 <= r_g^2 and s_i >= lam_lo, and
  // |1/s^2 - 1| <= |s - 1| (1 + lam_lo) / lam_lo^2 there, which bounds ||(W W^T)^{-1} - I||_F.
  const double k = (1.0 + ps.lam_lo) / (ps.lam_lo * ps.lam_lo);
  ps.r_a = 0.5 * (k * ps.r_g + c);
  // |log det W| <= sqrt(d) r_g / lam_lo and |log det Sigma*| <= sqrt(d) c (1 + c).
  ps.r_b = std::sqrt(static_cast<double>(d)) * (ps.r_g / ps.lam_lo + 0.5 * c * (1.0 + c));
  return ps;
}

void ProjectionSets::validate() const {
  if (!(lam_lo > 0.0 && lam_lo < 1.0 && lam_hi > 1.0))
    throw ConfigError("ProjectionSets: requires 0 < lam_lo < 1 < lam_hi");
  if (!(r_g > 0.0 && r_a > 0.0 && r_b > 0.0))
    throw ConfigError("ProjectionSets: radii must be positive");
}

DiscriminatorParams project_QD(const SymMat& a, double b, const ProjectionSets& ps) {
  const double norm = a.frobenius();
  DiscriminatorParams out;
  out.A = norm > ps.r_a ? SymMat(a.matrix() * (ps.r_a / norm)) : a;
  out.b = std::clamp(b, -ps.r_b, ps.r_b);
  return out;
}

Mat project_generator_ball(const Mat& w, double radius) {
  const auto d = w.rows();
  Mat delta = w - Mat::Identity(d, d);
  const double norm = delta.norm();
  if (norm <= radius) return w;
  delta *= radius / norm;
  delta.diagonal().array() += 1.0;
  return delta;
}

Mat project_generator_spectrum(const Mat& w, double lam_lo, double lam_hi) {
  const Mat skew = 0.5 * (w - w.transpose());
  const SymMat sym(w);
  const SymEig eig = sym_eig(sym);
  if (eig.values(0) >= lam_lo && eig.values(eig.values.size() - 1) <= lam_hi) return w;
  const Vec clamped = eig.values.cwiseMax(lam_lo).cwiseMin(lam_hi);
  const SymMat projected(eig.vectors * clamped.asDiagonal() * eig.vectors.transpose());
  return projected.matrix() + skew;
}

bool in_QG(const Mat& w, const ProjectionSets& ps, double tol) {
  const auto d = w.rows();
  if ((w - Mat::Identity(d, d)).norm() > ps.r_g + tol) return false;
  const SymEig eig = sym_eig(SymMat(w));
  return eig.values(0) >= ps.lam_lo - tol && eig.values(d - 1) <= ps.lam_hi + tol;
}

bool in_QD(const DiscriminatorParams& p, const ProjectionSets& ps, double tol) {
  return p.A.frobenius() <= ps.r_a * (1.0 + tol) && std::abs(p.b) <= ps.r_b * (1.0 + tol);
}

Mat project_QG_reduced(const Mat& w, const ProjectionSets& ps) {
  require_finite(w, "project_QG_reduced input");
  const auto d = w.rows();
  const Mat skew = 0.5 * (w - w.transpose());
  const SymEig eig = sym_eig(SymMat(w));
  Vec y(d + 1);
  y.head(d) = eig.values.array() - 1.0;
  y(d) = skew.norm();
  Vec lo(d + 1), hi(d + 1);
  lo.head(d).setConstant(ps.lam_lo - 1.0);
  hi.head(d).setConstant(ps.lam_hi - 1.0);
  lo(d) = 0.0;
  hi(d) = std::numeric_limits<double>::infinity();
  auto point = [&](double nu) -> Vec { return (y / (1.0 + nu)).cwiseMax(lo).cwiseMin(hi); };
  Vec x = point(0.0);
  if (x.norm() > ps.r_g) {
    double nu_lo = 0.0, nu_hi = 1.0;
    while (point(nu_hi).norm() > ps.r_g) nu_hi *= 2.0;
    for (int i = 0; i < 200 && nu_hi - nu_lo > 1e-15 * nu_hi; ++i) {
      const double mid = 0.5 * (nu_lo + nu_hi);
      (point(mid).norm() > ps.r_g ? nu_lo : nu_hi) = mid;
    }
    x = point(nu_hi);
  }
  const Vec lambdas = x.head(d).array() + 1.0;
  Mat out = eig.vectors * lambdas.asDiagonal() * eig.vectors.transpose();
  if (y(d) > 0.0) out += skew * (x(d) / y(d));
  return out;
}

Mat project_QG(const Mat& w, const ProjectionSets& ps) {
  require_finite(w, "project_QG input");
  if (in_QG(w, ps, 0.0)) return w;
  {
    const Mat ball = project_generator_ball(w, ps.r_g);
    if (in_QG(ball, ps, 0.0)) return ball;
    const Mat spectral = project_generator_spectrum(w, ps.lam_lo, ps.lam_hi);
    if (in_QG(spectral, ps, 0.0)) return spectral;
  }
  // Dykstra: x_{k+1} = P_spectrum(y_k + q_k), y_k = P_ball(x_k + p_k).
  const auto d = w.rows();
  Mat x = w;
  Mat p = Mat::Zero(d, d);
  Mat q = Mat::Zero(d, d);
  for (int round = 0; round < kDykstraMaxRounds; ++round) {
    const Mat y = project_generator_ball(x + p, ps.r_g);
    p = x + p - y;
    const Mat next = project_generator_spectrum(y + q, ps.lam_lo, ps.lam_hi);
    q = y + q - next;
    const double change = (next - x).norm() + (next - y).norm();
    x = next;
    if (change <= kDykstraTolerance) return x;
  }
  const Mat reduced = project_QG_reduced(w, ps);
  if (in_QG(reduced, ps)) return reduced;
  throw ConvergenceFailure("project_QG: Dykstra did not converge in " +
                           std::to_string(kDykstraMaxRounds) + " rounds");
}

Mat random_point_QG(const ProjectionSets& ps, int d, RngStream& rng) {
  Mat dir(d, d);
  for (int j = 0; j < d; ++j)
    for (int i = 0; i < d; ++i) dir(i, j) = rng.normal();
  dir /= dir.norm();
  const double radius = ps.r_g * std::pow(rng.uniform(), 1.0 / (static_cast<double>(d) * d));
  return project_QG(Mat::Identity(d, d) + radius * dir, ps);
}

DiscriminatorParams random_point_QD(const ProjectionSets& ps, int d, RngStream& rng) {
  const int m = sym_coord_count(d) - 1;
  Vec dir(m + 1);
  for (int i = 0; i < m; ++i) dir[i] = rng.normal();
  dir.head(m) /= dir.head(m).norm();
  dir.head(m) *= ps.r_a * std::pow(rng.uniform(), 1.0 / m);
  dir[m] = ps.r_b * (2.0 * rng.uniform() - 1.0);
  return from_sym_coords(dir, d);
}

int count_containment_violations(const ProjectionSets& ps, const TargetSpec& target, int probes,
                                 RngStream& rng) {
  const int d = target.dim();
  int violations = 0;
  const Mat root = target.sigma_sqrt().matrix();
  if (!in_QG(root, ps)) ++violations;
  if (!in_QD(optimal_discriminator(root, target), ps, 1e-9)) ++violations;
  for (int i = 0; i < probes; ++i) {
    const Mat w = random_point_QG(ps, d, rng);
    if (!in_QD(optimal_discriminator(w, target), ps, 1e-9)) ++violations;
  }
  return violations;
}

}  // namespace nsgda
