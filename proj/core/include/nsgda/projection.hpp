// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "nsgda/discriminator.hpp"

namespace nsgda {

/*!
 * Concrete radii of the generator set
 *   Q_G = { ||W - I||_F <= r_g,  lam_lo <= x^T W x <= lam_hi for unit x }
 * and the discriminator set
 *   Q_D = { ||A||_F <= r_a,  |b| <= r_b }.
 *
 * from_closeness() picks radii that provably contain Sigma*^{1/2} in Q_G and
 * the optimal discriminator of every W in Q_G in Q_D:
 *   r_g = c, lam_lo = 1/sqrt(1+c), lam_hi = sqrt(1+c),
 *   r_a = ((1 + lam_lo) r_g / lam_lo^2 + c) / 2,
 *   r_b = sqrt(d) (r_g / lam_lo + c (1+c) / 2).
 */
struct ProjectionSets {
  double r_g = 0.0;
  double lam_lo = 0.0;
  double lam_hi = 0.0;
  double r_a = 0.0;
  double r_b = 0.0;
  double derived_from_c = 0.0;

  static ProjectionSets from_closeness(double c, int d);

  /// Throws ConfigError unless 0 < lam_lo < 1 < lam_hi and all radii are positive.
  void validate() const;
};

/// Exact Euclidean projection onto Q_D (the two constraints are separable).
DiscriminatorParams project_QD(const SymMat& a, double b, const ProjectionSets& ps);

/// Euclidean projection onto the Frobenius ball ||W - I||_F <= r_g.
Mat project_generator_ball(const Mat& w, double radius);

/// Euclidean projection onto { lam_lo <= eig(sym W) <= lam_hi }: clamps the
/// spectrum of the symmetric part and keeps the antisymmetric part.
Mat project_generator_spectrum(const Mat& w, double lam_lo, double lam_hi);

inline constexpr int kDykstraMaxRounds = 500;
inline constexpr double kDykstraTolerance = 1e-10;

/*!
 * Exact Euclidean projection onto Q_G through its orthogonal invariance: the
 * minimizer shares the eigenvectors of sym(W) and rescales skew(W), so the
 * problem reduces to projecting (eig(sym W) - 1, ||skew W||_F) onto
 * [lam_lo - 1, lam_hi - 1]^d x [0, inf) intersected with the ball of radius
 * r_g, solved by bisection on the ball multiplier.
 */
Mat project_QG_reduced(const Mat& w, const ProjectionSets& ps);

/// Euclidean projection onto Q_G by Dykstra's alternating projections. If
/// Dykstra has not stabilized after kDykstraMaxRounds (near-tangent
/// intersections), the result is completed by project_QG_reduced.
/// Throws ConvergenceFailure only if neither yields a point of Q_G.
Mat project_QG(const Mat& w, const ProjectionSets& ps);

/// Whether W satisfies both Q_G constraints up to `tol`.
bool in_QG(const Mat& w, const ProjectionSets& ps, double tol = 1e-9);
bool in_QD(const DiscriminatorParams& p, const ProjectionSets& ps, double tol = 1e-12);

/// Random point of Q_G: uniform in the Frobenius ball, then projected.
Mat random_point_QG(const ProjectionSets& ps, int d, RngStream& rng);

/// Uniform point of Q_D (uniform in the A ball, uniform b).
DiscriminatorParams random_point_QD(const ProjectionSets& ps, int d, RngStream& rng);

/*!
 * Checks Sigma*^{1/2} in Q_G and A*(W), b*(W) in Q_D for `probes` random
 * W in Q_G plus Sigma*^{1/2} itself. Returns the number of violations.
 */
int count_containment_violations(const ProjectionSets& ps, const TargetSpec& target, int probes,
                                 RngStream& rng);

}  // namespace nsgda
