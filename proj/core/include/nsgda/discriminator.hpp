// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>

#include "nsgda/model.hpp"

namespace nsgda {

/// Quadratic discriminator head: D(x) = sigma(u^T A u + b) with u = phi^{-1}(x) on S, 1/2 off S.
struct DiscriminatorParams {
  SymMat A;
  double b = 0.0;

  static DiscriminatorParams zero(int d) { return {SymMat::zero(d), 0.0}; }
  [[nodiscard]] int dim() const noexcept { return A.dim(); }
};

/// Ascent direction over (A, b); A is symmetrized.
struct DiscGradient {
  SymMat A;
  double b = 0.0;
};

namespace detail {

inline constexpr double kLogitClamp = 500.0;

inline double clamp_logit(double h) noexcept {
  return h > kLogitClamp ? kLogitClamp : (h < -kLogitClamp ? -kLogitClamp : h);
}

inline double sigmoid(double h) noexcept { return 1.0 / (1.0 + std::exp(-clamp_logit(h))); }

/// log(sigmoid(h)) without cancellation.
inline double log_sigmoid(double h) noexcept {
  h = clamp_logit(h);
  return h >= 0 ? -std::log1p(std::exp(-h)) : h - std::log1p(std::exp(h));
}

}  // namespace detail

/// u^T A u + b for a pre-activation u.
double quadratic_h(const DiscriminatorParams& p, const Vec& u);

/// D(x; A, b); exactly 0.5 when x is outside S.
double disc_eval(const DiscriminatorParams& p, const ActivationSpec& act, const Vec& x);

/// log D(x_real) + log(1 - D(y_fake)).
double two_sample_loss(const DiscriminatorParams& p, const ActivationSpec& act, const Vec& x_real,
                       const Vec& y_fake);

/// Gradient of two_sample_loss over (A, b).
DiscGradient disc_grad_pair(const DiscriminatorParams& p, const ActivationSpec& act, const Vec& x_real,
                            const Vec& y_fake);

/*!
 * Closed-form maximizer of the population discriminator objective:
 * A* = ((W W^T)^{-1} - Sigma*^{-1}) / 2, b* = log det W - log det Sigma*^{1/2}.
 */
DiscriminatorParams optimal_discriminator(const Mat& w, const TargetSpec& target);

// Orthonormal coordinates on symmetric matrices x R: E_ii, (E_ij + E_ji)/sqrt(2) for i < j, then b.
// In these coordinates <A, u u^T> = coords(A) . features(u).
int sym_coord_count(int d) noexcept;
Vec to_sym_coords(const SymMat& a, double b);
DiscriminatorParams from_sym_coords(const Vec& coords, int d);
void sym_features(const double* u, int d, double* out) noexcept;

/// Monte Carlo Hessian of the discriminator objective in sym coordinates.
struct HessianProbe {
  SymMat hessian;          ///< (d(d+1)/2 + 1)^2
  Mat std_error;           ///< entrywise batch-means standard error
  double max_eigenvalue = 0.0;
  double max_eigenvalue_se = 0.0;
};

/// Largest dimension for which disc_hessian_probe materializes the Hessian.
inline constexpr int kMaxDenseHessianDim = 6;

/*!
 * Estimates the Hessian of L_D(A, b; W) using n draws from each of N(W) and
 * N(Sigma*^{1/2}). Requires dim <= kMaxDenseHessianDim; use disc_curvature above that.
 */
HessianProbe disc_hessian_probe(const DiscriminatorParams& p, const ActivationSpec& act, const Mat& w,
                                const TargetSpec& target, int n, RngStream& rng);

/// v^T H v for a direction in sym coordinates, without materializing H.
Estimate disc_curvature(const DiscriminatorParams& p, const ActivationSpec& act, const Mat& w,
                        const TargetSpec& target, const Vec& direction, int n, RngStream& rng);

}  // namespace nsgda
