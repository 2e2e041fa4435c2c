// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <functional>
#include <string>

#include "nsgda/projection.hpp"

namespace nsgda {

/// One row of metrics.csv.
struct MetricRecord {
  int iteration = 0;
  double surrogate_tv = 0.0;
  double pinsker_tv = 0.0;
  double fosp_residual = 0.0;
  double disc_gap = 0.0;
  std::int64_t samples_used = 0;
};

/// "iteration,surrogate_tv,pinsker_tv,fosp_residual,disc_gap,samples_used"
std::string metric_csv_header();
/// Values printed with 17 significant digits so rows round-trip exactly.
std::string to_csv_row(const MetricRecord& r);

/// ||Sigma*^{-1/2} W W^T Sigma*^{-1/2} - I||_F.
double surrogate_tv(const Mat& w, const SymMat& sigma_star);

/// KL(N(0, W W^T) || N(0, Sigma*)).
double kl_gaussian(const Mat& w, const SymMat& sigma_star);

/// sqrt(KL / 2).
double pinsker_tv(const Mat& w, const SymMat& sigma_star);

/*!
 * Monte Carlo estimate of
 *   E_{x ~ N(W)}[log(1 - D(phi(x)))] + E_{x ~ N(Sigma*^{1/2})}[log D(phi(x))]
 * with n paired draws; standard error by batch means.
 */
Estimate virtual_criterion(const Mat& w, const TargetSpec& target, const DiscriminatorParams& p, int n,
                           RngStream& rng);
/// Same, at the optimal discriminator of W.
Estimate virtual_criterion(const Mat& w, const TargetSpec& target, int n, RngStream& rng);

struct FospResidual {
  double value = 0.0;          ///< reported residual
  double std_error = 0.0;      ///< root of summed entrywise squared standard errors
  double interior_norm = 0.0;  ///< ||grad V(W)||_F
  bool on_boundary = false;    ///< whether the Q_G tangent-cone form was used
  Mat gradient;                ///< Monte Carlo grad V(W)
};

/*!
 * Monte Carlo first-order stationarity residual of the virtual criterion,
 *   grad V(W) = (Sigma*^{-1} W - W^{-T}) E[sigmoid(h*(W x)) x x^T Ind{W x in T}].
 * With projection sets supplied and W on the boundary of Q_G, the value is the
 * norm of the projected-gradient mapping (the largest descent rate along a
 * feasible direction) instead of ||grad V||_F.
 */
FospResidual fosp_residual(const Mat& w, const TargetSpec& target, int n, RngStream& rng,
                           const ProjectionSets* ps = nullptr);

/*!
 * Central-difference gradient check. Returns the max over coordinates of
 * |fd_i - g_i| / max(|fd_i|, |g_i|, 1e-3 ||g||_inf, 1e-12).
 */
double fd_gradient_check(const std::function<double(const Vec&)>& fn, const Vec& analytic_grad,
                         const Vec& point, double h);

}  // namespace nsgda
