// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

#include "nsgda/numerics.hpp"
#include "nsgda/projection.hpp"

namespace nsgda::oracle {

/*!
 * Brute-force Euclidean projection onto Q_G at d = 2, independent of Dykstra.
 *
 * Write W = S + K with S symmetric and K skew; the parts are orthogonal. A
 * symmetric candidate is S' = R diag(l1, l2) R^T. Its norm, the ball term
 * ||S' - I||_F^2 = (l1 - 1)^2 + (l2 - 1)^2 and the spectral bounds depend only
 * on (l1, l2), so R enters the cost only through <S', S>, which is largest
 * when R is the eigenbasis of S. Every (l1, l2) in [lam_lo, lam_hi]^2 maps onto
 * a feasible point by shrinking (l1 - 1, l2 - 1) radially into the ball; the
 * box contains (1, 1), so the shrink keeps the spectral bounds. Given S', the
 * best skew part is K shrunk to the remaining ball budget. (l1, l2) is
 * searched by a zooming grid; both pairings with the eigenvalues of S are
 * covered because the box is symmetric.
 */
inline Mat brute_force_project_QG_2d(const Mat& w, const ProjectionSets& ps) {
  const Mat s = 0.5 * (w + w.transpose());
  const double k = 0.5 * (w(0, 1) - w(1, 0));
  const double knorm = std::sqrt(2.0) * std::abs(k);
  const double r = ps.r_g;
  const double theta = 0.5 * std::atan2(2.0 * s(0, 1), s(0, 0) - s(1, 1));
  Mat rot(2, 2);
  rot << std::cos(theta), -std::sin(theta), std::sin(theta), std::cos(theta);

  struct Candidate {
    Mat sym;
    double shrink = 1.0;
    double cost = 0.0;
  };
  auto evaluate = [&](double l1, double l2) {
    l1 = std::clamp(l1, ps.lam_lo, ps.lam_hi);
    l2 = std::clamp(l2, ps.lam_lo, ps.lam_hi);
    const double rho = std::hypot(l1 - 1.0, l2 - 1.0);
    if (rho > r) {
      l1 = 1.0 + (l1 - 1.0) * r / rho;
      l2 = 1.0 + (l2 - 1.0) * r / rho;
    }
    Candidate out;
    out.sym = rot * Eigen::Vector2d(l1, l2).asDiagonal() * rot.transpose();
    const double budget = std::sqrt(std::max(0.0, r * r - (l1 - 1.0) * (l1 - 1.0) - (l2 - 1.0) * (l2 - 1.0)));
    out.shrink = knorm > budget ? budget / knorm : 1.0;
    const double excess = knorm * (1.0 - out.shrink);
    out.cost = (out.sym - s).squaredNorm() + excess * excess;
    return out;
  };

  std::array<double, 2> lo{ps.lam_lo, ps.lam_lo};
  std::array<double, 2> hi{ps.lam_hi, ps.lam_hi};
  std::array<double, 2> best{1.0, 1.0};
  Candidate best_c = evaluate(1.0, 1.0);
  constexpr int n = 200;
  for (int round = 0; round < 40; ++round) {
    const std::array<double, 2> step{(hi[0] - lo[0]) / n, (hi[1] - lo[1]) / n};
    for (int i = 0; i <= n; ++i)
      for (int j = 0; j <= n; ++j) {
        const std::array<double, 2> x{lo[0] + i * step[0], lo[1] + j * step[1]};
        const Candidate c = evaluate(x[0], x[1]);
        if (c.cost < best_c.cost) {
          best_c = c;
          best = x;
        }
      }
    for (int a = 0; a < 2; ++a) {
      lo[a] = best[a] - 8.0 * step[a];
      hi[a] = best[a] + 8.0 * step[a];
    }
    if (step[0] < 1e-13) break;
  }
  Mat out = best_c.sym;
  out(0, 1) += best_c.shrink * k;
  out(1, 0) -= best_c.shrink * k;
  return out;
}

}  // namespace nsgda::oracle
