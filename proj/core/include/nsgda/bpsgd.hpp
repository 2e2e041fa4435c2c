// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <type_traits>

#include "nsgda/errors.hpp"
#include "nsgda/rng.hpp"

namespace nsgda {

/// Budget and step size of biased projected SGD.
struct BpsgdSchedule {
  int M = 1;          ///< iteration budget
  double beta = 0.0;  ///< step size
  double R = 10.0;    ///< objective range over the feasible set
  double L = 10.0;    ///< smoothness
  double B = 10.0;    ///< second-moment bound of the gradient oracle

  /// beta = sqrt(2 R / (L B M)).
  static BpsgdSchedule auto_derived(int M, double R, double L, double B) {
    if (M < 1) throw ConfigError("BpsgdSchedule: M must be >= 1");
    if (!(R > 0 && L > 0 && B > 0)) throw ConfigError("BpsgdSchedule: R, L, B must be positive");
    return {M, std::sqrt(2.0 * R / (L * B * M)), R, L, B};
  }

  void validate() const {
    if (M < 1) throw ConfigError("BpsgdSchedule: M must be >= 1");
    if (!(beta > 0.0) || !std::isfinite(beta)) throw ConfigError("BpsgdSchedule: beta must be positive");
  }
};

/// Uniform stopping index in {1, ..., M}.
inline int sample_stop_index(int M, RngStream& rng) { return 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(M))); }

template <class Point>
struct BpsgdResult {
  Point x;
  int stop_index = 0;
};

/*!
 * Biased projected SGD with a uniformly random stopping time: samples
 * m ~ U{1..M}, then iterates x <- project(x - beta * oracle(x, rng)) m times
 * and returns the m-th iterate. `Point` must support `x - beta * g`.
 *
 * `observer(i, x)`, if given, sees every iterate after its projection.
 */
template <class Point, class Oracle, class Project>
BpsgdResult<Point> bpsgd(Oracle&& oracle, Project&& project, Point x0, const BpsgdSchedule& sched,
                         RngStream& rng,
                         const std::function<void(int, const std::type_identity_t<Point>&)>& observer = {}) {
  sched.validate();
  const int m = sample_stop_index(sched.M, rng);
  Point x = std::move(x0);
  for (int i = 1; i <= m; ++i) {
    const Point g = oracle(x, rng);
    x = project(Point(x - sched.beta * g));
    if (observer) observer(i, x);
  }
  return {std::move(x), m};
}

}  // namespace nsgda
