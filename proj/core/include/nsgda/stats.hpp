// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <span>
#include <vector>

#include "nsgda/numerics.hpp"

namespace nsgda {

/// A Monte Carlo estimate and its standard error.
struct Estimate {
  double value = 0.0;
  double std_error = 0.0;
};

/// Number of batches used by every batch-means standard error in the library.
inline constexpr int kBatchCount = 20;

/// Mean of `values` with a batch-means standard error over `batches` contiguous
/// batches. Falls back to the i.i.d. formula when there are fewer values than batches.
Estimate batch_means(std::span<const double> values, int batches = kBatchCount);

/// Entrywise mean and standard error of a set of equally weighted batch means.
struct VectorEstimate {
  Vec mean;
  Vec std_error;
};
VectorEstimate mean_and_se(std::span<const Vec> batch_values);

/// Spearman rank correlation (average ranks for ties).
double spearman(std::span<const double> x, std::span<const double> y);

/// Ordinary least squares slope of y on x.
double ols_slope(std::span<const double> x, std::span<const double> y);

/// Median (copies its input).
double median(std::vector<double> values);

}  // namespace nsgda
