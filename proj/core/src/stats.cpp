// SPDX-License-Identifier: Apache-2.0
#include "nsgda/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace nsgda {

Estimate batch_means(std::span<const double> values, int batches) {
  const auto n = static_cast<int>(values.size());
  if (n == 0) return {};
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  if (n < 2) return {mean, 0.0};
  if (n < batches * 2) {
    double ss = 0.0;
    for (double v : values) ss += (v - mean) * (v - mean);
    return {mean, std::sqrt(ss / (n - 1) / n)};
  }
  const int per = n / batches;
  double ss = 0.0;
  double grand = 0.0;
  std::vector<double> bm(batches);
  for (int b = 0; b < batches; ++b) {
    const auto first = values.begin() + static_cast<std::ptrdiff_t>(b) * per;
    bm[b] = std::accumulate(first, first + per, 0.0) / per;
    grand += bm[b];
  }
  grand /= batches;
  for (double m : bm) ss += (m - grand) * (m - grand);
  return {mean, std::sqrt(ss / (batches - 1) / batches)};
}

VectorEstimate mean_and_se(std::span<const Vec> batch_values) {
  const auto b = static_cast<int>(batch_values.size());
  VectorEstimate out;
  out.mean = Vec::Zero(batch_values.front().size());
  for (const Vec& v : batch_values) out.mean += v;
  out.mean /= b;
  Vec ss = Vec::Zero(out.mean.size());
  for (const Vec& v : batch_values) ss.array() += (v - out.mean).array().square();
  out.std_error = b > 1 ? Vec((ss / (static_cast<double>(b - 1) * b)).cwiseSqrt()) : Vec(Vec::Zero(ss.size()));
  return out;
}

namespace {

std::vector<double> ranks(std::span<const double> v) {
  const std::size_t n = v.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return v[a] < v[b]; });
  std::vector<double> r(n);
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j + 1 < n && v[order[j + 1]] == v[order[i]]) ++j;
    const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) r[order[k]] = avg;
    i = j + 1;
  }
  return r;
}

double pearson(std::span<const double> x, std::span<const double> y) {
  const auto n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  return sxy / std::sqrt(sxx * syy);
}

}  // namespace

double spearman(std::span<const double> x, std::span<const double> y) {
  const auto rx = ranks(x);
  const auto ry = ranks(y);
  return pearson(rx, ry);
}

double ols_slope(std::span<const double> x, std::span<const double> y) {
  const auto n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  return sxy / sxx;
}

double median(std::vector<double> values) {
  if (values.empty()) return 0.0;
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return n % 2 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

}  // namespace nsgda
