// SPDX-License-Identifier: Apache-2.0
#include "nsgda/generator.hpp"

#include <numbers>
#include <vector>

namespace nsgda {

Mat generator_gradient(const Mat& w, const DiscriminatorParams& p, const ActivationSpec& act, const Vec& z) {
  const Vec x = w * z;
  if (!act.in_domain(x.data())) return Mat::Zero(w.rows(), w.cols());
  const Vec ax = p.A.matrix() * x;
  const double s = detail::sigmoid(x.dot(ax) + p.b);
  return (-2.0 * s) * ax * z.transpose();
}

Mat generator_gradient_mean(const Mat& w, const DiscriminatorParams& p, const ActivationSpec& act,
                            std::span<const Vec> latents) {
  Mat acc = Mat::Zero(w.rows(), w.cols());
  for (const Vec& z : latents) acc += generator_gradient(w, p, act, z);
  return acc / static_cast<double>(latents.size());
}

double generator_objective(const Mat& w, const DiscriminatorParams& p, const ActivationSpec& act,
                           std::span<const Vec> latents) {
  double acc = 0.0;
  for (const Vec& z : latents) {
    const Vec x = w * z;
    acc += act.in_domain(x.data()) ? detail::log_sigmoid(-quadratic_h(p, x)) : -std::numbers::ln2;
  }
  return acc / static_cast<double>(latents.size());
}

Estimate generator_second_moment(const Mat& w, const DiscriminatorParams& p, const ActivationSpec& act,
                                 int n, RngStream& rng) {
  const auto d = static_cast<int>(w.rows());
  std::vector<double> values(static_cast<std::size_t>(n));
  Vec z(d), x(d), ax(d);
  for (int i = 0; i < n; ++i) {
    fill_std_normal(rng, z.data(), d);
    x.noalias() = w * z;
    if (!act.in_domain(x.data())) {
      values[static_cast<std::size_t>(i)] = 0.0;
      continue;
    }
    ax.noalias() = p.A.matrix() * x;
    const double s = detail::sigmoid(x.dot(ax) + p.b);
    // ||a z^T||_F^2 = ||a||^2 ||z||^2
    values[static_cast<std::size_t>(i)] = 4.0 * s * s * ax.squaredNorm() * z.squaredNorm();
  }
  return batch_means(values);
}

}  // namespace nsgda
