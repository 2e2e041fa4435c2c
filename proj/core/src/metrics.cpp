// SPDX-License-Identifier: Apache-2.0
#include "nsgda/metrics.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>
#include <vector>

namespace nsgda {

std::string metric_csv_header() {
  return "iteration,surrogate_tv,pinsker_tv,fosp_residual,disc_gap,samples_used";
}

std::string to_csv_row(const MetricRecord& r) {
  char buf[256];
  std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g,%.17g,%.17g,%lld", r.iteration, r.surrogate_tv,
                r.pinsker_tv, r.fosp_residual, r.disc_gap, static_cast<long long>(r.samples_used));
  return buf;
}

double surrogate_tv(const Mat& w, const SymMat& sigma_star) {
  const Mat s = sym_inv_sqrt(sigma_star).matrix();
  const auto d = w.rows();
  return (s * w * w.transpose() * s - Mat::Identity(d, d)).norm();
}

double kl_gaussian(const Mat& w, const SymMat& sigma_star) {
  // Eigenvalues mu of Sigma*^{-1/2} W W^T Sigma*^{-1/2}; mu - 1 - ln mu via log1p keeps
  // the result at rounding level, not its square root, when W W^T = Sigma*.
  const Mat root_inv = sym_inv_sqrt(sigma_star).matrix();
  const Mat v = root_inv * w;
  const SymEig eig = sym_eig(SymMat(Mat(v * v.transpose())));
  double kl = 0.0;
  for (int i = 0; i < eig.values.size(); ++i) {
    if (!(eig.values[i] > 0.0)) throw Singular("kl_gaussian: W W^T is not positive definite");
    const double delta = eig.values[i] - 1.0;
    kl += delta - std::log1p(delta);
  }
  return std::max(0.5 * kl, 0.0);
}

double pinsker_tv(const Mat& w, const SymMat& sigma_star) { return std::sqrt(0.5 * kl_gaussian(w, sigma_star)); }

Estimate virtual_criterion(const Mat& w, const TargetSpec& target, const DiscriminatorParams& p, int n,
                           RngStream& rng) {
  const auto d = static_cast<int>(w.rows());
  const ActivationSpec& act = target.activation();
  const Mat& root = target.sigma_sqrt().matrix();
  std::vector<double> values(static_cast<std::size_t>(n));
  Vec z(d), x(d);
  for (int i = 0; i < n; ++i) {
    fill_std_normal(rng, z.data(), d);
    x.noalias() = w * z;
    double v = act.in_domain(x.data()) ? detail::log_sigmoid(-quadratic_h(p, x)) : -std::numbers::ln2;
    fill_std_normal(rng, z.data(), d);
    x.noalias() = root * z;
    v += act.in_domain(x.data()) ? detail::log_sigmoid(quadratic_h(p, x)) : -std::numbers::ln2;
    values[static_cast<std::size_t>(i)] = v;
  }
  return batch_means(values);
}

Estimate virtual_criterion(const Mat& w, const TargetSpec& target, int n, RngStream& rng) {
  return virtual_criterion(w, target, optimal_discriminator(w, target), n, rng);
}

FospResidual fosp_residual(const Mat& w, const TargetSpec& target, int n, RngStream& rng,
                           const ProjectionSets* ps) {
  const auto d = static_cast<int>(w.rows());
  const ActivationSpec& act = target.activation();
  const DiscriminatorParams opt = optimal_discriminator(w, target);
  const Mat lead = target.sigma_inv() * w - inverse(w).transpose();
  const int batches = n >= 2 * kBatchCount ? kBatchCount : 1;
  const int per = n / batches;

  std::vector<Vec> batch_grads;
  batch_grads.reserve(static_cast<std::size_t>(batches));
  Vec z(d), x(d);
  for (int bt = 0; bt < batches; ++bt) {
    Mat acc = Mat::Zero(d, d);
    for (int i = 0; i < per; ++i) {
      fill_std_normal(rng, z.data(), d);
      x.noalias() = w * z;
      if (!act.in_domain(x.data())) continue;
      const double s = detail::sigmoid(quadratic_h(opt, x));
      acc.selfadjointView<Eigen::Lower>().rankUpdate(z, s);
    }
    acc = acc.selfadjointView<Eigen::Lower>();
    const Mat g = lead * (acc / per);
    batch_grads.emplace_back(Eigen::Map<const Vec>(g.data(), g.size()));
  }

  FospResidual out;
  const VectorEstimate est = mean_and_se(batch_grads);
  out.gradient = Eigen::Map<const Mat>(est.mean.data(), d, d);
  out.interior_norm = out.gradient.norm();
  out.std_error = est.std_error.norm();
  out.value = out.interior_norm;

  if (ps != nullptr && out.interior_norm > 0.0) {
    const auto dim = w.rows();
    const double ball_gap = ps->r_g - (w - Mat::Identity(dim, dim)).norm();
    const SymEig eig = sym_eig(SymMat(w));
    const double spec_gap = std::min(eig.values(0) - ps->lam_lo, ps->lam_hi - eig.values(dim - 1));
    if (ball_gap < 1e-7 || spec_gap < 1e-7) {
      out.on_boundary = true;
      const double step = 1e-6 / out.interior_norm;
      const Mat moved = project_QG(w - step * out.gradient, *ps);
      out.value = (w - moved).norm() / step;
    }
  }
  return out;
}

double fd_gradient_check(const std::function<double(const Vec&)>& fn, const Vec& analytic_grad,
                         const Vec& point, double h) {
  if (!(h >= 1e-7 && h <= 1e-2)) throw ConfigError("fd_gradient_check: h must lie in [1e-7, 1e-2]");
  if (analytic_grad.size() != point.size()) throw ConfigError("fd_gradient_check: size mismatch");
  const double floor = std::max(1e-3 * analytic_grad.cwiseAbs().maxCoeff(), 1e-12);
  double worst = 0.0;
  Vec x = point;
  for (Eigen::Index i = 0; i < point.size(); ++i) {
    const double orig = x[i];
    x[i] = orig + h;
    const double fp = fn(x);
    x[i] = orig - h;
    const double fm = fn(x);
    x[i] = orig;
    const double fd = (fp - fm) / (2.0 * h);
    const double denom = std::max({std::abs(fd), std::abs(analytic_grad[i]), floor});
    worst = std::max(worst, std::abs(fd - analytic_grad[i]) / denom);
  }
  return worst;
}

}  // namespace nsgda
