// SPDX-License-Identifier: Apache-2.0
#include "nsgda/discriminator.hpp"

#include <numbers>
#include <vector>

namespace nsgda {

double quadratic_h(const DiscriminatorParams& p, const Vec& u) {
  return u.dot(p.A.matrix() * u) + p.b;
}

double disc_eval(const DiscriminatorParams& p, const ActivationSpec& act, const Vec& x) {
  if (!act.in_image(x)) return 0.5;
  return detail::sigmoid(quadratic_h(p, act.inverse(x)));
}

double two_sample_loss(const DiscriminatorParams& p, const ActivationSpec& act, const Vec& x_real,
                       const Vec& y_fake) {
  double loss = 0.0;
  loss += act.in_image(x_real) ? detail::log_sigmoid(quadratic_h(p, act.inverse(x_real)))
                               : -std::numbers::ln2;
  loss += act.in_image(y_fake) ? detail::log_sigmoid(-quadratic_h(p, act.inverse(y_fake)))
                               : -std::numbers::ln2;
  return loss;
}

DiscGradient disc_grad_pair(const DiscriminatorParams& p, const ActivationSpec& act, const Vec& x_real,
                            const Vec& y_fake) {
  const int d = p.dim();
  Mat ga = Mat::Zero(d, d);
  double gb = 0.0;
  if (act.in_image(x_real)) {
    const Vec u = act.inverse(x_real);
    const double w = detail::sigmoid(-quadratic_h(p, u));  // 1 / (1 + e^k)
    ga.noalias() += w * u * u.transpose();
    gb += w;
  }
  if (act.in_image(y_fake)) {
    const Vec v = act.inverse(y_fake);
    const double w = detail::sigmoid(quadratic_h(p, v));  // 1 / (1 + e^{-q})
    ga.noalias() -= w * v * v.transpose();
    gb -= w;
  }
  return {SymMat(ga), gb};
}

DiscriminatorParams optimal_discriminator(const Mat& w, const TargetSpec& target) {
  const Mat wwt_inv = inverse(w * w.transpose());
  DiscriminatorParams out;
  out.A = SymMat(0.5 * (wwt_inv - target.sigma_inv()));
  out.b = log_det(w).value - 0.5 * log_det(target.sigma_star().matrix()).value;
  return out;
}

int sym_coord_count(int d) noexcept { return d * (d + 1) / 2 + 1; }

Vec to_sym_coords(const SymMat& a, double b) {
  const int d = a.dim();
  Vec c(sym_coord_count(d));
  int k = 0;
  for (int i = 0; i < d; ++i) {
    c[k++] = a(i, i);
    for (int j = i + 1; j < d; ++j) c[k++] = std::numbers::sqrt2 * a(i, j);
  }
  c[k] = b;
  return c;
}

DiscriminatorParams from_sym_coords(const Vec& coords, int d) {
  if (coords.size() != sym_coord_count(d)) throw ConfigError("from_sym_coords: size mismatch");
  Mat a(d, d);
  int k = 0;
  for (int i = 0; i < d; ++i) {
    a(i, i) = coords[k++];
    for (int j = i + 1; j < d; ++j) {
      a(i, j) = a(j, i) = coords[k++] / std::numbers::sqrt2;
    }
  }
  return {SymMat(a), coords[k]};
}

void sym_features(const double* u, int d, double* out) noexcept {
  int k = 0;
  for (int i = 0; i < d; ++i) {
    out[k++] = u[i] * u[i];
    for (int j = i + 1; j < d; ++j) out[k++] = std::numbers::sqrt2 * u[i] * u[j];
  }
  out[k] = 1.0;
}

namespace {

// Accumulates -sigma'(h) f f^T for one pre-activation sample u into `h_acc`.
void accumulate_curvature(const DiscriminatorParams& p, const ActivationSpec& act, const Vec& u,
                          Vec& feat, Mat& h_acc) {
  if (!act.in_domain(u.data())) return;
  const double s = detail::sigmoid(quadratic_h(p, u));
  sym_features(u.data(), static_cast<int>(u.size()), feat.data());
  h_acc.selfadjointView<Eigen::Lower>().rankUpdate(feat, -s * (1.0 - s));
}

}  // namespace

HessianProbe disc_hessian_probe(const DiscriminatorParams& p, const ActivationSpec& act, const Mat& w,
                                const TargetSpec& target, int n, RngStream& rng) {
  const int d = p.dim();
  if (d > kMaxDenseHessianDim)
    throw ConfigError("disc_hessian_probe: dense Hessian limited to d <= 6, use disc_curvature");
  if (n < kBatchCount) throw ConfigError("disc_hessian_probe: n too small");
  const int m = sym_coord_count(d);
  const Mat& root = target.sigma_sqrt().matrix();
  const int per = n / kBatchCount;

  std::vector<Mat> batches;
  batches.reserve(kBatchCount);
  Vec z(d), u(d), feat(m);
  for (int bt = 0; bt < kBatchCount; ++bt) {
    Mat acc = Mat::Zero(m, m);
    for (int i = 0; i < per; ++i) {
      fill_std_normal(rng, z.data(), d);
      u.noalias() = root * z;
      accumulate_curvature(p, act, u, feat, acc);
      fill_std_normal(rng, z.data(), d);
      u.noalias() = w * z;
      accumulate_curvature(p, act, u, feat, acc);
    }
    acc = acc.selfadjointView<Eigen::Lower>();
    batches.push_back(acc / per);
  }

  Mat mean = Mat::Zero(m, m);
  for (const Mat& b : batches) mean += b;
  mean /= kBatchCount;
  Mat var = Mat::Zero(m, m);
  for (const Mat& b : batches) var.array() += (b - mean).array().square();

  HessianProbe out;
  out.hessian = SymMat(mean);
  out.std_error = (var / (static_cast<double>(kBatchCount - 1) * kBatchCount)).cwiseSqrt();
  const SymEig eig = sym_eig(out.hessian);
  out.max_eigenvalue = eig.values(m - 1);
  const Vec top = eig.vectors.col(m - 1);
  std::vector<double> quad(kBatchCount);
  for (int bt = 0; bt < kBatchCount; ++bt) quad[bt] = top.dot(batches[bt] * top);
  out.max_eigenvalue_se = batch_means(quad, kBatchCount).std_error;
  return out;
}

Estimate disc_curvature(const DiscriminatorParams& p, const ActivationSpec& act, const Mat& w,
                        const TargetSpec& target, const Vec& direction, int n, RngStream& rng) {
  const int d = p.dim();
  const int m = sym_coord_count(d);
  if (direction.size() != m) throw ConfigError("disc_curvature: direction size mismatch");
  const Mat& root = target.sigma_sqrt().matrix();
  std::vector<double> values(static_cast<std::size_t>(n));
  Vec z(d), u(d), feat(m);
  auto term = [&](const Vec& x) {
    if (!act.in_domain(x.data())) return 0.0;
    const double s = detail::sigmoid(quadratic_h(p, x));
    sym_features(x.data(), d, feat.data());
    const double proj = feat.dot(direction);
    return -s * (1.0 - s) * proj * proj;
  };
  for (int i = 0; i < n; ++i) {
    fill_std_normal(rng, z.data(), d);
    u.noalias() = root * z;
    double v = term(u);
    fill_std_normal(rng, z.data(), d);
    u.noalias() = w * z;
    v += term(u);
    values[static_cast<std::size_t>(i)] = v;
  }
  return batch_means(values);
}

}  // namespace nsgda
