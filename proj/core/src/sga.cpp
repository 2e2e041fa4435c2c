// SPDX-License-Identifier: Apache-2.0
#include "nsgda/sga.hpp"

#include <cmath>
#include <numeric>

namespace nsgda {

void SgaSchedule::validate() const {
  if (!(mu > 0.0) || !std::isfinite(mu)) throw ConfigError("SgaSchedule: mu must be positive");
  if (iterations < 1) throw ConfigError("SgaSchedule: iterations must be >= 1");
  if (init == SgaInit::Gaussian && !(init_scale >= 0.0)) throw ConfigError("SgaSchedule: bad init_scale");
}

RealSampleSet::RealSampleSet(std::vector<Vec> samples, const ActivationSpec& act)
    : samples_(std::move(samples)), dim_(act.dim()) {
  pre_.assign(samples_.size() * static_cast<std::size_t>(dim_), 0.0);
  in_.assign(samples_.size(), 0);
  for (std::size_t i = 0; i < samples_.size(); ++i) {
    const Vec& x = samples_[i];
    if (x.size() != dim_) throw ConfigError("RealSampleSet: sample dimension mismatch");
    if (!act.in_image(x)) continue;
    const Vec u = act.inverse(x);
    std::copy(u.data(), u.data() + dim_, pre_.data() + i * static_cast<std::size_t>(dim_));
    in_[i] = 1;
    ++in_count_;
  }
}

namespace {

inline double quad_form(const std::vector<double>& a, const double* u, int d) noexcept {
  double s = 0.0;
  for (int i = 0; i < d; ++i) {
    double row = 0.0;
    for (int j = 0; j < d; ++j) row += a[static_cast<std::size_t>(i) * d + j] * u[j];
    s += u[i] * row;
  }
  return s;
}

}  // namespace

DiscriminatorParams sga_discriminator(const Mat& w, const ActivationSpec& act, const RealSampleSet& real,
                                      const ProjectionSets& ps, const SgaSchedule& sched, RngStream& rng) {
  sched.validate();
  const int d = act.dim();
  if (w.rows() != d || w.cols() != d) throw ConfigError("sga_discriminator: W dimension mismatch");
  if (real.size() == 0) throw ConfigError("sga_discriminator: no real samples");
  const auto dd = static_cast<std::size_t>(d) * d;

  std::vector<int> order(static_cast<std::size_t>(real.size()));
  std::iota(order.begin(), order.end(), 0);
  for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);

  std::vector<double> a(dd, 0.0);
  double b = 0.0;
  if (sched.init == SgaInit::Gaussian) {
    for (int i = 0; i < d; ++i)
      for (int j = i; j < d; ++j)
        a[static_cast<std::size_t>(i) * d + j] = a[static_cast<std::size_t>(j) * d + i] =
            sched.init_scale * rng.normal();
    b = sched.init_scale * rng.normal();
    const DiscriminatorParams p0 =
        project_QD(SymMat(Eigen::Map<const Mat>(a.data(), d, d)), b, ps);
    Eigen::Map<Mat>(a.data(), d, d) = p0.A.matrix();
    b = p0.b;
  }

  std::vector<double> a_sum(dd, 0.0);
  double b_sum = 0.0;
  std::vector<double> z(static_cast<std::size_t>(d));
  std::vector<double> v(static_cast<std::size_t>(d));
  const double* wd = w.data();  // column-major
  const double ra2 = ps.r_a * ps.r_a;
  const int k = real.size();
  const int steps = sched.iterations;

  for (int t = 1; t <= steps; ++t) {
    fill_std_normal(rng, z.data(), d);
    for (int i = 0; i < d; ++i) {
      double s = 0.0;
      for (int j = 0; j < d; ++j) s += wd[static_cast<std::size_t>(j) * d + i] * z[j];
      v[i] = s;
    }
    const int idx = order[static_cast<std::size_t>((t - 1) % k)];
    const bool real_in = real.in_region(idx);
    const bool fake_in = act.in_domain(v.data());
    const double* u = real.preactivation(idx);

    double gk = 0.0;
    double gq = 0.0;
    if (real_in) gk = detail::sigmoid(-(quad_form(a, u, d) + b));
    if (fake_in) gq = detail::sigmoid(quad_form(a, v.data(), d) + b);

    const double eta = 2.0 / (sched.mu * (t + 1.0));
    if (real_in || fake_in) {
      double norm2 = 0.0;
      for (int i = 0; i < d; ++i) {
        for (int j = i; j < d; ++j) {
          double g = 0.0;
          if (real_in) g += gk * u[i] * u[j];
          if (fake_in) g -= gq * v[i] * v[j];
          const double updated = a[static_cast<std::size_t>(i) * d + j] + eta * g;
          a[static_cast<std::size_t>(i) * d + j] = updated;
          a[static_cast<std::size_t>(j) * d + i] = updated;
          norm2 += (i == j ? 1.0 : 2.0) * updated * updated;
        }
      }
      b += eta * (gk - gq);
      if (norm2 > ra2) {
        const double scale = ps.r_a / std::sqrt(norm2);
        for (double& x : a) x *= scale;
      }
      b = std::clamp(b, -ps.r_b, ps.r_b);
    }

    if (sched.averaging) {
      for (std::size_t i = 0; i < dd; ++i) a_sum[i] += t * a[i];
      b_sum += t * b;
    }
  }

  if (sched.averaging) {
    const double norm = 2.0 / (static_cast<double>(steps) * (steps + 1.0));
    for (std::size_t i = 0; i < dd; ++i) a[i] = a_sum[i] * norm;
    b = b_sum * norm;
  }
  return {SymMat(Eigen::Map<const Mat>(a.data(), d, d)), b};
}

}  // namespace nsgda
