// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "nsgda/metrics.hpp"
#include "nsgda/projection.hpp"

using namespace nsgda;

namespace {

const double kTwoLogHalf = 2.0 * std::log(0.5);

}  // namespace

TEST(SurrogateTv, Examples) {
  const SymMat sigma = SymMat::diagonal(Eigen::Vector2d(4.0, 1.0));
  EXPECT_NEAR(surrogate_tv(sym_sqrt(sigma).matrix(), sigma), 0.0, 1e-14);
  EXPECT_NEAR(surrogate_tv(Mat::Identity(2, 2), sigma), 0.75, 1e-14);
}

TEST(SurrogateTv, OrthogonalInvariance) {
  RngStream rng(1);
  const SymMat sigma(Mat(Mat::Identity(3, 3) + 0.2 * Mat::Ones(3, 3)));
  const Mat w = Mat::Identity(3, 3) + 0.3 * random_orthogonal(rng, 3);
  const double base = surrogate_tv(w, sigma);
  for (int i = 0; i < 1000; ++i) {
    const Mat q = random_orthogonal(rng, 3);
    ASSERT_NEAR(surrogate_tv(w * q, sigma), base, 1e-12);
  }
}

TEST(KlGaussian, Examples) {
  const SymMat one = SymMat::identity(1);
  EXPECT_NEAR(kl_gaussian(Mat::Constant(1, 1, std::sqrt(2.0)), one), 0.5 * (1.0 - std::log(2.0)), 1e-15);
  EXPECT_NEAR(kl_gaussian(Mat::Constant(1, 1, std::sqrt(2.0)), one), 0.153426, 1e-6);
  EXPECT_NEAR(pinsker_tv(Mat::Constant(1, 1, std::sqrt(2.0)), one), std::sqrt(0.5 * 0.5 * (1.0 - std::log(2.0))),
              1e-15);
  const SymMat sigma = SymMat::diagonal(Eigen::Vector2d(1.5, 0.8));
  EXPECT_NEAR(kl_gaussian(sym_sqrt(sigma).matrix(), sigma), 0.0, 1e-14);
}

TEST(KlGaussian, NonNegativeAndZeroOnlyWhenMatched) {
  RngStream rng(2);
  const SymMat sigma = SymMat::diagonal(Eigen::Vector3d(1.2, 1.0, 0.9));
  const ProjectionSets ps = ProjectionSets::from_closeness(0.5, 3);
  for (int i = 0; i < 200; ++i) {
    const Mat w = random_point_QG(ps, 3, rng);
    const bool matched = surrogate_tv(w, sigma) <= 1e-9;
    ASSERT_GE(kl_gaussian(w, sigma), 0.0);
    ASSERT_EQ(pinsker_tv(w, sigma) <= 1e-9, matched);
  }
  const Mat root = sym_sqrt(sigma).matrix() * random_orthogonal(rng, 3);
  EXPECT_LE(surrogate_tv(root, sigma), 1e-9);
  EXPECT_LE(pinsker_tv(root, sigma), 1e-9);
}

TEST(MetricRecord, CsvRoundTripsDoubles) {
  MetricRecord r{7, 0.1, 1.0 / 3.0, 2e-17, 0.0, 123};
  const std::string row = to_csv_row(r);
  EXPECT_EQ(metric_csv_header(), "iteration,surrogate_tv,pinsker_tv,fosp_residual,disc_gap,samples_used");
  double v = 0.0;
  ASSERT_EQ(std::sscanf(row.c_str(), "%*d,%*g,%lg", &v), 1);
  EXPECT_EQ(v, 1.0 / 3.0);
}

TEST(VirtualCriterion, MatchedIsMinusTwoLogTwo) {
  const SymMat sigma = SymMat::diagonal(Eigen::Vector2d(1.5, 0.8));
  const TargetSpec t(sigma, ActivationSpec::sigmoid(2), 0.6);
  RngStream rng(3);
  const Estimate e = virtual_criterion(t.sigma_sqrt().matrix(), t, 100000, rng);
  EXPECT_NEAR(e.value, -2.0 * std::numbers::ln2, 1e-10);  // D is identically 1/2
  RngStream rng2(4);
  const Estimate z = virtual_criterion(Mat::Identity(2, 2), t, DiscriminatorParams::zero(2), 100000, rng2);
  EXPECT_NEAR(z.value, -1.386294, 1e-6);
}

TEST(VirtualCriterion, OffRegionContributesLogHalf) {
  const ActivationSpec far = ActivationSpec::identity_on_box(Vec::Constant(2, 50.0), Vec::Constant(2, 51.0));
  const TargetSpec t(SymMat::identity(2), far, 0.5);
  RngStream rng(5);
  const DiscriminatorParams p{SymMat(Mat(0.3 * Mat::Identity(2, 2))), 0.7};
  EXPECT_NEAR(virtual_criterion(Mat::Identity(2, 2), t, p, 1000, rng).value, kTwoLogHalf, 1e-12);
}

TEST(VirtualCriterion, OptimumIsUpperBoundAtMatchedDistributions) {
  // With matched distributions the inner maximum is -2 ln 2; any (A, b) does no better.
  const TargetSpec t(SymMat::identity(2), ActivationSpec::sigmoid(2), 0.5);
  const ProjectionSets ps = ProjectionSets::from_closeness(0.5, 2);
  RngStream rng(6);
  for (int i = 0; i < 10; ++i) {
    const DiscriminatorParams p = random_point_QD(ps, 2, rng);
    const Estimate e = virtual_criterion(Mat::Identity(2, 2), t, p, 20000, rng);
    EXPECT_LE(e.value, kTwoLogHalf + 3.0 * e.std_error);
  }
}

TEST(VirtualCriterion, SmoothAlongRandomDirections) {
  // Central second differences with common random numbers; the bound must be finite and stable in n.
  const int d = 2;
  const TargetSpec t(SymMat::diagonal(Eigen::Vector2d(1.3, 0.9)), ActivationSpec::sigmoid(d), 0.5);
  const ProjectionSets ps = ProjectionSets::from_closeness(0.5, d);
  RngStream pick(7);
  auto max_curvature = [&](int n) {
    RngStream dirs(8);
    double worst = 0.0;
    for (int wi = 0; wi < 10; ++wi) {
      RngStream wr(9, static_cast<std::uint64_t>(wi));
      const Mat w = random_point_QG(ps, d, wr);
      for (int k = 0; k < 50; ++k) {
        Mat dir(d, d);
        for (int i = 0; i < d * d; ++i) dir.data()[i] = dirs.normal();
        dir /= dir.norm();
        const double h = 1e-2;
        auto v = [&](const Mat& x) {
          RngStream crn(10, static_cast<std::uint64_t>(wi * 50 + k));
          return virtual_criterion(x, t, n, crn).value;
        };
        const double second = (v(w + h * dir) - 2.0 * v(w) + v(w - h * dir)) / (h * h);
        EXPECT_TRUE(std::isfinite(second));
        worst = std::max(worst, std::abs(second));
      }
    }
    return worst;
  };
  const double small = max_curvature(2000);
  const double large = max_curvature(8000);
  RecordProperty("max_second_derivative", std::to_string(large));
  EXPECT_LT(large, 1e3);
  EXPECT_LT(std::max(small, large) / std::min(small, large), 2.0);
}

TEST(FospResidual, ZeroAtMatchedCovariance) {
  const SymMat sigma = SymMat::diagonal(Eigen::Vector2d(1.5, 0.8));
  const TargetSpec t(sigma, ActivationSpec::sigmoid(2), 0.6);
  RngStream rng(11);
  const FospResidual r = fosp_residual(t.sigma_sqrt().matrix(), t, 20000, rng);
  EXPECT_LE(r.value, 3.0 * r.std_error + 1e-12);
}

TEST(FospResidual, PositiveAwayFromOptimum) {
  const TargetSpec t(SymMat::diagonal(Eigen::Vector2d(1.5, 1.0)), ActivationSpec::sigmoid(2), 0.6);
  RngStream rng(12);
  const FospResidual r = fosp_residual(Mat::Identity(2, 2), t, 20000, rng);
  EXPECT_GT(r.value, 5.0 * r.std_error);
  EXPECT_FALSE(r.on_boundary);
}

TEST(FospResidual, ScalesLinearlyNearOptimum) {
  const TargetSpec t(SymMat::identity(2), ActivationSpec::sigmoid(2), 0.5);
  Mat e(2, 2);
  e << 0.6, 0.3, 0.3, -0.4;
  RngStream a(13), b(13);
  const FospResidual far = fosp_residual(Mat::Identity(2, 2) + 0.2 * e, t, 50000, a);
  const FospResidual near = fosp_residual(Mat::Identity(2, 2) + 0.1 * e, t, 50000, b);
  const double ratio = near.value / far.value;
  EXPECT_GE(ratio, 0.3);
  EXPECT_LE(ratio, 0.8);
}

TEST(FospResidual, BoundaryUsesTangentMapping) {
  const TargetSpec t(SymMat::diagonal(Eigen::Vector2d(1.5, 1.0)), ActivationSpec::sigmoid(2), 0.6);
  const ProjectionSets ps = ProjectionSets::from_closeness(0.6, 2);
  // A point on the ball boundary pushed outward by the gradient: the mapping is no larger than the raw norm.
  const Mat w = project_QG(Mat(Eigen::Vector2d(0.2, 2.0).asDiagonal()), ps);
  RngStream rng(14);
  const FospResidual r = fosp_residual(w, t, 20000, rng, &ps);
  EXPECT_TRUE(r.on_boundary);
  EXPECT_LE(r.value, r.interior_norm + 1e-9);
}

TEST(FdGradientCheck, Examples) {
  Mat q(3, 3);
  q << 2, 0.5, 0, 0.5, 1, 0.2, 0, 0.2, 3;
  auto fn = [&](const Vec& x) { return 0.5 * x.dot(q * x) + x.sum(); };
  const Vec x(Eigen::Vector3d(0.3, -1.0, 2.0));
  const Vec g = q * x + Vec::Ones(3);
  EXPECT_LE(fd_gradient_check(fn, g, x, 1e-4), 1e-8);
  EXPECT_NEAR(fd_gradient_check(fn, Vec(-g), x, 1e-4), 2.0, 1e-6);
  EXPECT_THROW((void)fd_gradient_check(fn, g, x, 1.0), ConfigError);
  EXPECT_THROW((void)fd_gradient_check(fn, g, x, 1e-9), ConfigError);
}
