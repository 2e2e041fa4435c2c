// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <cmath>

#include "nsgda/discriminator.hpp"
#include "nsgda/generator.hpp"
#include "nsgda/metrics.hpp"
#include "nsgda/projection.hpp"

using namespace nsgda;

namespace {

Vec flatten(const Mat& m) { return Eigen::Map<const Vec>(m.data(), m.size()); }
Mat unflatten(const Vec& v, int d) { return Eigen::Map<const Mat>(v.data(), d, d); }

std::vector<Vec> latents(RngStream& rng, int d, int n) {
  std::vector<Vec> out;
  for (int i = 0; i < n; ++i) out.push_back(sample_std_normal(rng, d));
  return out;
}

}  // namespace

TEST(GeneratorGradient, ZeroOffRegion) {
  const ActivationSpec relu = ActivationSpec::relu(2);
  const DiscriminatorParams p{SymMat(Mat::Identity(2, 2)), 0.2};
  EXPECT_EQ(generator_gradient(Mat::Identity(2, 2), p, relu, Eigen::Vector2d(-1.0, 1.0)).norm(), 0.0);
}

TEST(GeneratorGradient, ZeroDiscriminatorGivesZeroGradient) {
  RngStream rng(1);
  const Vec z = sample_std_normal(rng, 3);
  EXPECT_EQ(generator_gradient(Mat::Identity(3, 3), DiscriminatorParams::zero(3), ActivationSpec::sigmoid(3), z)
                .norm(),
            0.0);
}

TEST(GeneratorGradient, ClosedFormAtOnePoint) {
  // W = I, A = diag(1, 0), b = 0, z = (1, 2): h = 1, gradient = -sigma(1) * 2 A z z^T.
  const DiscriminatorParams p{SymMat::diagonal(Eigen::Vector2d(1.0, 0.0)), 0.0};
  const Vec z(Eigen::Vector2d(1.0, 2.0));
  const Mat g = generator_gradient(Mat::Identity(2, 2), p, ActivationSpec::sigmoid(2), z);
  const double s = 1.0 / (1.0 + std::exp(-1.0));
  Mat expected(2, 2);
  expected << -2.0 * s, -4.0 * s, 0.0, 0.0;
  EXPECT_LE((g - expected).norm(), 1e-15);
}

TEST(GeneratorGradient, MatchesFiniteDifferences) {
  const int d = 3;
  const ActivationSpec sig = ActivationSpec::sigmoid(d);
  const ProjectionSets ps = ProjectionSets::from_closeness(0.5, d);
  RngStream rng(2);
  for (int trial = 0; trial < 20; ++trial) {
    const Mat w = random_point_QG(ps, d, rng);
    const DiscriminatorParams p = random_point_QD(ps, d, rng);
    const std::vector<Vec> zs = latents(rng, d, 64);
    const Mat g = generator_gradient_mean(w, p, sig, zs);
    auto fn = [&](const Vec& x) { return generator_objective(unflatten(x, d), p, sig, zs); };
    EXPECT_LE(fd_gradient_check(fn, flatten(g), flatten(w), 1e-5), 1e-5);
  }
}

TEST(GeneratorGradient, BoxActivationMatchesFiniteDifferencesAwayFromEdges) {
  // Latents whose images sit near a box face are dropped so the indicator is constant under the perturbation.
  const int d = 2;
  const ActivationSpec box = ActivationSpec::identity_on_box(Vec::Constant(d, -1.0), Vec::Constant(d, 1.0));
  const ProjectionSets ps = ProjectionSets::from_closeness(0.5, d);
  RngStream rng(3);
  for (int trial = 0; trial < 10; ++trial) {
    const Mat w = random_point_QG(ps, d, rng);
    const DiscriminatorParams p = random_point_QD(ps, d, rng);
    std::vector<Vec> zs;
    while (zs.size() < 64) {
      const Vec z = sample_std_normal(rng, d);
      if (((w * z).cwiseAbs().array() - 1.0).abs().minCoeff() > 1e-3) zs.push_back(z);
    }
    const Mat g = generator_gradient_mean(w, p, box, zs);
    auto fn = [&](const Vec& x) { return generator_objective(unflatten(x, d), p, box, zs); };
    EXPECT_LE(fd_gradient_check(fn, flatten(g), flatten(w), 1e-6), 1e-5);
  }
}

TEST(GeneratorSecondMoment, MatchesDirectAverage) {
  const int d = 2;
  const DiscriminatorParams p{SymMat(Mat(0.25 * Mat::Identity(d, d))), 0.1};
  RngStream a(4), b(4);
  const Estimate e = generator_second_moment(Mat::Identity(d, d), p, ActivationSpec::sigmoid(d), 2000, a);
  double direct = 0.0;
  for (int i = 0; i < 2000; ++i) {
    const Vec z = sample_std_normal(b, d);
    direct += generator_gradient(Mat::Identity(d, d), p, ActivationSpec::sigmoid(d), z).squaredNorm();
  }
  EXPECT_NEAR(e.value, direct / 2000.0, 1e-10 * direct);
}

TEST(GeneratorSecondMoment, GrowsQuadraticallyInDimension) {
  std::vector<double> ld, lm;
  for (int d : {2, 4, 8}) {
    RngStream rng(5, static_cast<std::uint64_t>(d));
    const DiscriminatorParams p{SymMat(Mat(0.25 * Mat::Identity(d, d))), 0.0};
    const Estimate e = generator_second_moment(Mat::Identity(d, d), p, ActivationSpec::sigmoid(d), 100000, rng);
    ld.push_back(std::log(d));
    lm.push_back(std::log(e.value));
  }
  const double slope = ols_slope(ld, lm);
  EXPECT_GE(slope, 1.7);
  EXPECT_LE(slope, 2.3);
}
