// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <cmath>

#include "nsgda/projection.hpp"
#include "nsgda/sga.hpp"
#include "nsgda/stats.hpp"

using namespace nsgda;

namespace {

double gap(const DiscriminatorParams& p, const DiscriminatorParams& q) {
  return (p.A.matrix() - q.A.matrix()).norm() + std::abs(p.b - q.b);
}

double median_gap(const Mat& w, const TargetSpec& t, int md, int k) {
  const ProjectionSets ps = ProjectionSets::from_closeness(t.closeness_c(), t.dim());
  const DiscriminatorParams opt = optimal_discriminator(w, t);
  std::vector<double> gaps;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    RngStream real_rng(seed, 1), rng(seed, 2);
    const RealSampleSet real(sample_target(t, k, real_rng), t.activation());
    SgaSchedule sched;
    sched.iterations = md;
    gaps.push_back(gap(sga_discriminator(w, t.activation(), real, ps, sched, rng), opt));
  }
  return median(gaps);
}

}  // namespace

TEST(SgaSchedule, Validates) {
  SgaSchedule s;
  s.mu = 0.0;
  EXPECT_THROW(s.validate(), ConfigError);
  s.mu = 1.0;
  s.iterations = 0;
  EXPECT_THROW(s.validate(), ConfigError);
}

TEST(RealSampleSet, CachesPreactivations) {
  const ActivationSpec relu = ActivationSpec::relu(2);
  const RealSampleSet set({Eigen::Vector2d(1.0, 2.0), Eigen::Vector2d(-1.0, 2.0)}, relu);
  EXPECT_EQ(set.size(), 2);
  EXPECT_EQ(set.in_region_count(), 1);
  EXPECT_TRUE(set.in_region(0));
  EXPECT_FALSE(set.in_region(1));
  EXPECT_EQ(set.preactivation(0)[1], 2.0);
}

TEST(Sga, SingleStepIsOneProjectedAscentStep) {
  const ActivationSpec sig = ActivationSpec::sigmoid(2);
  const Vec u(Eigen::Vector2d(0.7, -0.3));
  const RealSampleSet real({sig.forward(u)}, sig);
  const ProjectionSets ps = ProjectionSets::from_closeness(0.5, 2);
  const Mat w = Eigen::Vector2d(1.1, 0.9).asDiagonal();
  SgaSchedule sched;
  sched.iterations = 1;
  sched.mu = 2.0;  // eta_1 = 2 / (mu * 2) = 0.5
  RngStream rng(7);
  RngStream replay = rng;
  const DiscriminatorParams got = sga_discriminator(w, sig, real, ps, sched, rng);

  const Vec v = w * sample_std_normal(replay, 2);
  const Vec preimage = sig.inverse(real.samples()[0]);
  // At (0, 0), sigma(h) = 1/2 for both samples.
  const Mat a = 0.5 * 0.5 * (preimage * preimage.transpose() - v * v.transpose());
  const DiscriminatorParams expected = project_QD(SymMat(a), 0.0, ps);
  EXPECT_LE((got.A.matrix() - expected.A.matrix()).norm(), 1e-12);
  EXPECT_EQ(got.b, 0.0);
}

TEST(Sga, Deterministic) {
  const TargetSpec t(SymMat::diagonal(Eigen::Vector2d(1.5, 1.0)), ActivationSpec::sigmoid(2), 0.6);
  RngStream r(1);
  const RealSampleSet real(sample_target(t, 100, r), t.activation());
  const ProjectionSets ps = ProjectionSets::from_closeness(0.6, 2);
  SgaSchedule sched;
  sched.iterations = 500;
  RngStream a(9), b(9);
  const DiscriminatorParams p = sga_discriminator(Mat::Identity(2, 2), t.activation(), real, ps, sched, a);
  const DiscriminatorParams q = sga_discriminator(Mat::Identity(2, 2), t.activation(), real, ps, sched, b);
  EXPECT_EQ(p.A.matrix(), q.A.matrix());
  EXPECT_EQ(p.b, q.b);
}

TEST(Sga, IteratesStayInQD) {
  const TargetSpec t(SymMat::diagonal(Eigen::Vector2d(1.5, 1.0)), ActivationSpec::sigmoid(2), 0.6);
  RngStream r(2);
  const RealSampleSet real(sample_target(t, 50, r), t.activation());
  ProjectionSets ps = ProjectionSets::from_closeness(0.6, 2);
  ps.r_a = 0.05;
  ps.r_b = 0.01;
  SgaSchedule sched;
  sched.iterations = 200;
  sched.averaging = false;
  RngStream rng(3);
  EXPECT_TRUE(in_QD(sga_discriminator(Mat::Identity(2, 2), t.activation(), real, ps, sched, rng), ps));
}

TEST(Sga, MatchedGeneratorGivesZeroDiscriminator) {
  const SymMat sigma = SymMat::diagonal(Eigen::Vector2d(1.3, 0.85));
  const TargetSpec t(sigma, ActivationSpec::sigmoid(2), closeness(sigma) * 1.1);
  EXPECT_LE(median_gap(t.sigma_sqrt().matrix(), t, 5000, 5000), 0.1);
}

TEST(Sga, ConvergesToClosedFormOptimum) {
  const TargetSpec t(SymMat::diagonal(Eigen::Vector2d(1.5, 1.0)), ActivationSpec::sigmoid(2), 0.6);
  EXPECT_LE(median_gap(Mat::Identity(2, 2), t, 20000, 20000), 0.1);
}
