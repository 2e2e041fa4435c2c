// SPDX-License-Identifier: Apache-2.0
#include <benchmark/benchmark.h>

#include "nsgda/discriminator.hpp"
#include "nsgda/generator.hpp"
#include "nsgda/projection.hpp"
#include "nsgda/sga.hpp"

using namespace nsgda;

namespace {

TargetSpec bench_target(int d) {
  Vec diag = Vec::Ones(d);
  diag[0] = 1.3;
  return TargetSpec(SymMat::diagonal(diag), ActivationSpec::sigmoid(d), 0.5);
}

void BM_RngNormal(benchmark::State& state) {
  RngStream rng(1);
  for (auto _ : state) benchmark::DoNotOptimize(rng.normal());
}
BENCHMARK(BM_RngNormal);

void BM_RngUniform(benchmark::State& state) {
  RngStream rng(1);
  for (auto _ : state) benchmark::DoNotOptimize(rng.uniform());
}
BENCHMARK(BM_RngUniform);

void BM_SgaInnerLoop(benchmark::State& state) {
  const int d = static_cast<int>(state.range(0));
  const TargetSpec t = bench_target(d);
  RngStream real_rng(2);
  const RealSampleSet real(sample_target(t, 1000, real_rng), t.activation());
  const ProjectionSets ps = ProjectionSets::from_closeness(0.5, d);
  SgaSchedule sched;
  sched.iterations = 1000;
  RngStream rng(3);
  const Mat w = Mat::Identity(d, d);
  for (auto _ : state) benchmark::DoNotOptimize(sga_discriminator(w, t.activation(), real, ps, sched, rng));
  state.SetItemsProcessed(state.iterations() * sched.iterations);
}
BENCHMARK(BM_SgaInnerLoop)->Arg(2)->Arg(3)->Arg(8);

void BM_ProjectQG(benchmark::State& state) {
  const int d = static_cast<int>(state.range(0));
  const ProjectionSets ps = ProjectionSets::from_closeness(0.5, d);
  RngStream rng(4);
  Mat w(d, d);
  for (int i = 0; i < d * d; ++i) w.data()[i] = 0.5 * rng.normal();
  w += Mat::Identity(d, d);
  for (auto _ : state) benchmark::DoNotOptimize(project_QG(w, ps));
}
BENCHMARK(BM_ProjectQG)->Arg(2)->Arg(3)->Arg(8);

void BM_ProjectQD(benchmark::State& state) {
  const int d = static_cast<int>(state.range(0));
  const ProjectionSets ps = ProjectionSets::from_closeness(0.5, d);
  const SymMat a(Mat(Mat::Ones(d, d)));
  for (auto _ : state) benchmark::DoNotOptimize(project_QD(a, 5.0, ps));
}
BENCHMARK(BM_ProjectQD)->Arg(3)->Arg(8);

void BM_GeneratorGradient(benchmark::State& state) {
  const int d = static_cast<int>(state.range(0));
  RngStream rng(5);
  const DiscriminatorParams p{SymMat(Mat(0.25 * Mat::Identity(d, d))), 0.1};
  const Vec z = sample_std_normal(rng, d);
  const Mat w = Mat::Identity(d, d);
  const ActivationSpec act = ActivationSpec::sigmoid(d);
  for (auto _ : state) benchmark::DoNotOptimize(generator_gradient(w, p, act, z));
}
BENCHMARK(BM_GeneratorGradient)->Arg(3)->Arg(8);

}  // namespace

BENCHMARK_MAIN();
