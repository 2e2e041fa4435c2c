// SPDX-License-Identifier: Apache-2.0
#include <cmath>
#include <functional>
#include <ostream>
#include <sstream>

#include "harness.hpp"
#include "nsgda/generator.hpp"

namespace nsgda::harness {

namespace {

struct Sizes {
  int projections;
  int containment;
  int concavity_points;
  int concavity_samples;
  int stationarity_points;
  int stationarity_samples;
  int fd_points;
  int fd_samples;
  std::vector<int> moment_dims;
  int moment_samples;
  int lipschitz_perturbations;
  int lipschitz_samples;
  int descent_points;
  int descent_samples;
};

Sizes sizes_for(CheckLevel level) {
  if (level == CheckLevel::Quick) return {100, 200, 5, 20000, 3, 20000, 5, 200, {2, 4}, 50000, 30, 20000, 20, 20000};
  return {1000, 1000, 20, 20000, 10, 100000, 20, 500, {2, 4, 8}, 200000, 100, 50000, 100, 100000};
}

std::string fmt(const char* f, double a, double b = 0.0) {
  char buf[160];
  std::snprintf(buf, sizeof buf, f, a, b);
  return buf;
}

TargetSpec sigmoid_target(int d, double c, std::uint64_t seed) {
  RngStream rng(seed, 11);
  return TargetSpec(random_spd(d, c, rng), ActivationSpec::sigmoid(d), c);
}

CheckResult check_rng_roundtrip() {
  RngStream a(42, 7);
  for (int i = 0; i < 17; ++i) (void)a.normal();
  nlohmann::json j;
  to_json(j, a.state());
  RngState s;
  from_json(nlohmann::json::parse(j.dump()), s);
  RngStream b(s);
  bool same = true;
  for (int i = 0; i < 100; ++i) same = same && a.normal() == b.normal() && a.next_u64() == b.next_u64();
  return {"rng_state_roundtrip", same, same ? "200 draws identical" : "streams diverged"};
}

CheckResult check_target_roundtrip() {
  const TargetSpec t = sigmoid_target(4, 0.5, 3);
  nlohmann::json j = t;
  const TargetSpec back = target_from_json(nlohmann::json::parse(j.dump()));
  const bool ok = back.sigma_star().matrix() == t.sigma_star().matrix() && back.closeness_c() == t.closeness_c();
  return {"target_json_roundtrip", ok, ok ? "exact" : "sigma_star changed"};
}

CheckResult check_project_qg(const Sizes& sz) {
  const ProjectionSets ps = ProjectionSets::from_closeness(0.5, 3);
  RngStream rng(1, 21);
  double worst_idem = 0.0;
  int infeasible = 0;
  for (int i = 0; i < sz.projections; ++i) {
    Mat w(3, 3);
    for (int k = 0; k < 9; ++k) w.data()[k] = 1.5 * rng.normal();
    w += Mat::Identity(3, 3);
    const Mat p = project_QG(w, ps);
    if (!in_QG(p, ps, 1e-9)) ++infeasible;
    worst_idem = std::max(worst_idem, (project_QG(p, ps) - p).norm());
  }
  const bool ok = infeasible == 0 && worst_idem <= 1e-8;
  return {"project_QG_feasible_idempotent", ok,
          fmt("infeasible %.0f, max idempotence gap %.2e", infeasible, worst_idem)};
}

CheckResult check_project_qd(const Sizes& sz) {
  const ProjectionSets ps = ProjectionSets::from_closeness(0.5, 3);
  RngStream rng(2, 22);
  auto random_point = [&] {
    Mat a(3, 3);
    for (int k = 0; k < 9; ++k) a.data()[k] = 2.0 * ps.r_a * rng.normal();
    return DiscriminatorParams{SymMat(a), 2.0 * ps.r_b * rng.normal()};
  };
  auto dist = [](const DiscriminatorParams& x, const DiscriminatorParams& y) {
    return std::sqrt((x.A.matrix() - y.A.matrix()).squaredNorm() + (x.b - y.b) * (x.b - y.b));
  };
  double worst_idem = 0.0, worst_expansion = 0.0;
  for (int i = 0; i < sz.projections; ++i) {
    const auto x = random_point(), y = random_point();
    const auto px = project_QD(x.A, x.b, ps), py = project_QD(y.A, y.b, ps);
    worst_idem = std::max(worst_idem, dist(project_QD(px.A, px.b, ps), px));
    worst_expansion = std::max(worst_expansion, dist(px, py) - dist(x, y));
  }
  const bool ok = worst_idem <= 1e-12 && worst_expansion <= 1e-12;
  return {"project_QD_idempotent_nonexpansive", ok,
          fmt("max idempotence gap %.2e, max expansion %.2e", worst_idem, worst_expansion)};
}

CheckResult check_containment(const Sizes& sz) {
  const TargetSpec t = sigmoid_target(3, 0.5, 4);
  const ProjectionSets ps = ProjectionSets::from_closeness(0.5, 3);
  RngStream rng(3, 23);
  const int bad = count_containment_violations(ps, t, sz.containment, rng);
  return {"optimal_discriminator_in_QD", bad == 0, fmt("%.0f of %.0f probes outside Q_D", bad, sz.containment)};
}

CheckResult check_concavity(const Sizes& sz) {
  const TargetSpec t = sigmoid_target(3, 0.5, 5);
  const ProjectionSets ps = ProjectionSets::from_closeness(0.5, 3);
  RngStream rng(4, 24);
  double worst = -1e300;
  for (int i = 0; i < sz.concavity_points; ++i) {
    const Mat w = random_point_QG(ps, 3, rng);
    const DiscriminatorParams p = random_point_QD(ps, 3, rng);
    const HessianProbe h = disc_hessian_probe(p, t.activation(), w, t, sz.concavity_samples, rng);
    worst = std::max(worst, h.max_eigenvalue + 3.0 * h.max_eigenvalue_se);
  }
  return {"disc_strong_concavity", worst <= -0.01, fmt("max (lambda_max + 3 SE) = %.4f", worst)};
}

using GradFn = std::function<DiscGradient(const DiscriminatorParams&, const ActivationSpec&, const Vec&, const Vec&)>;

GradFn disc_gradient_fn(const CheckHooks& hooks) {
  if (!hooks.corrupt_disc_gradient) return disc_grad_pair;
  return [](const DiscriminatorParams& p, const ActivationSpec& a, const Vec& x, const Vec& y) {
    DiscGradient g = disc_grad_pair(p, a, x, y);
    g.A = SymMat(Mat(-g.A.matrix()));
    g.b = -g.b;
    return g;
  };
}

CheckResult check_stationarity(const Sizes& sz, const CheckHooks& hooks) {
  const TargetSpec t = sigmoid_target(3, 0.5, 6);
  const ProjectionSets ps = ProjectionSets::from_closeness(0.5, 3);
  const GradFn grad = disc_gradient_fn(hooks);
  RngStream rng(5, 25);
  double worst = 0.0;
  for (int i = 0; i < sz.stationarity_points; ++i) {
    const Mat w = random_point_QG(ps, 3, rng);
    const DiscriminatorParams opt = optimal_discriminator(w, t);
    const int per = sz.stationarity_samples / kBatchCount;
    std::vector<Vec> batches;
    for (int b = 0; b < kBatchCount; ++b) {
      Vec acc = Vec::Zero(sym_coord_count(3));
      for (int n = 0; n < per; ++n) {
        const Vec x = sample_target(t, rng);
        const Vec y = sample_p(w, t.activation(), rng).x;
        const DiscGradient g = grad(opt, t.activation(), x, y);
        acc += to_sym_coords(g.A, g.b);
      }
      batches.push_back(acc / per);
    }
    const VectorEstimate e = mean_and_se(batches);
    worst = std::max(worst, e.mean.norm() / (3.0 * e.std_error.norm()));
  }
  return {"disc_grad_pair_stationary_at_optimum", worst <= 1.0,
          fmt("max ||mean grad|| / (3 SE) = %.3f", worst)};
}

CheckResult check_disc_fd(const Sizes& sz, const CheckHooks& hooks) {
  const TargetSpec t = sigmoid_target(3, 0.5, 7);
  const ProjectionSets ps = ProjectionSets::from_closeness(0.5, 3);
  const GradFn grad = disc_gradient_fn(hooks);
  RngStream rng(6, 26);
  double worst = 0.0;
  for (int i = 0; i < sz.fd_points; ++i) {
    const Mat w = random_point_QG(ps, 3, rng);
    const DiscriminatorParams p = random_point_QD(ps, 3, rng);
    std::vector<Vec> xs, ys;
    for (int n = 0; n < sz.fd_samples; ++n) {
      xs.push_back(sample_target(t, rng));
      ys.push_back(sample_p(w, t.activation(), rng).x);
    }
    auto loss = [&](const Vec& theta) {
      const DiscriminatorParams q = from_sym_coords(theta, 3);
      double s = 0.0;
      for (int n = 0; n < sz.fd_samples; ++n) s += two_sample_loss(q, t.activation(), xs[n], ys[n]);
      return s / sz.fd_samples;
    };
    Vec g = Vec::Zero(sym_coord_count(3));
    for (int n = 0; n < sz.fd_samples; ++n) {
      const DiscGradient gi = grad(p, t.activation(), xs[n], ys[n]);
      g += to_sym_coords(gi.A, gi.b);
    }
    g /= sz.fd_samples;
    worst = std::max(worst, fd_gradient_check(loss, g, to_sym_coords(p.A, p.b), 1e-5));
  }
  return {"disc_grad_pair_matches_finite_differences", worst <= 1e-5, fmt("max relative error %.2e", worst)};
}

CheckResult check_generator_fd(const Sizes& sz) {
  const TargetSpec t = sigmoid_target(3, 0.5, 8);
  const ProjectionSets ps = ProjectionSets::from_closeness(0.5, 3);
  RngStream rng(7, 27);
  double worst = 0.0;
  for (int i = 0; i < sz.fd_points; ++i) {
    const Mat w = random_point_QG(ps, 3, rng);
    const DiscriminatorParams p = random_point_QD(ps, 3, rng);
    std::vector<Vec> zs;
    for (int n = 0; n < sz.fd_samples; ++n) zs.push_back(sample_std_normal(rng, 3));
    auto objective = [&](const Vec& flat) {
      return generator_objective(Eigen::Map<const Mat>(flat.data(), 3, 3), p, t.activation(), zs);
    };
    const Mat g = generator_gradient_mean(w, p, t.activation(), zs);
    worst = std::max(worst, fd_gradient_check(objective, Eigen::Map<const Vec>(g.data(), 9),
                                              Eigen::Map<const Vec>(w.data(), 9), 1e-5));
  }
  return {"generator_gradient_matches_finite_differences", worst <= 1e-5, fmt("max relative error %.2e", worst)};
}

CheckResult check_second_moment(const Sizes& sz) {
  std::vector<double> logd, logm;
  std::ostringstream detail;
  for (const int d : sz.moment_dims) {
    RngStream rng(8, 28 + static_cast<std::uint64_t>(d));
    const DiscriminatorParams p{SymMat(Mat(0.25 * Mat::Identity(d, d))), 0.0};
    const Estimate m = generator_second_moment(Mat::Identity(d, d), p, ActivationSpec::sigmoid(d), sz.moment_samples, rng);
    logd.push_back(std::log(static_cast<double>(d)));
    logm.push_back(std::log(m.value));
    detail << "d=" << d << ":" << m.value << " ";
  }
  const double slope = ols_slope(logd, logm);
  detail << "slope " << slope;
  return {"generator_second_moment_scaling", slope <= 2.3, detail.str()};
}

CheckResult check_lipschitz(const Sizes& sz) {
  const int d = 3;
  const TargetSpec t = sigmoid_target(d, 0.5, 9);
  const ProjectionSets ps = ProjectionSets::from_closeness(0.5, d);
  RngStream rng(9, 29);
  const Mat w = random_point_QG(ps, d, rng);
  const DiscriminatorParams opt = optimal_discriminator(w, t);
  std::vector<Vec> zs;
  for (int n = 0; n < sz.lipschitz_samples; ++n) zs.push_back(sample_std_normal(rng, d));
  const Mat g0 = generator_gradient_mean(w, opt, t.activation(), zs);
  std::vector<double> ratios;
  for (int i = 0; i < sz.lipschitz_perturbations; ++i) {
    const double scale = std::exp(std::log(1e-3) + rng.uniform() * std::log(1e3));
    Vec dir(sym_coord_count(d));
    fill_std_normal(rng, dir.data(), static_cast<int>(dir.size()));
    dir *= scale / dir.norm();
    const DiscriminatorParams moved = from_sym_coords(to_sym_coords(opt.A, opt.b) + dir, d);
    const double gap = (moved.A.matrix() - opt.A.matrix()).norm() + std::abs(moved.b - opt.b);
    const Mat g = generator_gradient_mean(w, moved, t.activation(), zs);
    ratios.push_back((g - g0).norm() / gap);
  }
  const double med = median(ratios);
  const double worst = *std::max_element(ratios.begin(), ratios.end());
  return {"generator_gradient_lipschitz_in_discriminator", std::isfinite(worst) && worst <= 10.0 * med,
          fmt("max ratio %.3f, median %.3f", worst, med)};
}

CheckResult check_descent(const Sizes& sz) {
  const int d = 2;
  const TargetSpec t = sigmoid_target(d, 0.5, 10);
  const ProjectionSets ps = ProjectionSets::from_closeness(0.5, d);
  RngStream rng(10, 30);
  int decreased = 0, counted = 0;
  for (int i = 0; i < sz.descent_points; ++i) {
    const Mat w = random_point_QG(ps, d, rng);
    if (surrogate_tv(w, t.sigma_star()) < 1e-6) continue;
    ++counted;
    RngStream grad_rng(11, 100 + static_cast<std::uint64_t>(i));
    const FospResidual f = fosp_residual(w, t, sz.descent_samples, grad_rng);
    const Mat stepped = w - 1e-3 * f.gradient;
    // Common random numbers: both evaluations replay the same draws.
    RngStream r1(12, 200 + static_cast<std::uint64_t>(i)), r2(12, 200 + static_cast<std::uint64_t>(i));
    const double before = virtual_criterion(w, t, sz.descent_samples, r1).value;
    const double after = virtual_criterion(stepped, t, sz.descent_samples, r2).value;
    if (after < before) ++decreased;
  }
  const bool ok = decreased >= static_cast<int>(std::ceil(0.95 * counted));
  return {"generator_step_decreases_virtual_criterion", ok, fmt("%.0f of %.0f steps decreased", decreased, counted)};
}

}  // namespace

std::vector<CheckResult> run_checks(CheckLevel level, const CheckHooks& hooks, std::ostream& progress) {
  const Sizes sz = sizes_for(level);
  const std::vector<std::pair<const char*, std::function<CheckResult()>>> suite = {
      {"rng_state_roundtrip", [] { return check_rng_roundtrip(); }},
      {"target_json_roundtrip", [] { return check_target_roundtrip(); }},
      {"project_QG_feasible_idempotent", [&] { return check_project_qg(sz); }},
      {"project_QD_idempotent_nonexpansive", [&] { return check_project_qd(sz); }},
      {"optimal_discriminator_in_QD", [&] { return check_containment(sz); }},
      {"disc_strong_concavity", [&] { return check_concavity(sz); }},
      {"disc_grad_pair_stationary_at_optimum", [&] { return check_stationarity(sz, hooks); }},
      {"disc_grad_pair_matches_finite_differences", [&] { return check_disc_fd(sz, hooks); }},
      {"generator_gradient_matches_finite_differences", [&] { return check_generator_fd(sz); }},
      {"generator_second_moment_scaling", [&] { return check_second_moment(sz); }},
      {"generator_gradient_lipschitz_in_discriminator", [&] { return check_lipschitz(sz); }},
      {"generator_step_decreases_virtual_criterion", [&] { return check_descent(sz); }},
  };
  std::vector<CheckResult> results;
  for (const auto& [name, run] : suite) {
    CheckResult r{name, false, ""};
    try {
      r = run();
    } catch (const std::exception& e) {
      r.detail = std::string("threw: ") + e.what();
    }
    progress << (r.passed ? "PASS " : "FAIL ") << r.name << "  " << r.detail << "\n" << std::flush;
    results.push_back(std::move(r));
  }
  return results;
}

int cmd_check(CheckLevel level, const CheckHooks& hooks, std::ostream& out) {
  const auto results = run_checks(level, hooks, out);
  int failed = 0;
  for (const auto& r : results) {
    if (!r.passed) {
      out << "failed invariant: " << r.name << "\n";
      ++failed;
    }
  }
  out << (results.size() - failed) << "/" << results.size() << " checks passed\n";
  return failed == 0 ? kSuccess : kInvariantFailure;
}

}  // namespace nsgda::harness
