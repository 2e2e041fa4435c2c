// SPDX-License-Identifier: Apache-2.0
#include "nsgda/nested_sgda.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>

#include "nsgda/bpsgd.hpp"
#include "nsgda/generator.hpp"

namespace nsgda {

namespace {

constexpr std::uint64_t kRealStream = 1;
constexpr std::uint64_t kStopStream = 2;
constexpr std::uint64_t kTrainStream = 3;
constexpr std::uint64_t kMetricStream = 4;
constexpr std::uint64_t kProbeStream = 5;

int ceil_budget(double value, const char* what) {
  if (!(value >= 1.0)) return 1;
  if (value > static_cast<double>(std::numeric_limits<int>::max() / 2)) {
    throw ConfigError(std::string("derived budget ") + what + " overflows; set it explicitly");
  }
  return static_cast<int>(std::ceil(value));
}

nlohmann::json mat_row_major(const Mat& m) {
  auto out = nlohmann::json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) out.push_back(m(i, j));
  return out;
}

Mat mat_from_row_major(const nlohmann::json& j, int d) {
  if (!j.is_array() || j.size() != static_cast<std::size_t>(d) * d) throw ConfigError("checkpoint: bad matrix size");
  Mat m(d, d);
  for (int i = 0; i < d; ++i)
    for (int c = 0; c < d; ++c) m(i, c) = j.at(static_cast<std::size_t>(i) * d + c).get<double>();
  return m;
}

void to_json(nlohmann::json& j, const MetricRecord& r) {
  j = {{"iteration", r.iteration},       {"surrogate_tv", r.surrogate_tv}, {"pinsker_tv", r.pinsker_tv},
       {"fosp_residual", r.fosp_residual}, {"disc_gap", r.disc_gap},       {"samples_used", r.samples_used}};
}

MetricRecord record_from_json(const nlohmann::json& j) {
  MetricRecord r;
  r.iteration = j.at("iteration").get<int>();
  r.surrogate_tv = j.at("surrogate_tv").get<double>();
  r.pinsker_tv = j.at("pinsker_tv").get<double>();
  r.fosp_residual = j.at("fosp_residual").get<double>();
  r.disc_gap = j.at("disc_gap").get<double>();
  r.samples_used = j.at("samples_used").get<std::int64_t>();
  return r;
}

double disc_distance(const DiscriminatorParams& p, const DiscriminatorParams& q) {
  return (p.A.matrix() - q.A.matrix()).norm() + std::abs(p.b - q.b);
}

}  // namespace

void TrainConfig::validate() const {
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw ConfigError("epsilon must lie in (0, 1)");
  if (real_samples < 0) throw ConfigError("k must be >= 0");
  if (inner_iterations < 0) throw ConfigError("M_D must be >= 0");
  if (!(C_k > 0 && C_D > 0 && C_G > 0)) throw ConfigError("budget constants must be positive");
  if (!(mu > 0.0) || !std::isfinite(mu)) throw ConfigError("mu must be positive");
  if (beta < 0.0 || !std::isfinite(beta)) throw ConfigError("beta must be >= 0");
  if (!(R > 0.0 && L > 0.0) || B < 0.0) throw ConfigError("R and L must be positive and B >= 0");
  if (batch < 1) throw ConfigError("batch must be >= 1");
  if (metrics_every < 0) throw ConfigError("metrics_every must be >= 0");
  if (fosp_samples < 2 * kBatchCount || final_fosp_samples < 2 * kBatchCount)
    throw ConfigError("fosp_samples and final_fosp_samples must be >= 40");
  if (checkpoint_every < 0) throw ConfigError("checkpoint_every must be >= 0");
  if (checkpoint_every > 0 && checkpoint_dir.empty()) throw ConfigError("checkpoint_every needs checkpoint_dir");
}

void to_json(nlohmann::json& j, const TrainConfig& c) {
  j = {{"epsilon", c.epsilon},
       {"seed", c.seed},
       {"k", c.real_samples},
       {"M_D", c.inner_iterations},
       {"M_G", c.outer_iterations},
       {"C_k", c.C_k},
       {"C_D", c.C_D},
       {"C_G", c.C_G},
       {"mu", c.mu},
       {"auto_mu", c.auto_mu},
       {"averaging", c.averaging},
       {"init", c.init == SgaInit::Zero ? "zero" : "gaussian"},
       {"beta", c.beta},
       {"R", c.R},
       {"L", c.L},
       {"B", c.B},
       {"batch", c.batch},
       {"precondition", c.precondition},
       {"metrics_every", c.metrics_every},
       {"fosp_samples", c.fosp_samples},
       {"final_fosp_samples", c.final_fosp_samples},
       {"disc_gap", c.disc_gap},
       {"checkpoint_every", c.checkpoint_every},
       {"checkpoint_dir", c.checkpoint_dir}};
}

void from_json(const nlohmann::json& j, TrainConfig& c) {
  if (!j.is_object()) throw ConfigError("train config must be a JSON object");
  nlohmann::json defaults;
  to_json(defaults, c);
  for (const auto& [key, value] : j.items()) {
    if (!defaults.contains(key)) throw ConfigError("unknown train config key: " + key);
  }
  try {
    auto get = [&](const char* key, auto& field) {
      if (j.contains(key)) field = j.at(key).get<std::remove_reference_t<decltype(field)>>();
    };
    get("epsilon", c.epsilon);
    get("seed", c.seed);
    get("k", c.real_samples);
    get("M_D", c.inner_iterations);
    get("M_G", c.outer_iterations);
    get("C_k", c.C_k);
    get("C_D", c.C_D);
    get("C_G", c.C_G);
    get("mu", c.mu);
    get("auto_mu", c.auto_mu);
    get("averaging", c.averaging);
    if (j.contains("init")) {
      const auto s = j.at("init").get<std::string>();
      if (s == "zero") c.init = SgaInit::Zero;
      else if (s == "gaussian") c.init = SgaInit::Gaussian;
      else throw ConfigError("init must be \"zero\" or \"gaussian\"");
    }
    get("beta", c.beta);
    get("R", c.R);
    get("L", c.L);
    get("B", c.B);
    get("batch", c.batch);
    get("precondition", c.precondition);
    get("metrics_every", c.metrics_every);
    get("fosp_samples", c.fosp_samples);
    get("final_fosp_samples", c.final_fosp_samples);
    get("disc_gap", c.disc_gap);
    get("checkpoint_every", c.checkpoint_every);
    get("checkpoint_dir", c.checkpoint_dir);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("train config: ") + e.what());
  }
}

void to_json(nlohmann::json& j, const ResolvedBudgets& b) {
  j = {{"k", b.k}, {"M_D", b.M_D}, {"M_G", b.M_G}, {"beta", b.beta},
       {"mu", b.mu}, {"R", b.R},   {"L", b.L},     {"B", b.B}};
}

ResolvedBudgets resolve_budgets(const TrainConfig& config, int d) {
  require_dim(d);
  config.validate();
  const double dd = static_cast<double>(d) * d;
  const double eps2 = config.epsilon * config.epsilon;
  ResolvedBudgets b;
  b.k = config.real_samples > 0
            ? config.real_samples
            : ceil_budget(config.C_k * dd / eps2 * std::max(std::log(static_cast<double>(d)), 1.0), "k");
  b.M_D = config.inner_iterations > 0 ? config.inner_iterations : ceil_budget(config.C_D * dd / eps2, "M_D");
  b.M_G = config.outer_iterations >= 0 ? config.outer_iterations : ceil_budget(config.C_G * dd / (eps2 * eps2), "M_G");
  b.mu = config.mu;
  b.R = config.R;
  b.L = config.L;
  b.B = config.B > 0.0 ? config.B : 10.0 * dd;
  if (config.beta > 0.0) {
    b.beta = config.beta;
  } else if (b.M_G > 0) {
    b.beta = BpsgdSchedule::auto_derived(b.M_G, b.R, b.L, b.B).beta;
  }
  return b;
}

void to_json(nlohmann::json& j, const Checkpoint& c) {
  nlohmann::json metrics;
  to_json(metrics, c.metrics);
  nlohmann::json rng;
  to_json(rng, c.rng_state);
  j = {{"iteration", c.iteration}, {"W", mat_row_major(c.w)},   {"A", mat_row_major(c.disc.A.matrix())},
       {"b", c.disc.b},            {"rng_state", rng},           {"metrics", metrics}};
}

Checkpoint checkpoint_from_json(const nlohmann::json& j) {
  try {
    Checkpoint c;
    c.iteration = j.at("iteration").get<int>();
    const auto n = j.at("W").size();
    const auto d = static_cast<int>(std::lround(std::sqrt(static_cast<double>(n))));
    c.w = mat_from_row_major(j.at("W"), d);
    c.disc.A = SymMat(mat_from_row_major(j.at("A"), d));
    c.disc.b = j.at("b").get<double>();
    from_json(j.at("rng_state"), c.rng_state);
    c.metrics = record_from_json(j.at("metrics"));
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("checkpoint: ") + e.what());
  }
}

TrainResult nested_sgda(const TargetSpec& target, const TrainConfig& config) {
  const auto started = std::chrono::steady_clock::now();
  const int d = target.dim();
  const ActivationSpec& act = target.activation();
  TrainReport report;
  report.budgets = resolve_budgets(config, d);
  const ResolvedBudgets& bud = report.budgets;
  const ProjectionSets ps = ProjectionSets::from_closeness(target.closeness_c(), d);

  RngStream real_rng(config.seed, kRealStream);
  RngStream stop_rng(config.seed, kStopStream);
  RngStream train_rng(config.seed, kTrainStream);
  RngStream metric_rng(config.seed, kMetricStream);

  const RealSampleSet real(sample_target(target, bud.k, real_rng), act);
  report.target_samples = bud.k;
  report.real_in_region_fraction = static_cast<double>(real.in_region_count()) / bud.k;

  Mat w = Mat::Identity(d, d);
  if (config.precondition) {
    const Preconditioner pre = precondition(real.samples(), act);
    w = project_QG(pre.initial_weights(), ps);
  }

  SgaSchedule sched;
  sched.mu = bud.mu;
  sched.iterations = bud.M_D;
  sched.averaging = config.averaging;
  sched.init = config.init;
  if (config.auto_mu && d <= kMaxDenseHessianDim) {
    RngStream probe_rng(config.seed, kProbeStream);
    const HessianProbe probe =
        disc_hessian_probe(DiscriminatorParams::zero(d), act, w, target, 4 * bud.M_D, probe_rng);
    if (probe.max_eigenvalue < 0.0) sched.mu = -probe.max_eigenvalue;
    report.budgets.mu = sched.mu;
  }
  sched.validate();

  auto measure = [&](int iteration, const Mat& weights, const DiscriminatorParams& disc, std::int64_t used,
                     int fosp_n) {
    MetricRecord r;
    r.iteration = iteration;
    r.surrogate_tv = surrogate_tv(weights, target.sigma_star());
    r.pinsker_tv = pinsker_tv(weights, target.sigma_star());
    r.fosp_residual = fosp_residual(weights, target, fosp_n, metric_rng, &ps).value;
    r.disc_gap = config.disc_gap ? disc_distance(disc, optimal_discriminator(weights, target)) : 0.0;
    r.samples_used = used;
    return r;
  };

  if (bud.M_G == 0) {
    report.w_last = w;
    report.final_metrics = measure(0, w, DiscriminatorParams::zero(d), bud.k, config.final_fosp_samples);
    report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    return {GeneratorParams(w), std::move(report)};
  }

  const int stop = sample_stop_index(bud.M_G, stop_rng);
  report.stop_index = stop;
  Mat selected = w;
  std::vector<Vec> latents(static_cast<std::size_t>(config.batch), Vec(d));
  if (config.checkpoint_every > 0) std::filesystem::create_directories(config.checkpoint_dir);

  int it = 1;
  try {
    for (; it <= bud.M_G; ++it) {
      const DiscriminatorParams disc = sga_discriminator(w, act, real, ps, sched, train_rng);
      // Discriminator gap is measured against the W the discriminator was trained for.
      const double gap =
          config.disc_gap && config.metrics_every > 0 && it % config.metrics_every == 0
              ? disc_distance(disc, optimal_discriminator(w, target))
              : 0.0;
      for (auto& z : latents) fill_std_normal(train_rng, z.data(), d);
      const Mat g = generator_gradient_mean(w, disc, act, latents);
      w = project_QG(w - bud.beta * g, ps);
      require_finite(w, "nested_sgda: generator iterate");
      report.fake_samples += static_cast<std::int64_t>(bud.M_D) + config.batch;

      const bool want_metrics = config.metrics_every > 0 && it % config.metrics_every == 0;
      const bool want_checkpoint = config.checkpoint_every > 0 && it % config.checkpoint_every == 0;
      MetricRecord rec;
      if (want_metrics || want_checkpoint) {
        rec = measure(it, w, disc, bud.k, config.fosp_samples);
        rec.disc_gap = gap;
      }
      if (want_metrics) report.records.push_back(rec);
      if (want_checkpoint) {
        nlohmann::json j;
        to_json(j, Checkpoint{it, w, disc, train_rng.state(), rec});
        char name[64];
        std::snprintf(name, sizeof name, "checkpoint_%08d.json", it);
        std::ofstream out(std::filesystem::path(config.checkpoint_dir) / name);
        out << j.dump(2) << '\n';
        if (!out) throw Error("failed to write checkpoint " + std::string(name));
      }
      if (it == stop) selected = w;
    }
  } catch (const NumericalError& e) {
    throw NumericalError("nested_sgda outer iteration " + std::to_string(it) + ": " + e.what());
  }

  report.w_last = w;
  report.final_metrics = measure(stop, selected, DiscriminatorParams::zero(d), bud.k, config.final_fosp_samples);
  report.final_metrics.disc_gap = 0.0;
  report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return {GeneratorParams(selected), std::move(report)};
}

}  // namespace nsgda
