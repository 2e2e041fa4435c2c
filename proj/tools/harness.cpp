// SPDX-License-Identifier: Apache-2.0
#include "harness.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

namespace nsgda::harness {

namespace fs = std::filesystem;

namespace {

constexpr int kReluMaxDim = 8;
constexpr int kMassProbeSamples = 20000;
constexpr double kMinMass = 0.01;

const char* axis_name(SweepAxis a) {
  switch (a) {
    case SweepAxis::Samples: return "samples";
    case SweepAxis::Dim: return "dim";
    case SweepAxis::Epsilon: return "epsilon";
  }
  return "?";
}

const char* source_name(SigmaSource s) {
  switch (s) {
    case SigmaSource::Identity: return "identity";
    case SigmaSource::Explicit: return "explicit";
    case SigmaSource::RandomSpd: return "random_spd";
  }
  return "?";
}

nlohmann::json normalized_activation(const nlohmann::json& a, int d) {
  if (!a.is_object() || !a.contains("kind")) throw ConfigError("activation must be an object with a 'kind'");
  nlohmann::json out = {{"kind", a.at("kind")}};
  if (a.at("kind") == "identity_on_box") {
    out["lo"] = a.contains("lo") ? a.at("lo") : nlohmann::json(std::vector<double>(static_cast<std::size_t>(d), -1.0));
    out["hi"] = a.contains("hi") ? a.at("hi") : nlohmann::json(std::vector<double>(static_cast<std::size_t>(d), 1.0));
  }
  return out;
}

SymMat base_sigma(const ExperimentConfig& cfg, int d) {
  switch (cfg.sigma_source) {
    case SigmaSource::Identity: return SymMat::identity(d);
    case SigmaSource::Explicit: return SymMat(cfg.explicit_sigma);
    case SigmaSource::RandomSpd: {
      RngStream rng(cfg.random_seed, static_cast<std::uint64_t>(d));
      return random_spd(d, cfg.random_closeness, rng);
    }
  }
  throw ConfigError("unknown sigma source");
}

double resolve_closeness(const ExperimentConfig& cfg, const SymMat& sigma) {
  double c = 0.0;
  if (cfg.closeness_c) c = *cfg.closeness_c;
  else if (cfg.sigma_source == SigmaSource::RandomSpd) c = cfg.random_closeness;
  else c = std::max(0.5, 1.1 * closeness(sigma));
  if (c > cfg.closeness_ceiling) {
    char buf[256];
    std::snprintf(buf, sizeof buf,
                  "closeness c = %.4g exceeds the ceiling %.4g: warning, targets this far from the identity "
                  "put training in vanishing-gradient territory",
                  c, cfg.closeness_ceiling);
    throw ConfigError(buf);
  }
  return c;
}

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
  if (!out) throw Error("failed to write " + p.string());
}

nlohmann::json mat_rows(const Mat& m) {
  auto rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    auto row = nlohmann::json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(row);
  }
  return rows;
}

std::string metrics_csv(const TrainReport& r, std::optional<std::uint64_t> seed) {
  std::string s = seed ? "seed," + metric_csv_header() + "\n" : metric_csv_header() + "\n";
  for (const auto& rec : r.records) {
    if (seed) s += std::to_string(*seed) + ",";
    s += to_csv_row(rec) + "\n";
  }
  return s;
}

nlohmann::json seed_summary(const SeedOutcome& o) {
  const TrainReport& r = o.result.report;
  return {{"surrogate_tv", r.final_metrics.surrogate_tv},
          {"pinsker_tv", r.final_metrics.pinsker_tv},
          {"fosp_residual", r.final_metrics.fosp_residual},
          {"wall_seconds", r.wall_seconds},
          {"target_samples", r.target_samples},
          {"fake_samples", r.fake_samples},
          {"stop_index", r.stop_index},
          {"W", mat_rows(o.result.w.weights())}};
}

/// Writes per-seed and merged CSVs plus summary.json; returns the summary.
nlohmann::json write_outputs(const std::string& command, const ExperimentConfig& cfg, const TrainReport& any,
                             const std::vector<SeedOutcome>& outcomes, const fs::path& out,
                             const nlohmann::json& extra) {
  fs::create_directories(out);
  std::string merged = "seed," + metric_csv_header() + "\n";
  nlohmann::json seeds = nlohmann::json::object();
  std::vector<double> tvs;
  for (const auto& o : outcomes) {
    const fs::path dir = out / ("seed_" + std::to_string(o.seed));
    fs::create_directories(dir);
    write_text(dir / "metrics.csv", metrics_csv(o.result.report, std::nullopt));
    const std::string rows = metrics_csv(o.result.report, o.seed);
    merged += rows.substr(rows.find('\n') + 1);
    seeds[std::to_string(o.seed)] = seed_summary(o);
    tvs.push_back(o.result.report.final_metrics.surrogate_tv);
  }
  write_text(out / "metrics.csv", merged);
  const nlohmann::json resolved = resolved_json(cfg);
  nlohmann::json summary = {{"command", command},
                            {"config", resolved},
                            {"config_sha256", sha256_hex(resolved.dump())},
                            {"budgets", any.budgets},
                            {"seeds", seeds},
                            {"median_surrogate_tv", median(tvs)}};
  for (const auto& [k, v] : extra.items()) summary[k] = v;
  write_text(out / "summary.json", summary.dump(2) + "\n");
  return summary;
}

fs::path output_dir(const ExperimentConfig& cfg, const RunOptions& opts) {
  return fs::path(opts.out_dir ? *opts.out_dir : cfg.out_dir);
}

void print_budgets(const ExperimentConfig& cfg, int d, std::ostream& out) {
  nlohmann::json b = resolve_budgets(cfg.train, d);
  out << nlohmann::json{{"k", b["k"]}, {"M_D", b["M_D"]}, {"M_G", b["M_G"]}, {"beta", b["beta"]}}.dump() << "\n";
}

}  // namespace

ExperimentConfig load_experiment(const nlohmann::json& j) {
  static const char* const kKeys[] = {"dim",   "activation", "sigma_star", "closeness_c", "closeness_ceiling",
                                      "seeds", "train",      "sweep",      "out"};
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (std::find_if(std::begin(kKeys), std::end(kKeys), [&](const char* k) { return key == k; }) == std::end(kKeys))
      throw ConfigError("unknown config key: " + key);
  }
  ExperimentConfig cfg;
  try {
    cfg.dim = j.at("dim").get<int>();
    require_dim(cfg.dim);
    cfg.activation = normalized_activation(j.at("activation"), cfg.dim);
    const ActivationSpec act = activation_from_json(cfg.activation, cfg.dim);
    if (act.kind() == ActivationKind::ReLU && cfg.dim > kReluMaxDim) {
      throw ConfigError("relu experiments are capped at d <= 8: the invertible region has mass 2^-d; "
                        "use sigmoid or identity_on_box for larger d");
    }

    const nlohmann::json sig = j.value("sigma_star", nlohmann::json{{"source", "identity"}});
    const auto source = sig.at("source").get<std::string>();
    if (source == "identity") {
      cfg.sigma_source = SigmaSource::Identity;
    } else if (source == "explicit") {
      cfg.sigma_source = SigmaSource::Explicit;
      const auto rows = sig.at("matrix").get<std::vector<std::vector<double>>>();
      if (static_cast<int>(rows.size()) != cfg.dim) throw ConfigError("sigma_star.matrix must have dim rows");
      cfg.explicit_sigma.resize(cfg.dim, cfg.dim);
      for (int r = 0; r < cfg.dim; ++r) {
        if (static_cast<int>(rows[static_cast<std::size_t>(r)].size()) != cfg.dim)
          throw ConfigError("sigma_star.matrix must be dim x dim");
        for (int c = 0; c < cfg.dim; ++c) cfg.explicit_sigma(r, c) = rows[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)];
      }
      require_finite(cfg.explicit_sigma, "sigma_star.matrix");
      if (!cfg.explicit_sigma.isApprox(cfg.explicit_sigma.transpose(), 1e-12))
        throw ConfigError("sigma_star.matrix must be symmetric");
    } else if (source == "random_spd") {
      cfg.sigma_source = SigmaSource::RandomSpd;
      cfg.random_closeness = sig.at("closeness").get<double>();
      cfg.random_seed = sig.value("seed", std::uint64_t{0});
      if (!(cfg.random_closeness > 0.0)) throw ConfigError("sigma_star.closeness must be positive");
    } else {
      throw ConfigError("sigma_star.source must be identity, explicit or random_spd");
    }

    if (j.contains("closeness_c") && !j.at("closeness_c").is_null()) cfg.closeness_c = j.at("closeness_c").get<double>();
    cfg.closeness_ceiling = j.value("closeness_ceiling", 2.0);
    cfg.seeds = j.value("seeds", std::vector<std::uint64_t>{0});
    if (cfg.seeds.empty()) throw ConfigError("seeds must not be empty");
    if (j.contains("train")) from_json(j.at("train"), cfg.train);
    cfg.train.validate();
    if (j.contains("sweep")) {
      SweepSpec s;
      const auto axis = j.at("sweep").at("axis").get<std::string>();
      if (axis == "samples") s.axis = SweepAxis::Samples;
      else if (axis == "dim") s.axis = SweepAxis::Dim;
      else if (axis == "epsilon") s.axis = SweepAxis::Epsilon;
      else throw ConfigError("sweep.axis must be samples, dim or epsilon");
      s.values = j.at("sweep").at("values").get<std::vector<double>>();
      cfg.sweep = s;
    }
    cfg.out_dir = j.value("out", std::string("."));
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }

  // Validates the closeness assumption and the ceiling without touching any sampling stream.
  if (cfg.sigma_source != SigmaSource::RandomSpd) (void)build_target(cfg, cfg.dim);
  else (void)resolve_closeness(cfg, SymMat::identity(cfg.dim));
  return cfg;
}

ExperimentConfig load_experiment_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("malformed config " + path + ": " + e.what());
  }
  return load_experiment(j);
}

nlohmann::json resolved_json(const ExperimentConfig& cfg) {
  nlohmann::json sig = {{"source", source_name(cfg.sigma_source)}};
  if (cfg.sigma_source == SigmaSource::Explicit) sig["matrix"] = mat_rows(cfg.explicit_sigma);
  if (cfg.sigma_source == SigmaSource::RandomSpd) {
    sig["closeness"] = cfg.random_closeness;
    sig["seed"] = cfg.random_seed;
  }
  nlohmann::json j = {{"dim", cfg.dim},
                      {"activation", cfg.activation},
                      {"sigma_star", sig},
                      {"closeness_ceiling", cfg.closeness_ceiling},
                      {"seeds", cfg.seeds},
                      {"train", cfg.train},
                      {"out", cfg.out_dir}};
  j["closeness_c"] = cfg.closeness_c ? nlohmann::json(*cfg.closeness_c) : nlohmann::json(nullptr);
  if (cfg.sweep) j["sweep"] = {{"axis", axis_name(cfg.sweep->axis)}, {"values", cfg.sweep->values}};
  return j;
}

std::string sha256_hex(const std::string& data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1)
    throw Error("SHA-256 digest failed");
  std::string hex;
  char buf[3];
  for (unsigned int i = 0; i < len; ++i) {
    std::snprintf(buf, sizeof buf, "%02x", digest[i]);
    hex += buf;
  }
  return hex;
}

SymMat random_spd(int d, double c, RngStream& rng) {
  require_dim(d);
  if (!(c > 0.0)) throw ConfigError("random_spd: closeness must be positive");
  Mat g(d, d);
  for (int i = 0; i < d; ++i)
    for (int k = 0; k < d; ++k) g(i, k) = rng.normal();
  Mat s = g + g.transpose();
  s /= s.norm();
  const double goal = c / 1.1;
  auto at = [&](double t) { return closeness(SymMat(Mat(Mat::Identity(d, d) + t * s))); };
  // closeness is increasing in t while I + t S stays positive definite; the
  // smallest eigenvalue of S is at least -1, so t < 1 keeps it definite.
  double lo = 0.0, hi = 1.0 - 1e-9;
  if (at(hi) < goal) throw ConfigError("random_spd: closeness target out of reach");
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (at(mid) < goal ? lo : hi) = mid;
  }
  return SymMat(Mat(Mat::Identity(d, d) + lo * s));
}

TargetSpec build_target(const ExperimentConfig& cfg, int d) {
  if (cfg.sigma_source == SigmaSource::Explicit && d != cfg.dim)
    throw ConfigError("an explicit sigma_star cannot be resized");
  nlohmann::json act = cfg.activation;
  if (d != cfg.dim) act = normalized_activation(nlohmann::json{{"kind", act.at("kind")}}, d);
  const SymMat sigma = base_sigma(cfg, d);
  return TargetSpec(sigma, activation_from_json(act, d), resolve_closeness(cfg, sigma));
}

std::vector<SeedOutcome> run_seeds(const ExperimentConfig& cfg, const TargetSpec& target, const RunOptions& opts,
                                   const std::string& checkpoint_root) {
  std::vector<SeedOutcome> outcomes;
  for (const std::uint64_t base : cfg.seeds) {
    TrainConfig tc = cfg.train;
    tc.seed = base + opts.seed_offset;
    if (opts.checkpoint_every) tc.checkpoint_every = *opts.checkpoint_every;
    if (tc.checkpoint_every > 0)
      tc.checkpoint_dir = (fs::path(checkpoint_root) / ("seed_" + std::to_string(tc.seed)) / "checkpoints").string();
    outcomes.push_back({tc.seed, nested_sgda(target, tc)});
  }
  return outcomes;
}

std::vector<SweepRow> run_sweep(const ExperimentConfig& cfg, const RunOptions& opts) {
  if (!cfg.sweep) throw ConfigError("sweep requires a 'sweep' section");
  if (cfg.sweep->values.empty()) throw ConfigError("sweep grid is empty");
  std::vector<SweepRow> rows;
  for (const double v : cfg.sweep->values) {
    ExperimentConfig point = cfg;
    int d = cfg.dim;
    switch (cfg.sweep->axis) {
      case SweepAxis::Samples:
        if (!(v >= 1.0) || v != std::floor(v)) throw ConfigError("samples axis values must be positive integers");
        point.train.real_samples = static_cast<int>(v);
        break;
      case SweepAxis::Dim:
        if (!(v >= 1.0) || v != std::floor(v)) throw ConfigError("dim axis values must be positive integers");
        d = static_cast<int>(v);
        require_dim(d);
        break;
      case SweepAxis::Epsilon:
        point.train.epsilon = v;
        break;
    }
    point.train.checkpoint_every = 0;
    point.train.validate();
    const TargetSpec target = build_target(point, d);
    RunOptions o = opts;
    o.checkpoint_every.reset();
    for (const auto& out : run_seeds(point, target, o, "")) {
      rows.push_back({v, out.seed, out.result.report.final_metrics.surrogate_tv, out.result.report.target_samples,
                      out.result.report.budgets.M_G});
    }
  }
  return rows;
}

std::vector<double> sweep_medians(const SweepSpec& grid, const std::vector<SweepRow>& rows) {
  std::vector<double> out;
  for (const double v : grid.values) {
    std::vector<double> tv;
    for (const auto& r : rows)
      if (r.axis_value == v) tv.push_back(r.surrogate_tv);
    out.push_back(tv.empty() ? 0.0 : median(tv));
  }
  return out;
}

int cmd_train(const ExperimentConfig& cfg, const RunOptions& opts, std::ostream& out, std::ostream& err) {
  try {
    if (opts.dry_run) {
      print_budgets(cfg, cfg.dim, out);
      return kSuccess;
    }
    const TargetSpec target = build_target(cfg, cfg.dim);
    const fs::path dir = output_dir(cfg, opts);
    const auto outcomes = run_seeds(cfg, target, opts, dir.string());
    const auto summary = write_outputs("train", cfg, outcomes.front().result.report, outcomes, dir, {});
    out << "median surrogate_tv " << summary["median_surrogate_tv"].get<double>() << " over " << outcomes.size()
        << " seeds; outputs in " << dir.string() << "\n";
    return kSuccess;
  } catch (const std::exception& e) {
    return report_error(e, err);
  }
}

int cmd_sweep(const ExperimentConfig& cfg, const RunOptions& opts, std::ostream& out, std::ostream& err) {
  try {
    if (!cfg.sweep || cfg.sweep->values.empty()) throw ConfigError("sweep grid is empty");
    if (opts.dry_run) {
      for (const double v : cfg.sweep->values) {
        ExperimentConfig point = cfg;
        int d = cfg.dim;
        if (cfg.sweep->axis == SweepAxis::Samples) point.train.real_samples = static_cast<int>(v);
        if (cfg.sweep->axis == SweepAxis::Dim) d = static_cast<int>(v);
        if (cfg.sweep->axis == SweepAxis::Epsilon) point.train.epsilon = v;
        print_budgets(point, d, out);
      }
      return kSuccess;
    }
    const auto rows = run_sweep(cfg, opts);
    const fs::path dir = output_dir(cfg, opts);
    fs::create_directories(dir);
    std::string csv = "axis_value,seed,surrogate_tv,samples,iterations\n";
    char buf[256];
    for (const auto& r : rows) {
      std::snprintf(buf, sizeof buf, "%.17g,%llu,%.17g,%lld,%d\n", r.axis_value,
                    static_cast<unsigned long long>(r.seed), r.surrogate_tv, static_cast<long long>(r.samples),
                    r.iterations);
      csv += buf;
    }
    write_text(dir / "sweep.csv", csv);
    const auto medians = sweep_medians(*cfg.sweep, rows);
    std::vector<double> ratios;
    for (std::size_t i = 1; i < medians.size(); ++i) ratios.push_back(medians[i] / medians[i - 1]);
    const nlohmann::json resolved = resolved_json(cfg);
    const nlohmann::json summary = {{"command", "sweep"},
                                    {"config", resolved},
                                    {"config_sha256", sha256_hex(resolved.dump())},
                                    {"axis", axis_name(cfg.sweep->axis)},
                                    {"values", cfg.sweep->values},
                                    {"median_surrogate_tv", medians},
                                    {"median_ratios", ratios}};
    write_text(dir / "summary.json", summary.dump(2) + "\n");
    for (std::size_t i = 0; i < medians.size(); ++i)
      out << axis_name(cfg.sweep->axis) << "=" << cfg.sweep->values[i] << " median surrogate_tv " << medians[i]
          << "\n";
    return kSuccess;
  } catch (const std::exception& e) {
    return report_error(e, err);
  }
}

int cmd_truncated_gaussian(const ExperimentConfig& cfg, const RunOptions& opts, std::ostream& out,
                           std::ostream& err) {
  try {
    if (cfg.activation.at("kind") != "identity_on_box")
      throw ConfigError("truncated-gaussian requires activation kind identity_on_box");
    if (opts.dry_run) {
      print_budgets(cfg, cfg.dim, out);
      return kSuccess;
    }
    const TargetSpec target = build_target(cfg, cfg.dim);
    RngStream mass_rng(cfg.seeds.front() + opts.seed_offset, 0xB0C5);
    const Estimate mass = estimate_mass_T(target.sigma_sqrt().matrix(), target.activation(), kMassProbeSamples, mass_rng);
    if (mass.value < kMinMass) {
      char buf[200];
      std::snprintf(buf, sizeof buf,
                    "box mass %.4g < %.2g under the target: warning, too few samples land in the box to "
                    "recover the covariance",
                    mass.value, kMinMass);
      throw ConfigError(buf);
    }
    const fs::path dir = output_dir(cfg, opts);
    const auto outcomes = run_seeds(cfg, target, opts, dir.string());
    nlohmann::json recovered = nlohmann::json::object();
    for (const auto& o : outcomes) {
      const Mat& w = o.result.w.weights();
      recovered[std::to_string(o.seed)] = mat_rows(w * w.transpose());
    }
    const auto summary = write_outputs("truncated-gaussian", cfg, outcomes.front().result.report, outcomes, dir,
                                       {{"box_mass", {{"value", mass.value}, {"std_error", mass.std_error}}},
                                        {"recovered_covariance", recovered}});
    out << "box mass " << mass.value << "; median surrogate_tv " << summary["median_surrogate_tv"].get<double>()
        << " over " << outcomes.size() << " seeds; outputs in " << dir.string() << "\n";
    return kSuccess;
  } catch (const std::exception& e) {
    return report_error(e, err);
  }
}

int report_error(const std::exception& e, std::ostream& err) {
  if (dynamic_cast<const ConfigError*>(&e) != nullptr) {
    err << "config error: " << e.what() << "\n";
    return kConfigError;
  }
  if (dynamic_cast<const NumericalError*>(&e) != nullptr) {
    err << "numerical failure: " << e.what() << "\n";
    return kNumericalFailure;
  }
  err << "error: " << e.what() << "\n";
  return kNumericalFailure;
}

}  // namespace nsgda::harness
