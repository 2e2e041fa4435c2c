// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "nsgda/nested_sgda.hpp"

namespace nsgda::harness {

enum ExitCode : int { kSuccess = 0, kInvariantFailure = 1, kConfigError = 2, kNumericalFailure = 3 };

enum class SigmaSource { Identity, Explicit, RandomSpd };
enum class SweepAxis { Samples, Dim, Epsilon };

struct SweepSpec {
  SweepAxis axis = SweepAxis::Samples;
  std::vector<double> values;
};

/*!
 * Experiment configuration, loaded from one JSON document:
 *
 *   {
 *     "dim": 3,
 *     "activation": {"kind": "sigmoid" | "relu" | "identity_on_box", "lo": [..], "hi": [..]},
 *     "sigma_star": {"source": "identity"}
 *                 | {"source": "explicit", "matrix": [[..], ..]}
 *                 | {"source": "random_spd", "closeness": 0.3, "seed": 7},
 *     "closeness_c": 0.5,          // optional; derived when absent
 *     "closeness_ceiling": 2.0,    // optional
 *     "seeds": [0, 1, 2],
 *     "train": { TrainConfig keys: epsilon, k, M_D, M_G, mu, beta, R, L, B, ... },
 *     "sweep": {"axis": "samples" | "dim" | "epsilon", "values": [..]},   // sweep only
 *     "out": "results"             // optional; --out overrides
 *   }
 *
 * box bounds for identity_on_box default to [-1, 1]^d when omitted.
 */
struct ExperimentConfig {
  int dim = 0;
  nlohmann::json activation;
  SigmaSource sigma_source = SigmaSource::Identity;
  Mat explicit_sigma;
  double random_closeness = 0.0;
  std::uint64_t random_seed = 0;
  std::optional<double> closeness_c;
  double closeness_ceiling = 2.0;
  std::vector<std::uint64_t> seeds;
  TrainConfig train;
  std::optional<SweepSpec> sweep;
  std::string out_dir = ".";
};

/// Parses and validates; throws ConfigError. Does not sample.
ExperimentConfig load_experiment(const nlohmann::json& j);
ExperimentConfig load_experiment_file(const std::string& path);

/// Canonical JSON of the configuration with every default filled in.
nlohmann::json resolved_json(const ExperimentConfig& cfg);

/// Lowercase hex SHA-256 of `data`.
std::string sha256_hex(const std::string& data);

/*!
 * Random SPD matrix I + t S with S = (G + G^T)/||G + G^T||_F for Gaussian G,
 * where t is chosen by bisection so that closeness(Sigma) = c / 1.1.
 */
SymMat random_spd(int d, double c, RngStream& rng);

/// Builds the target of `cfg` at dimension d (d may differ from cfg.dim in dim sweeps).
TargetSpec build_target(const ExperimentConfig& cfg, int d);

struct RunOptions {
  std::optional<std::string> out_dir;
  std::uint64_t seed_offset = 0;
  bool dry_run = false;
  std::optional<int> checkpoint_every;
};

struct SeedOutcome {
  std::uint64_t seed = 0;
  TrainResult result;
};

/// Trains every seed of `cfg` on `target`; no files are written.
std::vector<SeedOutcome> run_seeds(const ExperimentConfig& cfg, const TargetSpec& target, const RunOptions& opts,
                                   const std::string& checkpoint_root);

/// One row of sweep.csv.
struct SweepRow {
  double axis_value = 0.0;
  std::uint64_t seed = 0;
  double surrogate_tv = 0.0;
  std::int64_t samples = 0;
  int iterations = 0;
};

std::vector<SweepRow> run_sweep(const ExperimentConfig& cfg, const RunOptions& opts);

/// Median surrogate_tv per axis value, in grid order.
std::vector<double> sweep_medians(const SweepSpec& grid, const std::vector<SweepRow>& rows);

int cmd_train(const ExperimentConfig& cfg, const RunOptions& opts, std::ostream& out, std::ostream& err);
int cmd_sweep(const ExperimentConfig& cfg, const RunOptions& opts, std::ostream& out, std::ostream& err);
int cmd_truncated_gaussian(const ExperimentConfig& cfg, const RunOptions& opts, std::ostream& out,
                           std::ostream& err);

enum class CheckLevel { Quick, Full };

struct CheckHooks {
  bool corrupt_disc_gradient = false;  ///< flips the sign of disc_grad_pair inside the checks
};

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

std::vector<CheckResult> run_checks(CheckLevel level, const CheckHooks& hooks, std::ostream& progress);
int cmd_check(CheckLevel level, const CheckHooks& hooks, std::ostream& out);

/// Maps an exception from a command to its exit code and prints it.
int report_error(const std::exception& e, std::ostream& err);

}  // namespace nsgda::harness
