// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "nsgda/metrics.hpp"
#include "nsgda/sga.hpp"

namespace nsgda {

/*!
 * Training configuration. Budgets left at their sentinel values are derived:
 *   k   = ceil(C_k d^2 / eps^2 * max(ln d, 1))
 *   M_D = ceil(C_D d^2 / eps^2)
 *   M_G = ceil(C_G d^2 / eps^4)
 *   beta = sqrt(2 R / (L B M_G)), B = 10 d^2 unless given.
 */
struct TrainConfig {
  double epsilon = 0.1;
  std::uint64_t seed = 0;

  int real_samples = 0;       ///< k; 0 derives it
  int inner_iterations = 0;   ///< M_D; 0 derives it
  int outer_iterations = -1;  ///< M_G; negative derives it, 0 runs nothing
  double C_k = 4.0;
  double C_D = 4.0;
  double C_G = 0.5;

  double mu = 0.05;
  bool auto_mu = false;  ///< replace mu by the measured curvature at (A, b) = (0, 0)
  bool averaging = true;
  SgaInit init = SgaInit::Zero;

  double beta = 0.0;  ///< 0 derives it from R, L, B
  double R = 10.0;
  double L = 10.0;
  double B = 0.0;  ///< 0 means 10 d^2

  int batch = 1;  ///< latents averaged per generator step
  bool precondition = false;

  int metrics_every = 1;  ///< 0 disables per-iteration metrics
  int fosp_samples = 256;         ///< per-iteration FOSP residual draws
  int final_fosp_samples = 100000;  ///< draws for the returned iterate
  bool disc_gap = true;  ///< record ||A - A*||_F + |b - b*| (needs the true target)

  int checkpoint_every = 0;
  std::string checkpoint_dir;

  void validate() const;
};

void to_json(nlohmann::json& j, const TrainConfig& c);
/// Missing keys keep their defaults; unknown keys are rejected.
void from_json(const nlohmann::json& j, TrainConfig& c);

struct ResolvedBudgets {
  int k = 0;
  int M_D = 0;
  int M_G = 0;
  double beta = 0.0;
  double mu = 0.0;
  double R = 0.0;
  double L = 0.0;
  double B = 0.0;
};
void to_json(nlohmann::json& j, const ResolvedBudgets& b);

/// Derives every budget without sampling (auto_mu keeps the configured mu here).
ResolvedBudgets resolve_budgets(const TrainConfig& config, int d);

struct TrainReport {
  ResolvedBudgets budgets;
  Mat w_last;
  int stop_index = 0;  ///< 0 when no outer iteration ran
  std::vector<MetricRecord> records;
  MetricRecord final_metrics;  ///< metrics of the returned iterate
  std::int64_t target_samples = 0;
  std::int64_t fake_samples = 0;
  double real_in_region_fraction = 0.0;
  double wall_seconds = 0.0;
};

struct Checkpoint {
  int iteration = 0;
  Mat w;
  DiscriminatorParams disc;
  RngState rng_state;
  MetricRecord metrics;
};
void to_json(nlohmann::json& j, const Checkpoint& c);
Checkpoint checkpoint_from_json(const nlohmann::json& j);

struct TrainResult {
  GeneratorParams w;
  TrainReport report;
};

/*!
 * Nested SGDA. Draws k target samples once, starts from W = I (or from
 * the preconditioned initializer), and for each of M_G outer iterations
 * trains a fresh discriminator with sga_discriminator, then takes one
 * projected generator step along the mean gradient over `batch` latents.
 * Returns the iterate at a stopping index m ~ U{1..M_G}; metrics of every
 * iterate are kept in the report.
 */
TrainResult nested_sgda(const TargetSpec& target, const TrainConfig& config);

}  // namespace nsgda
