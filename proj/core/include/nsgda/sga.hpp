// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <vector>

#include "nsgda/projection.hpp"

namespace nsgda {

enum class SgaInit { Zero, Gaussian };

/// Inner-loop schedule: eta_t = 2 / (mu (t + 1)), averaging weights gamma_t = 2t / (T (T + 1)).
struct SgaSchedule {
  double mu = 0.05;
  int iterations = 1;
  bool averaging = true;
  SgaInit init = SgaInit::Zero;
  double init_scale = 0.01;

  void validate() const;
};

/// Cached target samples with their pre-activations (inverted once).
class RealSampleSet {
 public:
  RealSampleSet(std::vector<Vec> samples, const ActivationSpec& act);

  [[nodiscard]] int size() const noexcept { return static_cast<int>(samples_.size()); }
  [[nodiscard]] int dim() const noexcept { return dim_; }
  [[nodiscard]] int in_region_count() const noexcept { return in_count_; }
  [[nodiscard]] bool in_region(int i) const noexcept { return in_[static_cast<std::size_t>(i)] != 0; }
  /// phi^{-1}(x_i); meaningful only when in_region(i).
  [[nodiscard]] const double* preactivation(int i) const noexcept {
    return pre_.data() + static_cast<std::size_t>(i) * dim_;
  }
  [[nodiscard]] const std::vector<Vec>& samples() const noexcept { return samples_; }

 private:
  std::vector<Vec> samples_;
  std::vector<double> pre_;
  std::vector<std::uint8_t> in_;
  int dim_;
  int in_count_ = 0;
};

/*!
 * Projected stochastic gradient ascent on the discriminator at fixed W.
 *
 * Step t draws a fresh fake sample phi(W z), takes the next real sample from a
 * seeded permutation of `real` (cycling when t exceeds its size), ascends
 * along disc_grad_pair with eta_t and projects onto Q_D. Returns the
 * gamma-weighted average iterate, or the last iterate without averaging.
 */
DiscriminatorParams sga_discriminator(const Mat& w, const ActivationSpec& act, const RealSampleSet& real,
                                      const ProjectionSets& ps, const SgaSchedule& sched, RngStream& rng);

}  // namespace nsgda
