// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "nsgda/numerics.hpp"
#include "nsgda/stats.hpp"

namespace nsgda {

enum class ActivationKind { ReLU, Sigmoid, IdentityOnBox };

/*!
 * The output transformation phi together with its invertible region T and
 * image S = phi(T).
 *
 *  - ReLU:          T = S = open positive orthant.
 *  - Sigmoid:       T = R^d, S = (0, 1)^d.
 *  - IdentityOnBox: phi is the identity, T = S = the open box (lo, hi).
 */
class ActivationSpec {
 public:
  static ActivationSpec relu(int d);
  static ActivationSpec sigmoid(int d);
  static ActivationSpec identity_on_box(Vec lo, Vec hi);

  [[nodiscard]] ActivationKind kind() const noexcept { return kind_; }
  [[nodiscard]] int dim() const noexcept { return dim_; }
  [[nodiscard]] const Vec& lower() const noexcept { return lo_; }
  [[nodiscard]] const Vec& upper() const noexcept { return hi_; }
  [[nodiscard]] std::string name() const;

  [[nodiscard]] Vec forward(const Vec& x) const;

  /// phi^{-1} on S. Throws OutsideInvertibleRegion when y is not in S.
  [[nodiscard]] Vec inverse(const Vec& y) const;

  /// Membership in T (pre-activation space).
  [[nodiscard]] bool in_domain(const Vec& x) const;
  /// Membership in S (post-activation space).
  [[nodiscard]] bool in_image(const Vec& y) const;

  // Unchecked raw-pointer variants for inner loops; `x` has dim() entries.
  [[nodiscard]] bool in_domain(const double* x) const noexcept;
  void forward_inplace(double* x) const noexcept;

 private:
  ActivationSpec(ActivationKind kind, int d, Vec lo, Vec hi);
  void check_dim(const Vec& v) const;

  ActivationKind kind_ = ActivationKind::Sigmoid;
  int dim_ = 1;
  Vec lo_;
  Vec hi_;
};

/// Upper bound on cond(W) accepted by GeneratorParams.
inline constexpr double kMaxGeneratorCondition = 1e8;

/// Weight matrix of the one-layer generator x = phi(W z).
class GeneratorParams {
 public:
  /// Throws Singular when cond(W) > kMaxGeneratorCondition.
  explicit GeneratorParams(Mat w);
  static GeneratorParams identity(int d);

  [[nodiscard]] const Mat& weights() const noexcept { return w_; }
  [[nodiscard]] int dim() const noexcept { return static_cast<int>(w_.rows()); }

 private:
  Mat w_;
};

/// max(||S - I||_F, ||S^{-1} - I||_F), the closeness measured by Assumption 1.
double closeness(const SymMat& sigma);

/*!
 * Target distribution p(Sigma*^{1/2}, phi) plus the declared closeness bound c.
 * Construction validates positive definiteness and closeness(sigma_star) <= c.
 */
class TargetSpec {
 public:
  TargetSpec(SymMat sigma_star, ActivationSpec activation, double closeness_c);

  [[nodiscard]] const SymMat& sigma_star() const noexcept { return sigma_; }
  [[nodiscard]] const SymMat& sigma_sqrt() const noexcept { return sqrt_; }
  [[nodiscard]] const Mat& sigma_inv() const noexcept { return inv_; }
  [[nodiscard]] const ActivationSpec& activation() const noexcept { return act_; }
  [[nodiscard]] double closeness_c() const noexcept { return c_; }
  [[nodiscard]] int dim() const noexcept { return sigma_.dim(); }

 private:
  SymMat sigma_;
  SymMat sqrt_;
  Mat inv_;
  ActivationSpec act_;
  double c_;
};

void to_json(nlohmann::json& j, const ActivationSpec& a);
ActivationSpec activation_from_json(const nlohmann::json& j, int dim);
void to_json(nlohmann::json& j, const TargetSpec& t);
TargetSpec target_from_json(const nlohmann::json& j);

/// A generator draw together with its latent.
struct GeneratorSample {
  Vec x;  ///< phi(W z)
  Vec z;  ///< latent ~ N(0, I)
};

GeneratorSample sample_p(const Mat& w, const ActivationSpec& act, RngStream& rng);
inline GeneratorSample sample_p(const GeneratorParams& w, const ActivationSpec& act, RngStream& rng) {
  return sample_p(w.weights(), act, rng);
}

/// One post-activation draw from the target.
Vec sample_target(const TargetSpec& target, RngStream& rng);
std::vector<Vec> sample_target(const TargetSpec& target, int n, RngStream& rng);

/// Monte Carlo estimate of N(T; W) = Pr[W z in T]; binomial standard error.
Estimate estimate_mass_T(const Mat& w, const ActivationSpec& act, int n, RngStream& rng);

/// Whitening of in-region target samples.
struct Preconditioner {
  Mat transform;       ///< M with M C M^T = I
  SymMat covariance;   ///< C, second moment of inverted in-region samples
  int in_region = 0;
  double in_region_fraction = 0.0;

  /// C^{1/2}: the generator weights that M maps to the identity.
  [[nodiscard]] Mat initial_weights() const;
};

/// Throws InsufficientInRegionSamples when fewer than d samples lie in S.
Preconditioner precondition(std::span<const Vec> samples, const ActivationSpec& act);

}  // namespace nsgda
