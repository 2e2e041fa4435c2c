// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <span>

#include "nsgda/discriminator.hpp"

namespace nsgda {

/*!
 * Stochastic gradient of log(1 - D(phi(W z); A, b)) with respect to W:
 *   Ind{W z in T} * (-sigmoid(h(W z))) * 2 A W z z^T.
 * Off T the discriminator is constant, so the gradient vanishes.
 */
Mat generator_gradient(const Mat& w, const DiscriminatorParams& p, const ActivationSpec& act, const Vec& z);

/// Mean of generator_gradient over a fixed latent set.
Mat generator_gradient_mean(const Mat& w, const DiscriminatorParams& p, const ActivationSpec& act,
                            std::span<const Vec> latents);

/// Monte Carlo generator objective mean_i log(1 - D(phi(W z_i))) over a fixed latent set.
double generator_objective(const Mat& w, const DiscriminatorParams& p, const ActivationSpec& act,
                           std::span<const Vec> latents);

/// Monte Carlo E ||g_G||_F^2 with a batch-means standard error.
Estimate generator_second_moment(const Mat& w, const DiscriminatorParams& p, const ActivationSpec& act,
                                 int n, RngStream& rng);

}  // namespace nsgda
